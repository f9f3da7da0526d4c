// Copyright 2026 The h2r Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "h2r/servo.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "h2r/errors.h"
#include "h2r/simworld.h"

namespace h2r {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

TEST(PidStep, PureProportional) {
  PidGains g{1.0, 0.0, 0.0, 1.0, 10.0};
  PidState s;
  EXPECT_DOUBLE_EQ(PidStep(s, 0.3, 0.1, g), 0.3);
}

TEST(PidStep, ZeroErrorKeepsMemoryZero) {
  PidGains g{0.8, 0.5, 0.1, 1.0, 0.3};
  PidState s;
  for (int i = 0; i < 20; ++i) EXPECT_EQ(PidStep(s, 0.0, 0.25, g), 0.0);
  EXPECT_EQ(s.integral, 0.0);
  EXPECT_EQ(s.previous_error, 0.0);
}

TEST(PidStep, TrapezoidIntegralOfConstant) {
  PidGains g{0.0, 1.0, 0.0, 10.0, 10.0};
  PidState s;
  double v = 0.0;
  for (int i = 0; i < 10; ++i) v = PidStep(s, 0.1, 0.1, g);
  // A constant integrates exactly under the trapezoid rule: 0.1 * (10 * 0.1).
  EXPECT_NEAR(v, 0.1, 1e-12);
  EXPECT_NEAR(s.integral, 0.1, 1e-12);
}

TEST(PidStep, DerivativeIsBackwardDifference) {
  PidGains g{0.0, 0.0, 1.0, 1.0, 100.0};
  PidState s;
  EXPECT_EQ(PidStep(s, 0.2, 0.5, g), 0.0);  // no history yet
  EXPECT_NEAR(PidStep(s, 0.5, 0.5, g), (0.5 - 0.2) / 0.5, 1e-15);
}

TEST(PidStep, Clamps) {
  PidGains g{0.0, 1.0, 0.0, 0.05, 0.3};
  PidState s;
  for (int i = 0; i < 100; ++i) PidStep(s, 1.0, 0.1, g);
  EXPECT_DOUBLE_EQ(s.integral, 0.05);
  PidGains p{10.0, 0.0, 0.0, 1.0, 0.3};
  PidState t;
  EXPECT_DOUBLE_EQ(PidStep(t, -5.0, 0.1, p), -0.3);
}

TEST(PidStep, ProportionalOnlyIsLinear) {
  PidGains g{0.7, 0.0, 0.0, 1.0, 1e9};
  for (double a : {-3.0, -0.1, 0.0, 0.25, 7.0}) {
    for (double b : {-1.0, 0.5, 2.0}) {
      PidState s1, s2, s3;
      const double lhs = PidStep(s1, 2.0 * a + 3.0 * b, 0.1, g);
      const double rhs = 2.0 * PidStep(s2, a, 0.1, g) + 3.0 * PidStep(s3, b, 0.1, g);
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
  }
}

TEST(SequentialAxis, PriorityOrder) {
  ServoConfig cfg;
  cfg.eps_x = cfg.eps_y = 0.01;
  cfg.eps_yaw = kDeg;
  EXPECT_EQ(SequentialAxis({0.005, -0.009, 0.5 * kDeg}, cfg), Axis::kDone);
  EXPECT_EQ(SequentialAxis({0.05, 0.04, 10 * kDeg}, cfg), Axis::kX);
  EXPECT_EQ(SequentialAxis({0.001, 0.04, 10 * kDeg}, cfg), Axis::kY);
  EXPECT_EQ(SequentialAxis({0.001, 0.0, -10 * kDeg}, cfg), Axis::kYaw);
  EXPECT_EQ(SequentialAxis({0.01, 0.01, kDeg}, cfg), Axis::kDone);  // boundary is inside
}

TEST(ExtractPoseErrors, IdentityIsZero) {
  const PoseError e = ExtractPoseErrors({}, WorldConfig::DefaultMount());
  EXPECT_NEAR(e.e_x, 0.0, 1e-15);
  EXPECT_NEAR(e.e_y, 0.0, 1e-15);
  EXPECT_NEAR(e.e_yaw, 0.0, 1e-15);
}

TEST(ExtractPoseErrors, AlignedForwardOffset) {
  // Goal 0.2 m ahead: goal-camera coordinates are current ones shifted back.
  const RigidTransform relative{{}, Vec3(-0.2, 0.0, 0.0)};
  const PoseError e = ExtractPoseErrors(relative, {});
  EXPECT_NEAR(e.e_x, 0.2, 1e-15);
  EXPECT_NEAR(e.e_y, 0.0, 1e-15);
  EXPECT_NEAR(e.e_yaw, 0.0, 1e-15);
}

TEST(ExtractPoseErrors, YawedMountMovesOffsetToY) {
  // Camera x axis along base y: a camera-forward offset is a base-lateral one.
  const RigidTransform mount{UnitQuaternion::FromYaw(std::numbers::pi / 2), Vec3::Zero()};
  const RigidTransform relative{{}, Vec3(-0.2, 0.0, 0.0)};
  const PoseError e = ExtractPoseErrors(relative, mount);
  EXPECT_NEAR(e.e_x, 0.0, 1e-15);
  EXPECT_NEAR(e.e_y, 0.2, 1e-15);
}

TEST(ExtractPoseErrors, MatchesSimulatedGeometry) {
  // Oracle: the goal base pose in the current base frame, from world poses.
  WorldConfig wc;
  const BaseState cur{0.3, -0.1, 0.4};
  const BaseState goal{-0.05, 0.2, -0.3};
  const RigidTransform cam_cur = CameraInWorld(cur, wc);
  const RigidTransform cam_goal = CameraInWorld(goal, wc);
  const RigidTransform relative = Compose(cam_goal.Inverse(), cam_cur);
  const PoseError e = ExtractPoseErrors(relative, wc.mount);
  const double dx = goal.x - cur.x;
  const double dy = goal.y - cur.y;
  EXPECT_NEAR(e.e_x, std::cos(cur.yaw) * dx + std::sin(cur.yaw) * dy, 1e-12);
  EXPECT_NEAR(e.e_y, -std::sin(cur.yaw) * dx + std::cos(cur.yaw) * dy, 1e-12);
  EXPECT_NEAR(e.e_yaw, WrapAngle(goal.yaw - cur.yaw), 1e-12);
}

WorldConfig NoiseFree() {
  WorldConfig wc;
  wc.pixel_noise_sigma = 0.0;
  wc.outlier_fraction = 0.0;
  wc.depth_noise_sigma = 0.0;
  wc.actuation_noise_sigma = 0.0;
  wc.seed = 11;
  return wc;
}

ServoConfig ServoFor(const WorldConfig& wc) {
  ServoConfig sc;
  sc.extrinsic = wc.mount;
  return sc;
}

TEST(ServoLoop, StartAtGoal) {
  const WorldConfig wc = NoiseFree();
  SimServoWorld world(wc, GenerateField(wc), {}, {}, 1);
  const ServoOutcome out = ServoLoop(world, ServoFor(wc), 2);
  EXPECT_TRUE(out.converged());
  EXPECT_LE(out.steps, 1);
  for (const ServoRecord& r : out.history) {
    EXPECT_EQ(r.command.v_x, 0.0);
    EXPECT_EQ(r.command.v_y, 0.0);
    EXPECT_EQ(r.command.v_yaw, 0.0);
  }
}

TEST(ServoLoop, ConvergesNoiseFree) {
  const WorldConfig wc = NoiseFree();
  const ServoConfig sc = ServoFor(wc);
  SimServoWorld world(wc, GenerateField(wc), {0.3, -0.2, 15 * kDeg}, {}, 3);
  const ServoOutcome out = ServoLoop(world, sc, 4);
  ASSERT_TRUE(out.converged());
  // The estimate is exact here, so ground truth meets the same per-axis test.
  const BaseState& s = world.state();
  const PoseError truth{-std::cos(s.yaw) * s.x - std::sin(s.yaw) * s.y,
                        std::sin(s.yaw) * s.x - std::cos(s.yaw) * s.y, -s.yaw};
  EXPECT_TRUE(WithinThresholds(truth, sc));
  EXPECT_LE(out.final_ground_truth->ori, sc.eps_yaw);
}

TEST(ServoLoop, TerminationImpliesFinalErrorsWithinThresholds) {
  WorldConfig wc;
  wc.seed = 5;
  const ServoConfig sc = ServoFor(wc);
  SimServoWorld world(wc, GenerateField(wc), {-0.2, 0.35, -12 * kDeg}, {}, 6);
  const ServoOutcome out = ServoLoop(world, sc, 7);
  ASSERT_TRUE(out.converged());
  const PoseError& e = out.history.back().error;
  EXPECT_LE(std::abs(e.e_x), sc.eps_x);
  EXPECT_LE(std::abs(e.e_y), sc.eps_y);
  EXPECT_LE(std::abs(e.e_yaw), sc.eps_yaw);
  EXPECT_EQ(out.history.back().active_axis, "done");
}

TEST(ServoLoop, ActiveAxisEventuallyMonotone) {
  WorldConfig wc = NoiseFree();
  wc.coupling_gain = 0.0;
  const ServoConfig sc = ServoFor(wc);
  SimServoWorld world(wc, GenerateField(wc), {0.4, 0.25, -18 * kDeg}, {}, 8);
  const ServoOutcome out = ServoLoop(world, sc, 9);
  ASSERT_TRUE(out.converged());
  // Within each run of one active axis, |error| rises at most once.
  auto axis_error = [](const ServoRecord& r) {
    if (r.active_axis == "x") return std::abs(r.error.e_x);
    if (r.active_axis == "y") return std::abs(r.error.e_y);
    return std::abs(r.error.e_yaw);
  };
  int rises = 0;
  for (size_t i = 1; i < out.history.size(); ++i) {
    if (out.history[i].active_axis != out.history[i - 1].active_axis) {
      rises = 0;
      continue;
    }
    if (axis_error(out.history[i]) > axis_error(out.history[i - 1])) ++rises;
    EXPECT_LE(rises, 1) << "cycle " << i;
  }
}

TEST(ServoLoop, OnlyActiveAxisIsCommanded) {
  WorldConfig wc;
  wc.seed = 10;
  SimServoWorld world(wc, GenerateField(wc), {0.3, 0.3, 10 * kDeg}, {}, 11);
  const ServoOutcome out = ServoLoop(world, ServoFor(wc), 12);
  for (const ServoRecord& r : out.history) {
    const int nonzero = (r.command.v_x != 0.0) + (r.command.v_y != 0.0) +
                        (r.command.v_yaw != 0.0);
    EXPECT_LE(nonzero, 1);
    if (r.active_axis == "x") EXPECT_EQ(r.command.v_y, 0.0);
  }
}

TEST(ServoLoop, SimultaneousModeDrivesAllAxes) {
  WorldConfig wc = NoiseFree();
  ServoConfig sc = ServoFor(wc);
  sc.simultaneous = true;
  SimServoWorld world(wc, GenerateField(wc), {0.3, 0.3, 10 * kDeg}, {}, 13);
  const ServoOutcome out = ServoLoop(world, sc, 14);
  ASSERT_FALSE(out.history.empty());
  EXPECT_EQ(out.history.front().active_axis, "all");
  EXPECT_NE(out.history.front().command.v_x, 0.0);
  EXPECT_NE(out.history.front().command.v_yaw, 0.0);
}

TEST(ServoLoop, StepBudget) {
  WorldConfig wc;
  wc.seed = 15;
  ServoConfig sc = ServoFor(wc);
  sc.max_steps = 1;
  SimServoWorld world(wc, GenerateField(wc), {0.5, 0.0, 0.0}, {}, 16);
  const ServoOutcome out = ServoLoop(world, sc, 17);
  EXPECT_EQ(out.status, ServoStatus::kStepBudgetExhausted);
  EXPECT_FALSE(out.converged());
  EXPECT_EQ(out.history.size(), 1u);
}

TEST(ServoLoop, DeterministicCommands) {
  WorldConfig wc;
  wc.seed = 18;
  const ServoConfig sc = ServoFor(wc);
  const LandmarkField field = GenerateField(wc);
  SimServoWorld a(wc, field, {0.25, -0.3, 8 * kDeg}, {}, 19);
  SimServoWorld b(wc, field, {0.25, -0.3, 8 * kDeg}, {}, 19);
  const ServoOutcome oa = ServoLoop(a, sc, 20);
  const ServoOutcome ob = ServoLoop(b, sc, 20);
  ASSERT_EQ(oa.history.size(), ob.history.size());
  for (size_t i = 0; i < oa.history.size(); ++i) {
    EXPECT_EQ(oa.history[i].command.v_x, ob.history[i].command.v_x);
    EXPECT_EQ(oa.history[i].command.v_y, ob.history[i].command.v_y);
    EXPECT_EQ(oa.history[i].command.v_yaw, ob.history[i].command.v_yaw);
  }
}

// Always returns the same three matches: too few for a pose.
class StarvedWorld : public ServoWorld {
 public:
  const CameraIntrinsics& intrinsics() const override { return k_; }
  CorrespondenceSet Acquire() override {
    ++acquired;
    return {{{1, 2}, {0, 0, 1}}, {{3, 4}, {0.1, 0, 1}}, {{5, 6}, {0, 0.1, 1}}};
  }
  void Command(const VelocityCommand& v, double) override {
    EXPECT_EQ(v.v_x, 0.0);
    EXPECT_EQ(v.v_yaw, 0.0);
  }
  int acquired = 0;

 private:
  CameraIntrinsics k_{300, 300, 320, 240};
};

TEST(ServoLoop, MatcherFailureAfterConsecutiveMisses) {
  StarvedWorld world;
  ServoConfig sc;
  sc.matcher_failure_limit = 4;
  const ServoOutcome out = ServoLoop(world, sc, 0);
  EXPECT_EQ(out.status, ServoStatus::kMatcherFailure);
  EXPECT_EQ(world.acquired, 4);
  EXPECT_EQ(out.history.back().active_axis, "none");
  EXPECT_FALSE(out.final_ground_truth.has_value());
}

TEST(ServoConfig, Validation) {
  ServoConfig sc;
  sc.eps_x = 0.0;
  EXPECT_THROW(sc.Validate(), ConfigError);
  sc = {};
  sc.dt = -1.0;
  EXPECT_THROW(sc.Validate(), ConfigError);
  sc = {};
  sc.gains_yaw.kd = -0.1;
  EXPECT_THROW(sc.Validate(), ConfigError);
  EXPECT_NO_THROW(ServoConfig{}.Validate());
}

TEST(WriteServoCsv, HeaderAndRow) {
  ServoRecord r;
  r.cycle = 3;
  r.n_matches = 40;
  r.n_inliers = 36;
  r.reproj_error_px = 0.5;
  r.error = {0.25, -0.125, 0.0};
  r.active_axis = "x";
  r.command = {0.2, 0.0, 0.0};
  r.ground_truth = GroundTruthError{0.25, 0.0};
  std::ostringstream out;
  WriteServoCsv({r}, out);
  EXPECT_EQ(out.str(),
            "cycle,n_matches,n_inliers,reproj_error_px,e_x,e_y,e_yaw,active_axis,v_x,v_y,v_yaw,"
            "gt_dist_error_m,gt_ori_error_rad\n"
            "3,40,36,0.5,0.25,-0.125,0,x,0.2,0,0,0.25,0\n");
}

}  // namespace
}  // namespace h2r
