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

#include "h2r/geometry.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "h2r/errors.h"

namespace h2r {
namespace {

constexpr double kDeg = M_PI / 180.0;

UnitQuaternion RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return UnitQuaternion(n(rng), n(rng), n(rng), n(rng));
}

RigidTransform RandomTransform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return {RandomRotation(rng), Vec3(u(rng), u(rng), u(rng))};
}

// Rotation about z written out as a matrix, independent of the quaternion code.
Mat3 YawMatrix(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

TEST(UnitQuaternionTest, NormalizesOnConstruction) {
  const UnitQuaternion q(2.0, 0.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(q.w(), 1.0);
  EXPECT_THROW(UnitQuaternion(0.0, 0.0, 0.0, 0.0), ValidationError);
  EXPECT_THROW(UnitQuaternion(NAN, 0.0, 0.0, 1.0), ValidationError);
}

TEST(UnitQuaternionTest, ProductStaysUnit) {
  std::mt19937_64 rng(1);
  UnitQuaternion q;
  for (int i = 0; i < 10000; ++i) q = q * RandomRotation(rng);
  EXPECT_NEAR(q.eigen().norm(), 1.0, 1e-9);
}

TEST(UnitQuaternionTest, ExpLogRoundTrip) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const UnitQuaternion q = RandomRotation(rng);
    EXPECT_LT(QuatDistance(UnitQuaternion::Exp(q.Log()), q), 1e-12);
  }
  EXPECT_LT(UnitQuaternion::Exp(Vec3(1e-12, 0, 0)).Log().norm(), 1e-11);
}

TEST(ComposeTest, IdentityAndInverse) {
  std::mt19937_64 rng(3);
  const RigidTransform t = RandomTransform(rng);
  const RigidTransform same = Compose(RigidTransform::Identity(), t);
  EXPECT_LT((same.translation - t.translation).norm(), 1e-15);
  EXPECT_LT(QuatDistance(same.rotation, t.rotation), 1e-12);
  const RigidTransform id = Compose(t, t.Inverse());
  EXPECT_LT(id.translation.norm(), 1e-12);
  EXPECT_LT(QuatDistance(id.rotation, UnitQuaternion::Identity()), 1e-12);
}

TEST(ComposeTest, MatchesPointwiseApplication) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform a = RandomTransform(rng);
    const RigidTransform b = RandomTransform(rng);
    const Vec3 p = RandomTransform(rng).translation;
    EXPECT_LT((Compose(a, b).Apply(p) - a.Apply(b.Apply(p))).norm(), 1e-12);
  }
}

TEST(ApplyTransformTest, HandCases) {
  const Pose origin;
  const Pose moved = ApplyTransform({UnitQuaternion::Identity(), Vec3(0.1, 0, 0)}, origin);
  EXPECT_EQ(moved.position, Vec3(0.1, 0, 0));

  Pose p;
  p.position = Vec3(1, 0, 0);
  const Pose turned = ApplyTransform({UnitQuaternion::FromYaw(90 * kDeg), Vec3::Zero()}, p);
  EXPECT_LT((turned.position - YawMatrix(90 * kDeg) * p.position).norm(), 1e-12);
  EXPECT_LT((turned.position - Vec3(0, 1, 0)).norm(), 1e-12);
}

TEST(ApplyTransformTest, GroupAction) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform t1 = RandomTransform(rng);
    const RigidTransform t2 = RandomTransform(rng);
    const Pose p{RandomTransform(rng).translation, RandomRotation(rng)};
    const Pose lhs = ApplyTransform(t2, ApplyTransform(t1, p));
    const Pose rhs = ApplyTransform(Compose(t2, t1), p);
    EXPECT_LT((lhs.position - rhs.position).norm(), 1e-10);
    EXPECT_LT(QuatDistance(lhs.orientation, rhs.orientation), 1e-10);
  }
}

TEST(QuatDistanceTest, HandCases) {
  std::mt19937_64 rng(6);
  const UnitQuaternion q = RandomRotation(rng);
  EXPECT_EQ(QuatDistance(q, q), 0.0);
  EXPECT_EQ(QuatDistance(q, -q), 0.0);
  EXPECT_NEAR(QuatDistance(UnitQuaternion::Identity(), UnitQuaternion::FromYaw(M_PI / 2)),
              M_PI / 2, 1e-12);
}

TEST(QuatDistanceTest, Pseudometric) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion a = RandomRotation(rng);
    const UnitQuaternion b = RandomRotation(rng);
    const UnitQuaternion c = RandomRotation(rng);
    const double ab = QuatDistance(a, b);
    EXPECT_EQ(ab, QuatDistance(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, M_PI);
    EXPECT_LE(ab, QuatDistance(a, c) + QuatDistance(c, b) + 1e-12);
  }
}

TEST(QuatDistanceTest, AccurateForTinyAngles) {
  const double angle = 1e-9;
  EXPECT_NEAR(QuatDistance(UnitQuaternion::Identity(), UnitQuaternion::FromYaw(angle)), angle,
              1e-18);
}

TEST(ProjectTest, HandCases) {
  const CameraIntrinsics k{300, 300, 160, 160};
  const PixelPoint c = Project(k, Vec3(0, 0, 1));
  EXPECT_EQ(c.u, 160);
  EXPECT_EQ(c.v, 160);
  EXPECT_DOUBLE_EQ(Project(k, Vec3(0.5, 0, 1)).u, 310);
  EXPECT_THROW(Project(k, Vec3(0, 0, 0)), NonPositiveDepth);
  EXPECT_THROW(Project(k, Vec3(0, 0, -1)), NonPositiveDepth);
}

TEST(LiftTest, HandCases) {
  const CameraIntrinsics k{300, 300, 160, 160};
  EXPECT_EQ(Lift(k, {160, 160}, 2.0), Vec3(0, 0, 2));
  EXPECT_LT((Lift(k, {310, 160}, 1.0) - Vec3(0.5, 0, 1)).norm(), 1e-15);
  EXPECT_THROW(Lift(k, {0, 0}, 0.0), NonPositiveDepth);
}

TEST(LiftTest, RoundTripOverDepthRange) {
  const CameraIntrinsics k{525, 520, 319.5, 239.5};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> px(0, 640);
  std::uniform_real_distribution<double> log_depth(std::log(1e-3), std::log(1e3));
  for (int i = 0; i < 1000; ++i) {
    const PixelPoint p{px(rng), px(rng)};
    const PixelPoint back = Project(k, Lift(k, p, std::exp(log_depth(rng))));
    EXPECT_NEAR(back.u, p.u, 1e-12 * 640);
    EXPECT_NEAR(back.v, p.v, 1e-12 * 640);
  }
}

TEST(YawOfTest, HandCases) {
  EXPECT_EQ(YawOf(UnitQuaternion::Identity()), 0.0);
  EXPECT_NEAR(YawOf(UnitQuaternion(Mat3(YawMatrix(30 * kDeg)))), M_PI / 6, 1e-12);
  EXPECT_NEAR(YawOf(UnitQuaternion::FromYaw(M_PI)), M_PI, 1e-12);
}

TEST(YawOfTest, AdditiveForPureYaws) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const double yaw = YawOf(UnitQuaternion::FromYaw(a) * UnitQuaternion::FromYaw(b));
    EXPECT_LT(std::abs(WrapAngle(yaw - WrapAngle(a + b))), 1e-12);
  }
}

TEST(WrapAngleTest, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(WrapAngle(M_PI), M_PI);
  EXPECT_DOUBLE_EQ(WrapAngle(-M_PI), M_PI);
  EXPECT_NEAR(WrapAngle(3 * M_PI / 2), -M_PI / 2, 1e-15);
  EXPECT_NEAR(WrapAngle(358 * kDeg), -2 * kDeg, 1e-12);
}

TEST(PoseArrayTest, RoundTrip) {
  const Pose p{Vec3(1, 2, 3), UnitQuaternion::FromYaw(0.3)};
  const auto values = PoseToArray(p);
  EXPECT_EQ(values[0], 1.0);
  EXPECT_EQ(values[3], p.orientation.w());
  const Pose back = PoseFromArray(values);
  EXPECT_EQ(back.position, p.position);
  EXPECT_LT(QuatDistance(back.orientation, p.orientation), 1e-15);
}

}  // namespace
}  // namespace h2r
