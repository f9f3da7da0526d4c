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

#ifndef H2R_SERVO_H_
#define H2R_SERVO_H_

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "h2r/geometry.h"
#include "h2r/pnp.h"

namespace h2r {

/// Goal pose expressed in the current base frame: planar offsets and yaw.
struct PoseError {
  double e_x = 0.0;
  double e_y = 0.0;
  double e_yaw = 0.0;
};

struct PidGains {
  double kp = 0.8;
  double ki = 0.0;
  double kd = 0.1;
  double integral_clamp = 1.0;
  double output_clamp = 0.3;

  void Validate() const;
};

struct PidState {
  double integral = 0.0;
  double previous_error = 0.0;
  bool primed = false;  // false until the first sample
};

enum class Axis { kX, kY, kYaw, kDone };
std::string_view AxisName(Axis axis);

struct VelocityCommand {
  double v_x = 0.0;    // m/s, base frame
  double v_y = 0.0;    // m/s, base frame
  double v_yaw = 0.0;  // rad/s
};

struct ServoConfig {
  double eps_x = 0.01;
  double eps_y = 0.01;
  double eps_yaw = std::numbers::pi / 180.0;
  PnPOptions pnp;
  double dt = 0.25;
  int max_steps = 200;
  /// Maps camera-frame points into the base frame.
  RigidTransform extrinsic;
  PidGains gains_x;
  PidGains gains_y;
  PidGains gains_yaw{0.8, 0.0, 0.1, 1.0, 0.5};
  bool simultaneous = false;
  int matcher_failure_limit = 5;

  void Validate() const;
};

/// Trapezoidal integral (clamped), backward-difference derivative on the
/// error (zero on the first sample), output clamped.
double PidStep(PidState& state, double error, double dt, const PidGains& gains);

/// First of x, y, yaw whose error magnitude exceeds its threshold.
Axis SequentialAxis(const PoseError& err, const ServoConfig& cfg);

/// True when every |e_j| <= eps_j.
bool WithinThresholds(const PoseError& err, const ServoConfig& cfg);

/// `relative` maps current-camera points into the goal camera. The goal base
/// pose in the current base frame is E * relative^-1 * E^-1.
PoseError ExtractPoseErrors(const RigidTransform& relative, const RigidTransform& extrinsic);

struct GroundTruthError {
  double dist = 0.0;  // m
  double ori = 0.0;   // rad
};

/// What the servo loop needs from a robot or simulator.
class ServoWorld {
 public:
  virtual ~ServoWorld() = default;
  virtual const CameraIntrinsics& intrinsics() const = 0;
  /// Matches between the goal image and the current view.
  virtual CorrespondenceSet Acquire() = 0;
  virtual void Command(const VelocityCommand& v, double dt) = 0;
  /// Only simulators can answer this.
  virtual std::optional<GroundTruthError> GroundTruth() const { return std::nullopt; }
};

struct ServoRecord {
  int cycle = 0;
  int n_matches = 0;
  int n_inliers = 0;
  double reproj_error_px = 0.0;
  PoseError error;
  std::string_view active_axis;
  VelocityCommand command;
  std::optional<GroundTruthError> ground_truth;
};

enum class ServoStatus { kConverged, kStepBudgetExhausted, kMatcherFailure };
std::string_view StatusName(ServoStatus status);

struct ServoOutcome {
  ServoStatus status = ServoStatus::kStepBudgetExhausted;
  int steps = 0;  // control cycles run
  std::vector<ServoRecord> history;
  std::optional<GroundTruthError> final_ground_truth;

  bool converged() const { return status == ServoStatus::kConverged; }
};

/// Acquire, estimate, extract errors, pick an axis, run its PID, command;
/// repeat until the thresholds hold or the budget runs out.
ServoOutcome ServoLoop(ServoWorld& world, const ServoConfig& cfg, uint64_t seed);

void WriteServoCsv(const std::vector<ServoRecord>& history, std::ostream& out);

}  // namespace h2r

#endif  // H2R_SERVO_H_
