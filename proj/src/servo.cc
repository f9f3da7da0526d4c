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

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/random.h"
#include "h2r/text_io.h"

namespace h2r {

void PidGains::Validate() const {
  if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0)) throw ConfigError("PID gains must be >= 0");
  if (!(integral_clamp > 0.0 && output_clamp > 0.0)) {
    throw ConfigError("PID clamps must be > 0");
  }
}

void ServoConfig::Validate() const {
  if (!(eps_x > 0.0 && eps_y > 0.0 && eps_yaw > 0.0)) {
    throw ConfigError("servo thresholds must be > 0");
  }
  if (!(dt > 0.0)) throw ConfigError("servo dt must be > 0");
  if (max_steps < 1) throw ConfigError("servo max_steps must be >= 1");
  if (matcher_failure_limit < 1) throw ConfigError("matcher_failure_limit must be >= 1");
  if (pnp.ransac_iterations < 1) throw ConfigError("ransac_iterations must be >= 1");
  if (!(pnp.inlier_threshold_px > 0.0)) throw ConfigError("inlier threshold must be > 0");
  if (pnp.refine_max_iterations < 0) throw ConfigError("refine_max_iterations must be >= 0");
  if (!(pnp.refine_tolerance > 0.0)) throw ConfigError("refine tolerance must be > 0");
  if (!(pnp.ransac_confidence > 0.0 && pnp.ransac_confidence < 1.0)) {
    throw ConfigError("ransac_confidence must be in (0, 1)");
  }
  gains_x.Validate();
  gains_y.Validate();
  gains_yaw.Validate();
}

std::string_view AxisName(Axis axis) {
  switch (axis) {
    case Axis::kX: return "x";
    case Axis::kY: return "y";
    case Axis::kYaw: return "yaw";
    case Axis::kDone: return "done";
  }
  return "?";
}

std::string_view StatusName(ServoStatus status) {
  switch (status) {
    case ServoStatus::kConverged: return "converged";
    case ServoStatus::kStepBudgetExhausted: return "step_budget_exhausted";
    case ServoStatus::kMatcherFailure: return "matcher_failure";
  }
  return "?";
}

double PidStep(PidState& state, double error, double dt, const PidGains& gains) {
  if (!(dt > 0.0)) throw ValidationError("PID dt must be > 0");
  const double previous = state.primed ? state.previous_error : error;
  state.integral += 0.5 * (previous + error) * dt;
  state.integral = std::clamp(state.integral, -gains.integral_clamp, gains.integral_clamp);
  const double derivative = state.primed ? (error - state.previous_error) / dt : 0.0;
  state.previous_error = error;
  state.primed = true;
  const double v = gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
  return std::clamp(v, -gains.output_clamp, gains.output_clamp);
}

Axis SequentialAxis(const PoseError& err, const ServoConfig& cfg) {
  if (std::abs(err.e_x) > cfg.eps_x) return Axis::kX;
  if (std::abs(err.e_y) > cfg.eps_y) return Axis::kY;
  if (std::abs(err.e_yaw) > cfg.eps_yaw) return Axis::kYaw;
  return Axis::kDone;
}

bool WithinThresholds(const PoseError& err, const ServoConfig& cfg) {
  return SequentialAxis(err, cfg) == Axis::kDone;
}

PoseError ExtractPoseErrors(const RigidTransform& relative, const RigidTransform& extrinsic) {
  const RigidTransform goal_in_base =
      Compose(extrinsic, Compose(relative.Inverse(), extrinsic.Inverse()));
  return {goal_in_base.translation.x(), goal_in_base.translation.y(),
          YawOf(goal_in_base.rotation)};
}

ServoOutcome ServoLoop(ServoWorld& world, const ServoConfig& cfg, uint64_t seed) {
  cfg.Validate();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  ServoOutcome outcome;
  PidState pid_x, pid_y, pid_yaw;
  Axis active = Axis::kDone;
  int consecutive_failures = 0;

  for (int cycle = 0; cycle < cfg.max_steps; ++cycle) {
    ServoRecord rec;
    rec.cycle = cycle;
    rec.ground_truth = world.GroundTruth();
    const CorrespondenceSet corrs = world.Acquire();
    rec.n_matches = static_cast<int>(corrs.size());
    outcome.steps = cycle + 1;

    std::optional<PnPEstimate> est;
    try {
      est = SolvePnPRansac(corrs, world.intrinsics(), cfg.pnp, DeriveSeed(seed, cycle));
    } catch (const TooFewCorrespondences&) {
    } catch (const DegenerateGeometry&) {
    } catch (const SingularNormalEquations&) {
    } catch (const PointBehindCamera&) {
    }
    if (!est) {
      // Hold still and try again next cycle.
      rec.reproj_error_px = kNaN;
      rec.error = {kNaN, kNaN, kNaN};
      rec.active_axis = "none";
      world.Command({}, cfg.dt);
      outcome.history.push_back(rec);
      if (++consecutive_failures >= cfg.matcher_failure_limit) {
        outcome.status = ServoStatus::kMatcherFailure;
        outcome.final_ground_truth = world.GroundTruth();
        return outcome;
      }
      continue;
    }
    consecutive_failures = 0;
    rec.n_inliers = est->inlier_count();
    rec.reproj_error_px = est->mean_reprojection_error;
    rec.error = ExtractPoseErrors(est->transform(), cfg.extrinsic);

    if (WithinThresholds(rec.error, cfg)) {
      rec.active_axis = AxisName(Axis::kDone);
      outcome.history.push_back(rec);
      outcome.status = ServoStatus::kConverged;
      outcome.final_ground_truth = world.GroundTruth();
      return outcome;
    }

    VelocityCommand v;
    if (cfg.simultaneous) {
      rec.active_axis = "all";
      v.v_x = PidStep(pid_x, rec.error.e_x, cfg.dt, cfg.gains_x);
      v.v_y = PidStep(pid_y, rec.error.e_y, cfg.dt, cfg.gains_y);
      v.v_yaw = PidStep(pid_yaw, rec.error.e_yaw, cfg.dt, cfg.gains_yaw);
    } else {
      const Axis axis = SequentialAxis(rec.error, cfg);
      if (axis != active) {
        pid_x = pid_y = pid_yaw = PidState{};
        active = axis;
      }
      rec.active_axis = AxisName(axis);
      switch (axis) {
        case Axis::kX: v.v_x = PidStep(pid_x, rec.error.e_x, cfg.dt, cfg.gains_x); break;
        case Axis::kY: v.v_y = PidStep(pid_y, rec.error.e_y, cfg.dt, cfg.gains_y); break;
        case Axis::kYaw: v.v_yaw = PidStep(pid_yaw, rec.error.e_yaw, cfg.dt, cfg.gains_yaw); break;
        case Axis::kDone: break;
      }
    }
    rec.command = v;
    world.Command(v, cfg.dt);
    outcome.history.push_back(rec);
  }
  outcome.status = ServoStatus::kStepBudgetExhausted;
  outcome.final_ground_truth = world.GroundTruth();
  return outcome;
}

void WriteServoCsv(const std::vector<ServoRecord>& history, std::ostream& out) {
  out << "cycle,n_matches,n_inliers,reproj_error_px,e_x,e_y,e_yaw,active_axis,v_x,v_y,v_yaw,"
         "gt_dist_error_m,gt_ori_error_rad\n";
  for (const ServoRecord& r : history) {
    const std::string gt_dist = r.ground_truth ? FormatDouble(r.ground_truth->dist) : "";
    const std::string gt_ori = r.ground_truth ? FormatDouble(r.ground_truth->ori) : "";
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.cycle, r.n_matches,
                       r.n_inliers, FormatDouble(r.reproj_error_px), FormatDouble(r.error.e_x),
                       FormatDouble(r.error.e_y), FormatDouble(r.error.e_yaw), r.active_axis,
                       FormatDouble(r.command.v_x), FormatDouble(r.command.v_y),
                       FormatDouble(r.command.v_yaw), gt_dist, gt_ori);
  }
}

}  // namespace h2r
