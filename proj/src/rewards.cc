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

#include "h2r/rewards.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "h2r/errors.h"

namespace h2r {

DistanceChain DistanceChain::FromKeypoints(const Vec3& object_center, const HandKeypoints& left,
                                           const HandKeypoints& right) {
  DistanceChain chain;
  chain.vectors.reserve(kHandParts);
  for (int i = 0; i < kKeypointsPerHand; ++i) chain.vectors.push_back(left.at(i) - object_center);
  for (int i = 0; i < kKeypointsPerHand; ++i) chain.vectors.push_back(right.at(i) - object_center);
  return chain;
}

ContactSet::ContactSet(int num_parts, int num_objects)
    : num_parts_(num_parts),
      num_objects_(num_objects),
      flags_(static_cast<size_t>(std::max(0, num_parts) * std::max(0, num_objects)), 0) {
  if (num_parts < 0 || num_objects < 0) throw ValidationError("contact set sizes must be >= 0");
}

bool ContactSet::at(int part, int object) const {
  if (part < 0 || part >= num_parts_ || object < 0 || object >= num_objects_) {
    throw ValidationError(fmt::format("contact pair ({}, {}) out of range", part, object));
  }
  return flags_[static_cast<size_t>(part * num_objects_ + object)] != 0;
}

void ContactSet::set(int part, int object, bool in_contact) {
  if (part < 0 || part >= num_parts_ || object < 0 || object >= num_objects_) {
    throw ValidationError(fmt::format("contact pair ({}, {}) out of range", part, object));
  }
  flags_[static_cast<size_t>(part * num_objects_ + object)] = in_contact ? 1 : 0;
}

void RewardConfig::Validate() const {
  if (k1 < 0 || k2 < 0 || lambda < 0) throw ValidationError("reward coefficients must be >= 0");
  if (n_num < 0) throw ValidationError("contact threshold must be >= 0");
}

int ContactCount(const ContactSet& contacts) {
  // Hand-major pass plus object-major pass: each contacting pair is seen twice.
  int doubled = 0;
  for (int j = 0; j < contacts.num_objects(); ++j) {
    for (int i = 0; i < contacts.num_parts(); ++i) doubled += contacts.at(i, j) ? 1 : 0;
  }
  for (int i = 0; i < contacts.num_parts(); ++i) {
    for (int j = 0; j < contacts.num_objects(); ++j) doubled += contacts.at(i, j) ? 1 : 0;
  }
  return doubled / 2;
}

double ChainReward(const DistanceChain& current, const DistanceChain& reference,
                   int n_contact, const RewardConfig& cfg) {
  const size_t n = current.vectors.size();
  if (n != reference.vectors.size() || n == 0) {
    throw ChainLengthMismatch(fmt::format("distance chains have lengths {} and {}", n,
                                          reference.vectors.size()));
  }
  if (n_contact < cfg.n_num) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += (reference.vectors[i] - current.vectors[i]).norm();
  return std::exp(-sum / static_cast<double>(n));
}

double ObjectTrackingReward(const Vec3& p, const UnitQuaternion& q, const Vec3& p_ref,
                            const UnitQuaternion& q_ref, const RewardConfig& cfg) {
  const double d = QuatDistance(q, q_ref);
  return std::exp(-cfg.k1 * (p - p_ref).squaredNorm() - cfg.k2 * d * d);
}

double PowerPenalty(const JointState& js, const RewardConfig& cfg) {
  if (js.force.size() != js.velocity.size()) {
    throw DimensionMismatch(fmt::format("joint force has {} entries but velocity has {}",
                                        js.force.size(), js.velocity.size()));
  }
  double power = 0.0;
  for (size_t j = 0; j < js.force.size(); ++j) power += std::abs(js.force[j] * js.velocity[j]);
  return -cfg.lambda * power;
}

double TotalReward(double chain, double obj, double penalty, const RewardConfig& cfg) {
  return cfg.w_chain * chain + cfg.w_obj * obj + penalty;
}

ArmAction ComposeResidualAction(const ArmAction& a_g, const ArmAction& delta,
                                const ResidualBounds& bounds) {
  ArmAction out;
  for (int i = 0; i < 6; ++i) {
    const double scale = i < 3 ? bounds.translation : bounds.orientation;
    out[i] = a_g[i] + scale * std::clamp(delta[i], -1.0, 1.0);
  }
  return out;
}

bool ShouldTerminateEarly(const Vec3& p_obj, const Vec3& p_ref, double threshold) {
  if (!(threshold > 0.0)) throw ValidationError("termination threshold must be > 0");
  return (p_obj - p_ref).norm() > threshold;
}

ObservationInputs ObservationInputs::Zero() {
  ObservationInputs in;
  in.arm_qpos.assign(12, 0.0);
  in.hand_qpos.assign(36, 0.0);
  in.arm_qvel.assign(12, 0.0);
  in.hand_qvel.assign(36, 0.0);
  in.hand_position.assign(6, 0.0);
  in.hand_quaternion.assign(8, 0.0);
  in.current_chain.vectors.assign(kHandParts, Vec3::Zero());
  in.reference_chain.vectors.assign(kHandParts, Vec3::Zero());
  in.contact.assign(24, 0.0);
  in.actuator.assign(24, 0.0);
  in.ref_hand_position.assign(6, 0.0);
  in.ref_hand_quaternion.assign(8, 0.0);
  in.ref_object_position.assign(3, 0.0);
  in.ref_object_quaternion.assign(4, 0.0);
  return in;
}

const std::vector<ObservationField>& ObservationLayout() {
  static const std::vector<ObservationField> layout = [] {
    const std::vector<std::pair<std::string_view, int>> sizes = {
        {"arm_qpos", 12},          {"hand_qpos", 36},
        {"arm_qvel", 12},          {"hand_qvel", 36},
        {"hand_position", 6},      {"hand_quaternion", 8},
        {"distance_chain", 72},    {"contact", 24},
        {"actuator", 24},          {"time", 1},
        {"ref_hand_position", 6},  {"ref_hand_quaternion", 8},
        {"ref_object_position", 3}, {"ref_object_quaternion", 4},
    };
    std::vector<ObservationField> fields;
    int offset = 0;
    for (const auto& [name, size] : sizes) {
      fields.push_back({name, offset, size});
      offset += size;
    }
    return fields;
  }();
  return layout;
}

Eigen::VectorXd BuildObservation(const ObservationInputs& in) {
  Eigen::VectorXd obs(kObservationSize);
  int offset = 0;
  const auto put = [&](std::string_view name, const std::vector<double>& values, size_t size) {
    if (values.size() != size) {
      throw DimensionMismatch(
          fmt::format("observation field '{}' needs {} values, got {}", name, size, values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw ValidationError(fmt::format("observation field '{}' is not finite", name));
      }
      obs[offset++] = v;
    }
  };
  const auto flatten = [](const DistanceChain& chain) {
    std::vector<double> flat;
    for (const Vec3& v : chain.vectors) flat.insert(flat.end(), {v.x(), v.y(), v.z()});
    return flat;
  };

  put("arm_qpos", in.arm_qpos, 12);
  put("hand_qpos", in.hand_qpos, 36);
  put("arm_qvel", in.arm_qvel, 12);
  put("hand_qvel", in.hand_qvel, 36);
  put("hand_position", in.hand_position, 6);
  put("hand_quaternion", in.hand_quaternion, 8);
  put("distance_chain.current", flatten(in.current_chain), 36);
  put("distance_chain.reference", flatten(in.reference_chain), 36);
  put("contact", in.contact, 24);
  put("actuator", in.actuator, 24);
  if (in.horizon <= 0) throw DimensionMismatch("observation field 'time' needs horizon > 0");
  put("time", {static_cast<double>(in.step) / static_cast<double>(in.horizon)}, 1);
  put("ref_hand_position", in.ref_hand_position, 6);
  put("ref_hand_quaternion", in.ref_hand_quaternion, 8);
  put("ref_object_position", in.ref_object_position, 3);
  put("ref_object_quaternion", in.ref_object_quaternion, 4);
  return obs;
}

}  // namespace h2r
