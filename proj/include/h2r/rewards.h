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

#ifndef H2R_REWARDS_H_
#define H2R_REWARDS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "h2r/geometry.h"
#include "h2r/trajectory.h"

namespace h2r {

inline constexpr int kHandParts = 2 * kKeypointsPerHand;  // fingertips + palm, both hands

/// Vectors from the object center to each keypoint: left hand 0..5, right
/// hand 6..11, fingertips before palm.
struct DistanceChain {
  std::vector<Vec3> vectors;

  static DistanceChain FromKeypoints(const Vec3& object_center, const HandKeypoints& left,
                                     const HandKeypoints& right);
};

/// Boolean contact flag for every (hand part, object) pair.
class ContactSet {
 public:
  ContactSet() = default;
  ContactSet(int num_parts, int num_objects);

  int num_parts() const { return num_parts_; }
  int num_objects() const { return num_objects_; }
  bool at(int part, int object) const;
  void set(int part, int object, bool in_contact);

 private:
  int num_parts_ = 0;
  int num_objects_ = 0;
  std::vector<unsigned char> flags_;
};

struct RewardConfig {
  double k1 = 1.0;       // object position coefficient
  double k2 = 1.0;       // object orientation coefficient
  double lambda = 1e-3;  // power penalty coefficient
  int n_num = 2;         // contacts needed to activate the distance chain
  double w_chain = 1.0;
  double w_obj = 1.0;

  void Validate() const;
};

/// Per hand joint actuation force (N m) and velocity (rad/s).
struct JointState {
  std::vector<double> force;
  std::vector<double> velocity;
};

struct ResidualBounds {
  double translation = 0.01;  // m
  double orientation = 0.04;  // rad
};

/// Number of distinct contacting (part, object) pairs. The indicator is summed
/// over both orders of the pair and halved.
int ContactCount(const ContactSet& contacts);

/// exp(-mean_i |ref_i - cur_i|) when n_contact >= cfg.n_num, else 0.
/// Throws ChainLengthMismatch.
double ChainReward(const DistanceChain& current, const DistanceChain& reference,
                   int n_contact, const RewardConfig& cfg);

/// exp(-k1 |p - p_ref|^2 - k2 d_quat(q, q_ref)^2).
double ObjectTrackingReward(const Vec3& p, const UnitQuaternion& q, const Vec3& p_ref,
                            const UnitQuaternion& q_ref, const RewardConfig& cfg);

/// -lambda * sum_j |f_j qdot_j|. Throws DimensionMismatch.
double PowerPenalty(const JointState& js, const RewardConfig& cfg);

double TotalReward(double chain, double obj, double penalty, const RewardConfig& cfg);

/// a_g + delta scaled to the residual bounds; delta is clamped to [-1, 1].
ArmAction ComposeResidualAction(const ArmAction& a_g, const ArmAction& delta,
                                const ResidualBounds& bounds);

/// True iff |p_obj - p_ref| > threshold (strict).
bool ShouldTerminateEarly(const Vec3& p_obj, const Vec3& p_ref, double threshold);

// Observation assembly for the state-based expert. Each field has a fixed
// width; the full vector is their concatenation in declaration order.
struct ObservationInputs {
  std::vector<double> arm_qpos;             // 12
  std::vector<double> hand_qpos;            // 36
  std::vector<double> arm_qvel;             // 12
  std::vector<double> hand_qvel;            // 36
  std::vector<double> hand_position;        // 6
  std::vector<double> hand_quaternion;      // 8
  DistanceChain current_chain;              // 12 vectors
  DistanceChain reference_chain;            // 12 vectors
  std::vector<double> contact;              // 24
  std::vector<double> actuator;             // 24
  int step = 0;
  int horizon = 1;
  std::vector<double> ref_hand_position;    // 6
  std::vector<double> ref_hand_quaternion;  // 8
  std::vector<double> ref_object_position;  // 3
  std::vector<double> ref_object_quaternion;  // 4

  /// All fields sized correctly and filled with zeros.
  static ObservationInputs Zero();
};

struct ObservationField {
  std::string_view name;
  int offset;
  int size;
};

inline constexpr int kObservationSize = 252;

const std::vector<ObservationField>& ObservationLayout();

/// Throws DimensionMismatch naming the offending field.
Eigen::VectorXd BuildObservation(const ObservationInputs& in);

}  // namespace h2r

#endif  // H2R_REWARDS_H_
