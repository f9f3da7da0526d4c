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

#ifndef H2R_TRAJECTORY_H_
#define H2R_TRAJECTORY_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "h2r/geometry.h"

namespace h2r {

inline constexpr int kFingertipsPerHand = 5;
inline constexpr int kKeypointsPerHand = 6;

/// Fingertips ordered thumb, index, middle, ring, pinky; palm last.
struct HandKeypoints {
  std::array<Vec3, kFingertipsPerHand> fingertips{};
  Vec3 palm = Vec3::Zero();

  /// Keypoint i in [0, 6): fingertips first, then the palm.
  const Vec3& at(int i) const { return i < kFingertipsPerHand ? fingertips[i] : palm; }
  Vec3& at(int i) { return i < kFingertipsPerHand ? fingertips[i] : palm; }
};

struct HandState {
  HandKeypoints keypoints;
  Pose wrist;
};

/// Arm end-effector guidance: translation (m) then Euler angles (rad).
using ArmAction = std::array<double, 6>;

struct ObjectPose {
  std::string id;
  Pose pose;
};

struct TrajectoryFrame {
  std::vector<ObjectPose> objects;
  HandState left_hand;
  HandState right_hand;
  ArmAction left_guidance{};
  ArmAction right_guidance{};

  /// Returns nullptr when the id is absent.
  const Pose* FindObject(const std::string& id) const;
  Pose* FindObject(const std::string& id);
};

struct ReferenceTrajectory {
  std::vector<TrajectoryFrame> frames;
  double dt = 0.0;

  /// Enforces: non-empty, dt > 0, unique ids per frame, same id set in every
  /// frame, finite values. Throws ValidationError naming the frame index.
  void Validate() const;
};

struct AugmentationRange {
  Vec3 translation_lower = Vec3::Zero();
  Vec3 translation_upper = Vec3::Zero();
  double yaw_lower = 0.0;
  double yaw_upper = 0.0;
};

// Line-oriented text format. One header line, then one frame per line:
//   frame, dt, N x (id, px, py, pz, qw, qx, qy, qz),
//   left (18 keypoint coords, 7 wrist), right (18, 7),
//   left guidance (6), right guidance (6)
ReferenceTrajectory ReadTrajectory(std::istream& in);
void WriteTrajectory(const ReferenceTrajectory& traj, std::ostream& out);
ReferenceTrajectory LoadTrajectory(const std::filesystem::path& path);
void SaveTrajectory(const ReferenceTrajectory& traj, const std::filesystem::path& path);

/// Applies `t` to every object pose, wrist pose and keypoint of every frame.
/// Guidance translations are rotated; guidance Euler offsets are kept.
ReferenceTrajectory AugmentTrajectory(const ReferenceTrajectory& traj,
                                      const RigidTransform& t);

/// Uniform translation in the box and uniform pure yaw in the yaw range.
RigidTransform SampleRandomTransform(const AugmentationRange& range, uint64_t seed);

/// Keeps frames 0, s, 2s, ... plus the final frame; dt scales by s.
ReferenceTrajectory Downsample(const ReferenceTrajectory& traj, int stride);

/// Greedy removal of symmetry flips: each frame's orientation q becomes q * s
/// with s the group element closest to the previous canonical orientation.
ReferenceTrajectory CanonicalizeSymmetry(const ReferenceTrajectory& traj,
                                         const std::string& object_id,
                                         const std::vector<UnitQuaternion>& symmetry_group);

}  // namespace h2r

#endif  // H2R_TRAJECTORY_H_
