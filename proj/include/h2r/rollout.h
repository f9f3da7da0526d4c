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

#ifndef H2R_ROLLOUT_H_
#define H2R_ROLLOUT_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "h2r/rewards.h"
#include "h2r/trajectory.h"

namespace h2r {

/// One logged policy step: object poses, hand keypoints, contact flags
/// (12 hand parts x objects) and hand joint power terms.
struct RolloutStep {
  std::vector<ObjectPose> objects;
  HandKeypoints left;
  HandKeypoints right;
  ContactSet contacts;
  JointState joints;
};

struct Rollout {
  int num_joints = 0;
  std::vector<RolloutStep> steps;
};

// Header: "#h2r-rollout v1 objects=N joints=M layout=..." then one step per
// line: step, N x (id, pose7), left kp18, right kp18, contacts 12*N (0/1,
// part-major), joint force M, joint velocity M.
Rollout ReadRollout(std::istream& in);
void WriteRollout(const Rollout& rollout, std::ostream& out);
Rollout LoadRollout(const std::filesystem::path& path);

struct RewardEvalConfig {
  RewardConfig reward;
  std::string target_object;  // empty: first object of the trajectory
  double termination_threshold = 0.3;  // m
};

struct RewardRow {
  int step = 0;
  double r_chain = 0.0;
  double r_obj = 0.0;
  double r_penalty = 0.0;
  double total = 0.0;
  int n_contact = 0;
  bool terminated = false;
};

/// Scores each rollout step against the same-index reference frame. The
/// episode ends at the first early-termination step (that row is included).
std::vector<RewardRow> EvaluateRollout(const ReferenceTrajectory& reference,
                                       const Rollout& rollout, const RewardEvalConfig& cfg);

void WriteRewardCsv(const std::vector<RewardRow>& rows, std::ostream& out);

}  // namespace h2r

#endif  // H2R_ROLLOUT_H_
