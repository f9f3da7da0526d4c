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

#include "h2r/rollout.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

constexpr std::string_view kMagic = "#h2r-rollout";
constexpr std::string_view kLayout =
    "step,objects[id+pose7],left_kp18,right_kp18,contacts[12xN],joint_force[M],"
    "joint_velocity[M]";

long long HeaderValue(const std::string& kv, std::string_view key) {
  const std::string prefix = std::string(key) + "=";
  if (kv.rfind(prefix, 0) != 0) throw ParseError(fmt::format("line 1: missing {}", prefix));
  const long long v = ParseInt(std::string_view(kv).substr(prefix.size()), "line 1");
  if (v < 0) throw ParseError(fmt::format("line 1: negative {}", key));
  return v;
}

}  // namespace

Rollout ReadRollout(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  std::istringstream header(line);
  std::string magic, version, objects_kv, joints_kv, layout_kv;
  header >> magic >> version >> objects_kv >> joints_kv >> layout_kv;
  if (magic != kMagic) throw ParseError("line 1: not an h2r rollout file");
  if (version != "v1") throw ParseError(fmt::format("line 1: unsupported version '{}'", version));
  const int n_objects = static_cast<int>(HeaderValue(objects_kv, "objects"));
  const int n_joints = static_cast<int>(HeaderValue(joints_kv, "joints"));
  if (layout_kv != fmt::format("layout={}", kLayout)) throw ParseError("line 1: unexpected layout");

  const size_t expected = 1 + static_cast<size_t>(n_objects) * 8 + 36 +
                          static_cast<size_t>(kHandParts * n_objects) +
                          2 * static_cast<size_t>(n_joints);
  Rollout rollout;
  rollout.num_joints = n_joints;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitFields(line);
    if (f.size() != expected) {
      throw ParseError(
          fmt::format("line {}: expected {} fields, got {}", line_no, expected, f.size()));
    }
    size_t i = 0;
    const std::string ctx = fmt::format("line {}", line_no);
    const auto real = [&]() { return ParseDouble(f[i++], ctx); };
    const long long step = ParseInt(f[i++], ctx);
    if (step != static_cast<long long>(rollout.steps.size())) {
      throw ValidationError(fmt::format("line {}: out-of-order step {}", line_no, step));
    }
    RolloutStep s;
    for (int j = 0; j < n_objects; ++j) {
      ObjectPose o;
      o.id = std::string(f[i++]);
      std::array<double, 7> v{};
      for (double& x : v) x = real();
      try {
        o.pose = PoseFromArray(v);
      } catch (const ValidationError& e) {
        throw ParseError(fmt::format("line {}: {}", line_no, e.what()));
      }
      s.objects.push_back(std::move(o));
    }
    for (HandKeypoints* hand : {&s.left, &s.right}) {
      for (int k = 0; k < kKeypointsPerHand; ++k) {
        Vec3& p = hand->at(k);
        for (int c = 0; c < 3; ++c) p[c] = real();
      }
    }
    s.contacts = ContactSet(kHandParts, n_objects);
    for (int part = 0; part < kHandParts; ++part) {
      for (int j = 0; j < n_objects; ++j) {
        const long long flag = ParseInt(f[i++], ctx);
        if (flag != 0 && flag != 1) {
          throw ParseError(fmt::format("line {}: contact flag must be 0 or 1", line_no));
        }
        s.contacts.set(part, j, flag == 1);
      }
    }
    for (int j = 0; j < n_joints; ++j) s.joints.force.push_back(real());
    for (int j = 0; j < n_joints; ++j) s.joints.velocity.push_back(real());
    rollout.steps.push_back(std::move(s));
  }
  return rollout;
}

void WriteRollout(const Rollout& rollout, std::ostream& out) {
  const int n_objects =
      rollout.steps.empty() ? 0 : static_cast<int>(rollout.steps.front().objects.size());
  out << kMagic << " v1 objects=" << n_objects << " joints=" << rollout.num_joints
      << " layout=" << kLayout << '\n';
  for (size_t k = 0; k < rollout.steps.size(); ++k) {
    const RolloutStep& s = rollout.steps[k];
    out << k;
    for (const auto& o : s.objects) {
      out << ',' << o.id;
      for (double v : PoseToArray(o.pose)) out << ',' << FormatDouble(v);
    }
    for (const HandKeypoints* hand : {&s.left, &s.right}) {
      for (int i = 0; i < kKeypointsPerHand; ++i) {
        for (int c = 0; c < 3; ++c) out << ',' << FormatDouble(hand->at(i)[c]);
      }
    }
    for (int part = 0; part < s.contacts.num_parts(); ++part) {
      for (int j = 0; j < s.contacts.num_objects(); ++j) out << ',' << (s.contacts.at(part, j) ? 1 : 0);
    }
    for (double v : s.joints.force) out << ',' << FormatDouble(v);
    for (double v : s.joints.velocity) out << ',' << FormatDouble(v);
    out << '\n';
  }
}

Rollout LoadRollout(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open rollout file '{}'", path.string()));
  return ReadRollout(in);
}

std::vector<RewardRow> EvaluateRollout(const ReferenceTrajectory& reference,
                                       const Rollout& rollout, const RewardEvalConfig& cfg) {
  reference.Validate();
  cfg.reward.Validate();
  if (rollout.steps.size() > reference.frames.size()) {
    throw ValidationError(fmt::format("rollout has {} steps but the reference only {} frames",
                                      rollout.steps.size(), reference.frames.size()));
  }
  const std::string target =
      cfg.target_object.empty() ? reference.frames.front().objects.front().id : cfg.target_object;

  std::vector<RewardRow> rows;
  for (size_t t = 0; t < rollout.steps.size(); ++t) {
    const RolloutStep& s = rollout.steps[t];
    const TrajectoryFrame& ref = reference.frames[t];
    const Pose* ref_pose = ref.FindObject(target);
    const Pose* cur_pose = nullptr;
    for (const auto& o : s.objects) {
      if (o.id == target) cur_pose = &o.pose;
    }
    if (ref_pose == nullptr || cur_pose == nullptr) {
      throw ValidationError(fmt::format("step {}: target object '{}' missing", t, target));
    }
    RewardRow row;
    row.step = static_cast<int>(t);
    row.n_contact = ContactCount(s.contacts);
    const DistanceChain current = DistanceChain::FromKeypoints(cur_pose->position, s.left, s.right);
    const DistanceChain wanted = DistanceChain::FromKeypoints(
        ref_pose->position, ref.left_hand.keypoints, ref.right_hand.keypoints);
    row.r_chain = ChainReward(current, wanted, row.n_contact, cfg.reward);
    row.r_obj = ObjectTrackingReward(cur_pose->position, cur_pose->orientation,
                                     ref_pose->position, ref_pose->orientation, cfg.reward);
    row.r_penalty = PowerPenalty(s.joints, cfg.reward);
    row.total = TotalReward(row.r_chain, row.r_obj, row.r_penalty, cfg.reward);
    row.terminated =
        ShouldTerminateEarly(cur_pose->position, ref_pose->position, cfg.termination_threshold);
    rows.push_back(row);
    if (row.terminated) break;
  }
  return rows;
}

void WriteRewardCsv(const std::vector<RewardRow>& rows, std::ostream& out) {
  out << "step,r_chain,r_obj,r_penalty,total,n_contact,terminated\n";
  for (const RewardRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.step, FormatDouble(r.r_chain),
                       FormatDouble(r.r_obj), FormatDouble(r.r_penalty), FormatDouble(r.total),
                       r.n_contact, r.terminated ? 1 : 0);
  }
}

}  // namespace h2r
