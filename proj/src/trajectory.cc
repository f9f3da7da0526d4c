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

#include "h2r/trajectory.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

constexpr std::string_view kMagic = "#h2r-trajectory";
constexpr std::string_view kVersion = "v1";
constexpr std::string_view kLayout =
    "frame,dt,objects[id+pose7],left_hand[kp18+wrist7],right_hand[kp18+wrist7],"
    "left_guidance[6],right_guidance[6]";
constexpr int kHandFields = kKeypointsPerHand * 3 + 7;

bool AllFinite(const Vec3& v) { return v.allFinite(); }

bool HandFinite(const HandState& h) {
  for (int i = 0; i < kKeypointsPerHand; ++i) {
    if (!AllFinite(h.keypoints.at(i))) return false;
  }
  return AllFinite(h.wrist.position);
}

bool ActionFinite(const ArmAction& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

std::set<std::string> IdSet(const TrajectoryFrame& frame) {
  std::set<std::string> ids;
  for (const auto& o : frame.objects) ids.insert(o.id);
  return ids;
}

class FieldCursor {
 public:
  FieldCursor(const std::vector<std::string_view>& fields, int line_no)
      : fields_(fields), line_no_(line_no) {}

  double Real() { return ParseDouble(Next(), Context()); }
  std::string_view Token() { return Next(); }
  Vec3 Vector() {
    const double x = Real();
    const double y = Real();
    const double z = Real();
    return {x, y, z};
  }
  Pose ReadPose() {
    std::array<double, 7> v{};
    for (double& x : v) x = Real();
    try {
      return PoseFromArray(v);
    } catch (const ValidationError& e) {
      throw ParseError(fmt::format("line {}: {}", line_no_, e.what()));
    }
  }

 private:
  std::string_view Next() { return fields_.at(index_++); }
  std::string Context() const { return fmt::format("line {} field {}", line_no_, index_); }

  const std::vector<std::string_view>& fields_;
  int line_no_;
  size_t index_ = 0;
};

HandState ReadHand(FieldCursor& cursor) {
  HandState hand;
  for (int i = 0; i < kKeypointsPerHand; ++i) hand.keypoints.at(i) = cursor.Vector();
  hand.wrist = cursor.ReadPose();
  return hand;
}

void WriteValue(std::ostream& out, double v) { out << ',' << FormatDouble(v); }

void WriteHand(std::ostream& out, const HandState& hand) {
  for (int i = 0; i < kKeypointsPerHand; ++i) {
    const Vec3& p = hand.keypoints.at(i);
    for (int c = 0; c < 3; ++c) WriteValue(out, p[c]);
  }
  for (double v : PoseToArray(hand.wrist)) WriteValue(out, v);
}

HandState TransformHand(const RigidTransform& t, const HandState& hand) {
  HandState out;
  for (int i = 0; i < kKeypointsPerHand; ++i) out.keypoints.at(i) = t.Apply(hand.keypoints.at(i));
  out.wrist = ApplyTransform(t, hand.wrist);
  return out;
}

ArmAction RotateGuidance(const UnitQuaternion& r, const ArmAction& a) {
  const Vec3 moved = r.Rotate(Vec3(a[0], a[1], a[2]));
  return {moved.x(), moved.y(), moved.z(), a[3], a[4], a[5]};
}

}  // namespace

const Pose* TrajectoryFrame::FindObject(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o.pose;
  }
  return nullptr;
}

Pose* TrajectoryFrame::FindObject(const std::string& id) {
  for (auto& o : objects) {
    if (o.id == id) return &o.pose;
  }
  return nullptr;
}

void ReferenceTrajectory::Validate() const {
  if (frames.empty()) throw ValidationError("trajectory has no frames");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError(fmt::format("trajectory dt must be positive, got {}", dt));
  }
  const std::set<std::string> reference_ids = IdSet(frames.front());
  for (size_t k = 0; k < frames.size(); ++k) {
    const TrajectoryFrame& f = frames[k];
    const std::set<std::string> ids = IdSet(f);
    if (ids.size() != f.objects.size()) {
      throw ValidationError(fmt::format("frame {}: duplicate object id", k));
    }
    if (ids != reference_ids) {
      throw ValidationError(
          fmt::format("frame {}: object id set differs from frame 0", k));
    }
    for (const auto& o : f.objects) {
      if (!AllFinite(o.pose.position)) {
        throw ValidationError(fmt::format("frame {}: object '{}' has a non-finite position", k, o.id));
      }
    }
    if (!HandFinite(f.left_hand) || !HandFinite(f.right_hand) ||
        !ActionFinite(f.left_guidance) || !ActionFinite(f.right_guidance)) {
      throw ValidationError(fmt::format("frame {}: non-finite hand or guidance value", k));
    }
  }
}

ReferenceTrajectory ReadTrajectory(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  ++line_no;
  std::istringstream header(line);
  std::string magic, version, objects_kv, layout_kv;
  header >> magic >> version >> objects_kv >> layout_kv;
  if (magic != kMagic) throw ParseError("line 1: not an h2r trajectory file");
  if (version != kVersion) {
    throw ParseError(fmt::format("line 1: unsupported version '{}'", version));
  }
  if (objects_kv.rfind("objects=", 0) != 0) throw ParseError("line 1: missing objects=");
  const long long n_objects = ParseInt(std::string_view(objects_kv).substr(8), "line 1 objects");
  if (n_objects < 0) throw ParseError("line 1: negative object count");
  if (layout_kv != fmt::format("layout={}", kLayout)) {
    throw ParseError("line 1: unexpected field layout");
  }
  const size_t expected_fields = 2 + static_cast<size_t>(n_objects) * 8 + 2 * kHandFields + 12;

  ReferenceTrajectory traj;
  bool have_dt = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(line);
    if (fields.size() != expected_fields) {
      throw ParseError(fmt::format("line {}: expected {} fields, got {}", line_no,
                                   expected_fields, fields.size()));
    }
    FieldCursor cursor(fields, line_no);
    const long long index = ParseInt(cursor.Token(), fmt::format("line {} frame index", line_no));
    if (index != static_cast<long long>(traj.frames.size())) {
      throw ValidationError(fmt::format("frame {}: out-of-order frame index {}",
                                        traj.frames.size(), index));
    }
    const double dt = cursor.Real();
    if (!have_dt) {
      traj.dt = dt;
      have_dt = true;
    } else if (dt != traj.dt) {
      throw ValidationError(fmt::format("frame {}: dt {} differs from {}", index, dt, traj.dt));
    }
    TrajectoryFrame frame;
    for (long long j = 0; j < n_objects; ++j) {
      ObjectPose o;
      o.id = std::string(cursor.Token());
      if (o.id.empty()) throw ParseError(fmt::format("line {}: empty object id", line_no));
      o.pose = cursor.ReadPose();
      frame.objects.push_back(std::move(o));
    }
    frame.left_hand = ReadHand(cursor);
    frame.right_hand = ReadHand(cursor);
    for (double& v : frame.left_guidance) v = cursor.Real();
    for (double& v : frame.right_guidance) v = cursor.Real();
    traj.frames.push_back(std::move(frame));
  }
  traj.Validate();
  return traj;
}

void WriteTrajectory(const ReferenceTrajectory& traj, std::ostream& out) {
  const size_t n_objects = traj.frames.empty() ? 0 : traj.frames.front().objects.size();
  out << kMagic << ' ' << kVersion << " objects=" << n_objects << " layout=" << kLayout << '\n';
  for (size_t k = 0; k < traj.frames.size(); ++k) {
    const TrajectoryFrame& f = traj.frames[k];
    out << k;
    WriteValue(out, traj.dt);
    for (const auto& o : f.objects) {
      out << ',' << o.id;
      for (double v : PoseToArray(o.pose)) WriteValue(out, v);
    }
    WriteHand(out, f.left_hand);
    WriteHand(out, f.right_hand);
    for (double v : f.left_guidance) WriteValue(out, v);
    for (double v : f.right_guidance) WriteValue(out, v);
    out << '\n';
  }
}

ReferenceTrajectory LoadTrajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open trajectory file '{}'", path.string()));
  return ReadTrajectory(in);
}

void SaveTrajectory(const ReferenceTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(fmt::format("cannot write '{}'", path.string()));
  WriteTrajectory(traj, out);
}

ReferenceTrajectory AugmentTrajectory(const ReferenceTrajectory& traj,
                                      const RigidTransform& t) {
  ReferenceTrajectory out;
  out.dt = traj.dt;
  out.frames.reserve(traj.frames.size());
  for (const TrajectoryFrame& f : traj.frames) {
    TrajectoryFrame g;
    for (const auto& o : f.objects) g.objects.push_back({o.id, ApplyTransform(t, o.pose)});
    g.left_hand = TransformHand(t, f.left_hand);
    g.right_hand = TransformHand(t, f.right_hand);
    g.left_guidance = RotateGuidance(t.rotation, f.left_guidance);
    g.right_guidance = RotateGuidance(t.rotation, f.right_guidance);
    out.frames.push_back(std::move(g));
  }
  return out;
}

RigidTransform SampleRandomTransform(const AugmentationRange& range, uint64_t seed) {
  for (int i = 0; i < 3; ++i) {
    if (range.translation_lower[i] > range.translation_upper[i]) {
      throw ValidationError(fmt::format("augmentation range axis {} has lower > upper", i));
    }
  }
  if (range.yaw_lower > range.yaw_upper) {
    throw ValidationError("augmentation yaw range has lower > upper");
  }
  std::mt19937_64 rng(seed);
  const auto draw = [&rng](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  RigidTransform t;
  for (int i = 0; i < 3; ++i) {
    t.translation[i] = draw(range.translation_lower[i], range.translation_upper[i]);
  }
  t.rotation = UnitQuaternion::FromYaw(draw(range.yaw_lower, range.yaw_upper));
  return t;
}

ReferenceTrajectory Downsample(const ReferenceTrajectory& traj, int stride) {
  if (stride < 1) throw InvalidStride(fmt::format("stride must be >= 1, got {}", stride));
  ReferenceTrajectory out;
  out.dt = traj.dt * stride;
  const size_t n = traj.frames.size();
  for (size_t k = 0; k < n; k += static_cast<size_t>(stride)) out.frames.push_back(traj.frames[k]);
  if (n > 0 && (n - 1) % static_cast<size_t>(stride) != 0) out.frames.push_back(traj.frames.back());
  return out;
}

ReferenceTrajectory CanonicalizeSymmetry(const ReferenceTrajectory& traj,
                                         const std::string& object_id,
                                         const std::vector<UnitQuaternion>& symmetry_group) {
  if (symmetry_group.empty()) throw EmptyGroup("symmetry group is empty");
  const bool has_identity = std::any_of(
      symmetry_group.begin(), symmetry_group.end(),
      [](const UnitQuaternion& s) { return QuatDistance(s, UnitQuaternion::Identity()) < 1e-9; });
  if (!has_identity) throw ValidationError("symmetry group must contain the identity");

  ReferenceTrajectory out = traj;
  const Pose* previous = nullptr;
  for (size_t k = 0; k < out.frames.size(); ++k) {
    Pose* pose = out.frames[k].FindObject(object_id);
    if (pose == nullptr) {
      throw ValidationError(fmt::format("frame {}: object '{}' not found", k, object_id));
    }
    if (previous != nullptr) {
      const UnitQuaternion raw = pose->orientation;
      UnitQuaternion best = raw;
      double best_distance = std::numeric_limits<double>::infinity();
      for (const UnitQuaternion& s : symmetry_group) {
        const UnitQuaternion candidate = raw * s;
        const double d = QuatDistance(candidate, previous->orientation);
        if (d < best_distance) {
          best_distance = d;
          best = candidate;
        }
      }
      pose->orientation = best;
    }
    previous = pose;
  }
  return out;
}

}  // namespace h2r
