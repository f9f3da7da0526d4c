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

#ifndef H2R_TESTS_FIXTURES_H_
#define H2R_TESTS_FIXTURES_H_

#include <random>
#include <string>

#include "h2r/rollout.h"
#include "h2r/trajectory.h"

namespace h2r::testing {

inline UnitQuaternion RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return UnitQuaternion(n(rng), n(rng), n(rng), n(rng));
}

inline Vec3 RandomVec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline HandState RandomHand(std::mt19937_64& rng) {
  HandState h;
  for (int i = 0; i < kKeypointsPerHand; ++i) h.keypoints.at(i) = RandomVec(rng, 0.5);
  h.wrist = {RandomVec(rng, 0.5), RandomRotation(rng)};
  return h;
}

inline ReferenceTrajectory RandomTrajectory(std::mt19937_64& rng, int frames, int objects = 2) {
  ReferenceTrajectory t;
  t.dt = 1.0 / 75.0;
  for (int k = 0; k < frames; ++k) {
    TrajectoryFrame f;
    for (int o = 0; o < objects; ++o) {
      f.objects.push_back({"obj" + std::to_string(o), {RandomVec(rng), RandomRotation(rng)}});
    }
    f.left_hand = RandomHand(rng);
    f.right_hand = RandomHand(rng);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (double& v : f.left_guidance) v = u(rng);
    for (double& v : f.right_guidance) v = u(rng);
    t.frames.push_back(std::move(f));
  }
  return t;
}

// A rollout that replays the reference exactly with `contacts` fingertips on
// the first object and no joint motion.
inline Rollout Replay(const ReferenceTrajectory& ref, int contacts) {
  Rollout r;
  r.num_joints = 2;
  for (const TrajectoryFrame& f : ref.frames) {
    RolloutStep s;
    s.objects = f.objects;
    s.left = f.left_hand.keypoints;
    s.right = f.right_hand.keypoints;
    s.contacts = ContactSet(kHandParts, static_cast<int>(f.objects.size()));
    for (int i = 0; i < contacts; ++i) s.contacts.set(i, 0, true);
    s.joints = {{1.0, -2.0}, {0.0, 0.0}};
    r.steps.push_back(std::move(s));
  }
  return r;
}

}  // namespace h2r::testing

#endif  // H2R_TESTS_FIXTURES_H_
