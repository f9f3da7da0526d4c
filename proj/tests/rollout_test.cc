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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "h2r/errors.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

using testing::Replay;

TEST(RolloutIoTest, RoundTrip) {
  std::mt19937_64 rng(1);
  Rollout r = Replay(testing::RandomTrajectory(rng, 5), 3);
  r.steps[2].joints = {{0.5, 1.5}, {-0.25, 2.0}};
  std::ostringstream out;
  WriteRollout(r, out);
  std::istringstream in(out.str());
  const Rollout back = ReadRollout(in);
  ASSERT_EQ(back.steps.size(), 5u);
  EXPECT_EQ(back.num_joints, 2);
  EXPECT_EQ(back.steps[2].joints.force, r.steps[2].joints.force);
  EXPECT_EQ(back.steps[2].joints.velocity, r.steps[2].joints.velocity);
  EXPECT_EQ(ContactCount(back.steps[4].contacts), 3);
  std::ostringstream again;
  WriteRollout(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(RolloutIoTest, ErrorsCarryLineNumbers) {
  std::mt19937_64 rng(2);
  std::ostringstream out;
  WriteRollout(Replay(testing::RandomTrajectory(rng, 3), 2), out);
  std::string text = out.str();
  const size_t third_line = text.find('\n', text.find('\n') + 1) + 1;
  text.insert(third_line, "1,broken\n");
  std::istringstream in(text);
  try {
    ReadRollout(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(EvaluateRolloutTest, ExactReplayScoresOne) {
  std::mt19937_64 rng(3);
  const ReferenceTrajectory ref = testing::RandomTrajectory(rng, 10);
  const auto rows = EvaluateRollout(ref, Replay(ref, 2), {});
  ASSERT_EQ(rows.size(), 10u);
  for (const RewardRow& row : rows) {
    EXPECT_EQ(row.r_chain, 1.0);
    EXPECT_EQ(row.r_obj, 1.0);
    EXPECT_EQ(row.r_penalty, 0.0);
    EXPECT_EQ(row.total, 2.0);
    EXPECT_EQ(row.n_contact, 2);
    EXPECT_FALSE(row.terminated);
  }
}

TEST(EvaluateRolloutTest, ContactGateZeroesChain) {
  std::mt19937_64 rng(4);
  const ReferenceTrajectory ref = testing::RandomTrajectory(rng, 4);
  Rollout r = Replay(ref, 2);
  r.steps[1].contacts = ContactSet(kHandParts, 2);
  r.steps[1].contacts.set(0, 1, true);
  const auto rows = EvaluateRollout(ref, r, {});
  EXPECT_EQ(rows[1].r_chain, 0.0);
  EXPECT_EQ(rows[1].n_contact, 1);
  EXPECT_EQ(rows[0].r_chain, 1.0);
}

TEST(EvaluateRolloutTest, TotalsRecombineComponents) {
  std::mt19937_64 rng(5);
  const ReferenceTrajectory ref = testing::RandomTrajectory(rng, 6);
  Rollout r = Replay(ref, 4);
  for (auto& s : r.steps) {
    s.objects[0].pose.position += testing::RandomVec(rng, 0.05);
    s.right.palm += testing::RandomVec(rng, 0.02);
    s.joints = {{0.5, -1.5}, {2.0, 0.3}};
  }
  RewardEvalConfig cfg;
  cfg.reward.w_chain = 0.7;
  cfg.reward.w_obj = 1.3;
  for (const RewardRow& row : EvaluateRollout(ref, r, cfg)) {
    EXPECT_DOUBLE_EQ(row.total, 0.7 * row.r_chain + 1.3 * row.r_obj + row.r_penalty);
    EXPECT_DOUBLE_EQ(row.r_penalty, -1e-3 * (1.0 + 0.45));
  }
}

TEST(EvaluateRolloutTest, StopsAfterEarlyTermination) {
  std::mt19937_64 rng(6);
  const ReferenceTrajectory ref = testing::RandomTrajectory(rng, 8);
  Rollout r = Replay(ref, 2);
  r.steps[3].objects[0].pose.position += Vec3(0.31, 0, 0);
  const auto rows = EvaluateRollout(ref, r, {});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows.back().terminated);
}

TEST(EvaluateRolloutTest, RolloutLongerThanReferenceRejected) {
  std::mt19937_64 rng(7);
  const ReferenceTrajectory ref = testing::RandomTrajectory(rng, 3);
  Rollout r = Replay(ref, 2);
  r.steps.push_back(r.steps.back());
  EXPECT_THROW(EvaluateRollout(ref, r, {}), ValidationError);
}

TEST(RewardCsvTest, HeaderAndRows) {
  std::ostringstream out;
  WriteRewardCsv({{0, 1.0, 0.5, -0.006, 1.494, 2, false}}, out);
  EXPECT_EQ(out.str(), "step,r_chain,r_obj,r_penalty,total,n_contact,terminated\n"
                       "0,1,0.5,-0.006,1.494,2,0\n");
}

}  // namespace
}  // namespace h2r
