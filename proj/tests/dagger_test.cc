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

#include "h2r/dagger.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "h2r/errors.h"

namespace h2r {
namespace {

Vector V(std::initializer_list<double> xs) {
  Vector v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

TEST(RolloutScheduler, Decay) {
  RolloutScheduler constant(0.6, 1.0);
  for (int i = 0; i < 50; ++i) constant.Step();
  EXPECT_EQ(constant.p(), 0.6);

  RolloutScheduler s;
  for (int i = 0; i < 10; ++i) s.Step();
  EXPECT_NEAR(s.p(), std::pow(0.93, 10), 1e-12);
  EXPECT_NEAR(s.p(), 0.4840, 5e-5);

  double prev = s.p();
  for (int i = 0; i < 20000; ++i) {
    s.Step();
    EXPECT_GE(s.p(), 0.0);
    EXPECT_LE(s.p(), prev);
    prev = s.p();
  }
  EXPECT_THROW(RolloutScheduler(1.1, 0.9), ConfigError);
  EXPECT_THROW(RolloutScheduler(1.0, 0.0), ConfigError);
}

TEST(ChooseAction, Extremes) {
  std::mt19937_64 rng(1);
  const Vector s = V({1.0}), e = V({2.0});
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(ChooseAction(s, e, 1.0, rng).from_expert);
    const ChosenAction c = ChooseAction(s, e, 0.0, rng);
    EXPECT_FALSE(c.from_expert);
    EXPECT_EQ(c.action[0], 1.0);
  }
}

TEST(ChooseAction, BernoulliFrequency) {
  std::mt19937_64 rng(2);
  const Vector s = V({0.0}), e = V({1.0});
  int expert = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) expert += ChooseAction(s, e, 0.7, rng).from_expert;
  EXPECT_NEAR(expert / static_cast<double>(n), 0.7, 0.005);
}

TEST(ChooseAction, SeededSequence) {
  std::mt19937_64 a(3), b(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(ChooseAction(V({0}), V({1}), 0.5, a).from_expert,
              ChooseAction(V({0}), V({1}), 0.5, b).from_expert);
  }
}

TEST(ActionLoss, Cases) {
  EXPECT_EQ(ActionLoss(V({0.3, -0.2}), V({0.3, -0.2})), 0.0);
  EXPECT_EQ(ActionLoss(V({3.0}), V({1.0})), 6.0);
  // Per-component oracle: sum of d^2 + |d|.
  const Vector a = V({0.5, -1.0, 2.0});
  const Vector b = V({-0.5, 1.0, 1.5});
  EXPECT_NEAR(ActionLoss(a, b), (1.0 + 1.0) + (4.0 + 2.0) + (0.25 + 0.5), 1e-15);
  EXPECT_EQ(ActionLoss(a, b), ActionLoss(b, a));
  EXPECT_GT(ActionLoss(a, b), 0.0);
  EXPECT_THROW(ActionLoss(V({1.0}), V({1.0, 2.0})), DimensionMismatch);
}

TEST(InjectProprioNoise, TouchesOnlyProprio) {
  std::mt19937_64 rng(4);
  const Vector obs = V({0.1, 0.2, 0.3, 0.4, 1.0});
  const int idx[] = {0, 1};
  EXPECT_EQ(InjectProprioNoise(obs, idx, 0.0, rng), obs);
  const Vector noisy = InjectProprioNoise(obs, idx, 0.01, rng);
  for (int i = 2; i < 5; ++i) EXPECT_EQ(noisy[i], obs[i]);
  EXPECT_NE(noisy[0], obs[0]);
  const int bad[] = {7};
  EXPECT_THROW(InjectProprioNoise(obs, bad, 0.01, rng), DimensionMismatch);
}

TEST(InjectProprioNoise, UniformStatistics) {
  std::mt19937_64 rng(5);
  const Vector obs = V({0.0, 0.0});
  const int idx[] = {1};
  const double range = 0.01;
  const int n = 100000;
  double lo = 1.0, hi = -1.0, sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = InjectProprioNoise(obs, idx, range, rng)[1];
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  }
  EXPECT_GE(lo, -range);
  EXPECT_LE(hi, range);
  const double standard_error = range / std::sqrt(3.0) / std::sqrt(n);
  EXPECT_LT(std::abs(sum / n), 3.0 * standard_error);
}

TEST(ReplayBuffer, EvictsOldestFirst) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    buf.Add({V({static_cast<double>(i)}), V({0.0})});
    EXPECT_LE(buf.size(), 3u);
  }
  ASSERT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.entries()[0].observation[0], 2.0);
  EXPECT_EQ(buf.entries()[2].observation[0], 4.0);
  EXPECT_EQ(ReplayBuffer().capacity(), 100000u);
  EXPECT_THROW(ReplayBuffer(0), ConfigError);
}

TEST(LinearPolicy, FitRecoversLinearMap) {
  Eigen::MatrixXd w(2, 3);
  w << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;
  const LinearPolicy truth(w);
  ReplayBuffer buf;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const Vector o = V({n(rng), n(rng), 1.0});
    buf.Add({o, truth.Act(o)});
  }
  LinearPolicy student(Eigen::MatrixXd::Zero(2, 3));
  student.Fit(buf);
  EXPECT_LT((student.weights() - w).norm(), 1e-12);
}

TEST(ToyTask, ExpertStaysLinearInsideWalls) {
  const ToyTask task;
  const LinearPolicy expert = task.Expert();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Vector o = task.Reset(rng);
    for (int t = 0; t < 20; ++t) {
      const Vector a = expert.Act(o);
      EXPECT_LE(a.cwiseAbs().maxCoeff(), task.action_bound);
      EXPECT_NEAR(a[0], task.expert_gain * (o[2] - o[0]), 1e-15);
      o = task.Step(o, V({5.0, -5.0}));
      EXPECT_LE(o.head<2>().cwiseAbs().maxCoeff(), task.extent);
    }
  }
}

TEST(ToyTask, ExpertReachesGoal) {
  const ToyTask task;
  const LinearPolicy expert = task.Expert();
  std::mt19937_64 rng(8);
  Vector o = task.Reset(rng);
  const double start = -ToyTask::Reward(o);
  for (int t = 0; t < task.horizon; ++t) o = task.Step(o, expert.Act(o));
  // Each step shrinks the error by (1 - gain dt).
  EXPECT_NEAR(-ToyTask::Reward(o), start * std::pow(1.0 - 0.05, task.horizon), 1e-12);
}

TEST(DaggerTrain, SelfDistillationFixedPoint) {
  const ToyTask task;
  const LinearPolicy expert = task.Expert();
  LinearPolicy student = expert;
  DaggerConfig cfg;
  cfg.epochs = 3;
  cfg.decay = 1.0;
  cfg.proprio_noise = 0.0;
  const DaggerResult r = DaggerTrain(task, expert, student, cfg, 9);
  for (const EpochRecord& e : r.epochs) {
    EXPECT_EQ(e.p, 1.0);
    EXPECT_LT(e.probe_loss, 1e-12);  // L1 term sees rounding linearly
  }
  EXPECT_LT(r.final_probe_loss, 1e-12);
  EXPECT_EQ(r.expert_steps, r.total_steps);
}

TEST(DaggerTrain, SchedulerComposesOverEpochs) {
  const ToyTask task;
  LinearPolicy student(Eigen::MatrixXd::Zero(2, 5));
  DaggerConfig cfg;
  cfg.epochs = 3;
  cfg.episodes_per_epoch = 2;
  const DaggerResult r = DaggerTrain(task, task.Expert(), student, cfg, 10);
  const int per_epoch = cfg.episodes_per_epoch * task.horizon;
  EXPECT_NEAR(r.final_p, std::pow(0.93, 3 * per_epoch), 1e-15);
  EXPECT_NEAR(r.epochs[1].p, std::pow(0.93, per_epoch), 1e-15);
  EXPECT_EQ(r.epochs[2].buffer_size, static_cast<size_t>(3 * per_epoch));

  cfg.decay_per_epoch = true;
  LinearPolicy other(Eigen::MatrixXd::Zero(2, 5));
  EXPECT_NEAR(DaggerTrain(task, task.Expert(), other, cfg, 10).final_p, std::pow(0.93, 3), 1e-15);
}

TEST(DaggerTrain, ExpertFrequencyTracksIntegratedP) {
  const ToyTask task;
  LinearPolicy student(Eigen::MatrixXd::Zero(2, 5));
  DaggerConfig cfg;
  cfg.epochs = 20;
  cfg.decay = 0.999;
  const DaggerResult r = DaggerTrain(task, task.Expert(), student, cfg, 11);
  // Expected expert count: sum of p over steps; Bernoulli variance bounds the spread.
  double expected = 0.0, variance = 0.0;
  for (size_t k = 0; k < r.total_steps; ++k) {
    const double p = std::pow(0.999, static_cast<double>(k));
    expected += p;
    variance += p * (1.0 - p);
  }
  EXPECT_LT(std::abs(r.expert_steps - expected), 4.0 * std::sqrt(variance));
}

TEST(DaggerTrain, LinearStudentDistills) {
  const ToyTask task;
  LinearPolicy student(Eigen::MatrixXd::Zero(2, 5));
  const DaggerResult r = DaggerTrain(task, task.Expert(), student, {}, 12);
  ASSERT_EQ(r.epochs.size(), 50u);
  EXPECT_LT(r.final_probe_loss, 0.01 * r.epochs[0].probe_loss);
}

TEST(DaggerTrain, NoiseFreeProbeLossNonIncreasing) {
  const ToyTask task;
  LinearPolicy student(Eigen::MatrixXd::Zero(2, 5));
  DaggerConfig cfg;
  cfg.epochs = 15;
  cfg.proprio_noise = 0.0;
  const DaggerResult r = DaggerTrain(task, task.Expert(), student, cfg, 13);
  for (size_t e = 1; e < r.epochs.size(); ++e) {
    EXPECT_LE(r.epochs[e].probe_loss, r.epochs[e - 1].probe_loss + 1e-15) << "epoch " << e;
  }
}

TEST(DaggerTrain, Deterministic) {
  const ToyTask task;
  LinearPolicy a(Eigen::MatrixXd::Zero(2, 5)), b(Eigen::MatrixXd::Zero(2, 5));
  DaggerConfig cfg;
  cfg.epochs = 5;
  std::ostringstream ca, cb;
  WriteDaggerCsv(DaggerTrain(task, task.Expert(), a, cfg, 14).epochs, ca);
  WriteDaggerCsv(DaggerTrain(task, task.Expert(), b, cfg, 14).epochs, cb);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(a.weights(), b.weights());
}

TEST(DaggerTrain, RejectsZeroEpochs) {
  const ToyTask task;
  LinearPolicy student(Eigen::MatrixXd::Zero(2, 5));
  DaggerConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(DaggerTrain(task, task.Expert(), student, cfg, 0), ValidationError);
}

TEST(WriteDaggerCsv, Format) {
  std::ostringstream out;
  WriteDaggerCsv({{0, 1.0, 200, 0.5, -12.25}}, out);
  EXPECT_EQ(out.str(), "epoch,p,buffer_size,probe_loss,rollout_return\n0,1,200,0.5,-12.25\n");
}

}  // namespace
}  // namespace h2r
