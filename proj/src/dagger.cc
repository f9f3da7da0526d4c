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

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/QR>
#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/random.h"
#include "h2r/text_io.h"

namespace h2r {

RolloutScheduler::RolloutScheduler(double p0, double decay) : p_(p0), decay_(decay) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("scheduler p0 must be in [0, 1]");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("scheduler decay must be in (0, 1]");
}

ChosenAction ChooseAction(const Vector& student, const Vector& expert, double p,
                          std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("choose_action needs p in [0, 1]");
  const bool use_expert = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  return {use_expert ? expert : student, use_expert};
}

double ActionLoss(const Vector& a, const Vector& a_star) {
  if (a.size() != a_star.size()) {
    throw DimensionMismatch(
        fmt::format("action has {} components, target has {}", a.size(), a_star.size()));
  }
  const Vector d = a - a_star;
  return d.squaredNorm() + d.lpNorm<1>();
}

Vector InjectProprioNoise(const Vector& obs, std::span<const int> proprio_indices, double range,
                          std::mt19937_64& rng) {
  if (!(range >= 0.0)) throw ValidationError("proprio noise range must be >= 0");
  Vector out = obs;
  if (range == 0.0) return out;
  std::uniform_real_distribution<double> u(-range, range);
  for (int i : proprio_indices) {
    if (i < 0 || i >= obs.size()) {
      throw DimensionMismatch(fmt::format("proprio index {} outside observation of {}", i,
                                          obs.size()));
    }
    out[i] += u(rng);
  }
  return out;
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("buffer capacity must be >= 1");
}

void ReplayBuffer::Add(Transition t) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(t));
}

LinearPolicy::LinearPolicy(Eigen::MatrixXd weights, double clamp)
    : w_(std::move(weights)), clamp_(clamp) {}

Vector LinearPolicy::Act(const Vector& obs) const {
  if (obs.size() != w_.cols()) {
    throw DimensionMismatch(
        fmt::format("policy expects {} inputs, got {}", w_.cols(), obs.size()));
  }
  Vector a = w_ * obs;
  if (clamp_ > 0.0) a = a.cwiseMax(-clamp_).cwiseMin(clamp_);
  return a;
}

void LinearPolicy::Fit(const ReplayBuffer& buffer) {
  if (buffer.size() == 0) return;
  const auto n = static_cast<Eigen::Index>(buffer.size());
  Eigen::MatrixXd obs(n, w_.cols());
  Eigen::MatrixXd act(n, w_.rows());
  Eigen::Index i = 0;
  for (const Transition& t : buffer.entries()) {
    obs.row(i) = t.observation.transpose();
    act.row(i) = t.expert_action.transpose();
    ++i;
  }
  w_ = obs.colPivHouseholderQr().solve(act).transpose();
}

void ToyTask::Validate() const {
  if (!(action_bound > 0.0 && dt > 0.0 && extent > 0.0 && expert_gain >= 0.0)) {
    throw ConfigError("toy task bounds, dt and extent must be > 0");
  }
  if (horizon < 1) throw ConfigError("toy task horizon must be >= 1");
}

LinearPolicy ToyTask::Expert() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kActDim, kObsDim);
  w(0, 0) = w(1, 1) = -expert_gain;
  w(0, 2) = w(1, 3) = expert_gain;
  return LinearPolicy(w, action_bound);
}

Vector ToyTask::Reset(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(-extent, extent);
  Vector obs(kObsDim);
  for (int i = 0; i < 4; ++i) obs[i] = u(rng);
  obs[4] = 1.0;
  return obs;
}

Vector ToyTask::Step(const Vector& obs, const Vector& action) const {
  if (action.size() != kActDim) throw DimensionMismatch("toy task actions are 2-D");
  Vector next = obs;
  for (int i = 0; i < kActDim; ++i) {
    next[i] += std::clamp(action[i], -action_bound, action_bound) * dt;
    next[i] = std::clamp(next[i], -extent, extent);  // arena walls
  }
  return next;
}

double ToyTask::Reward(const Vector& obs) {
  return -std::hypot(obs[0] - obs[2], obs[1] - obs[3]);
}

void DaggerConfig::Validate() const {
  if (epochs < 0) throw ConfigError("dagger epochs must be >= 0");
  if (episodes_per_epoch < 1) throw ConfigError("episodes_per_epoch must be >= 1");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("dagger p0 must be in [0, 1]");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("dagger decay must be in (0, 1]");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (!(proprio_noise >= 0.0)) throw ConfigError("proprio_noise must be >= 0");
  if (probe_states < 1) throw ConfigError("probe_states must be >= 1");
}

std::vector<Vector> ProbeSet(const ToyTask& task, int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> probe;
  for (int i = 0; i < count; ++i) probe.push_back(task.Reset(rng));
  return probe;
}

double ProbeLoss(const Policy& student, const Policy& expert, const std::vector<Vector>& probe) {
  double sum = 0.0;
  for (const Vector& o : probe) sum += ActionLoss(student.Act(o), expert.Act(o));
  return probe.empty() ? 0.0 : sum / probe.size();
}

DaggerResult DaggerTrain(const ToyTask& task, const Policy& expert, LinearPolicy& student,
                         const DaggerConfig& cfg, uint64_t seed) {
  task.Validate();
  cfg.Validate();
  if (cfg.epochs < 1) throw ValidationError("dagger training needs epochs >= 1");
  RolloutScheduler scheduler(cfg.p0, cfg.decay);
  ReplayBuffer buffer(cfg.buffer_capacity);
  const std::vector<Vector> probe = ProbeSet(task, cfg.probe_states, DeriveSeed(seed, 0));
  std::mt19937_64 env_rng(DeriveSeed(seed, 1));
  std::mt19937_64 noise_rng(DeriveSeed(seed, 2));
  std::mt19937_64 choice_rng(DeriveSeed(seed, 3));

  DaggerResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.p = scheduler.p();
    rec.probe_loss = ProbeLoss(student, expert, probe);
    for (int episode = 0; episode < cfg.episodes_per_epoch; ++episode) {
      Vector obs = task.Reset(env_rng);
      for (int t = 0; t < task.horizon; ++t) {
        const Vector seen =
            InjectProprioNoise(obs, ToyTask::kProprioIndices, cfg.proprio_noise, noise_rng);
        const Vector a_expert = expert.Act(obs);
        const ChosenAction chosen =
            ChooseAction(student.Act(seen), a_expert, scheduler.p(), choice_rng);
        buffer.Add({seen, a_expert});
        obs = task.Step(obs, chosen.action);
        rec.rollout_return += ToyTask::Reward(obs);
        result.expert_steps += chosen.from_expert;
        ++result.total_steps;
        if (!cfg.decay_per_epoch) scheduler.Step();
      }
    }
    if (cfg.decay_per_epoch) scheduler.Step();
    rec.buffer_size = buffer.size();
    student.Fit(buffer);
    result.epochs.push_back(rec);
  }
  result.final_probe_loss = ProbeLoss(student, expert, probe);
  result.final_p = scheduler.p();
  return result;
}

void WriteDaggerCsv(const std::vector<EpochRecord>& epochs, std::ostream& out) {
  out << "epoch,p,buffer_size,probe_loss,rollout_return\n";
  for (const EpochRecord& r : epochs) {
    out << fmt::format("{},{},{},{},{}\n", r.epoch, FormatDouble(r.p), r.buffer_size,
                       FormatDouble(r.probe_loss), FormatDouble(r.rollout_return));
  }
}

}  // namespace h2r
