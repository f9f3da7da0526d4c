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

#include "h2r/hybrid.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/random.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

double Distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

std::vector<double> ToStd(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

SinusoidPolicy::SinusoidPolicy(int dof, double amplitude, double max_delta, uint64_t seed)
    : max_delta_(max_delta) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int j = 0; j < dof; ++j) {
    amplitude_.push_back(amplitude * (0.5 + 0.5 * u(rng)));
    omega_.push_back(1.0 + 2.0 * u(rng));  // rad/s
    phase_.push_back(2.0 * std::numbers::pi * u(rng));
  }
}

Vector SinusoidPolicy::Observe(const std::vector<double>& q, double t) {
  Vector obs(q.size() + 1);
  for (size_t j = 0; j < q.size(); ++j) obs[j] = q[j];
  obs[q.size()] = t;
  return obs;
}

Vector SinusoidPolicy::Act(const Vector& obs) const {
  const auto dof = static_cast<Eigen::Index>(amplitude_.size());
  if (obs.size() != dof + 1) {
    throw DimensionMismatch(fmt::format("policy expects {} joints plus time", dof));
  }
  const double t = obs[dof];
  Vector a(dof);
  for (Eigen::Index j = 0; j < dof; ++j) {
    const double goal = amplitude_[j] * std::sin(omega_[j] * t + phase_[j]);
    a[j] = obs[j] + std::clamp(goal - obs[j], -max_delta_, max_delta_);
  }
  return a;
}

void HybridConfig::Validate() const {
  if (dof < 1 || steps < 0) throw ConfigError("hybrid dof must be >= 1 and steps >= 0");
  if (!(dt > 0.0 && tau_sim > 0.0 && tau_real > 0.0)) {
    throw ConfigError("hybrid dt and lag constants must be > 0");
  }
  if (!(joint_limit > 0.0 && amplitude >= 0.0 && max_delta > 0.0)) {
    throw ConfigError("hybrid joint_limit and max_delta must be > 0");
  }
}

HybridTrace RunHybrid(const Policy& policy, const KinematicChain& sim, const KinematicChain& real,
                      int steps, double dt) {
  if (sim.dof() != real.dof()) {
    throw DimensionMismatch(
        fmt::format("sim chain has {} joints, real chain has {}", sim.dof(), real.dof()));
  }
  sim.Validate();
  real.Validate();
  KinematicChain s = sim;
  KinematicChain r = real;
  KinematicChain naive = real;
  HybridTrace trace;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Vector action = policy.Act(SinusoidPolicy::Observe(r.q, t));
    ChainStepResult sim_step = ChainStep(s, ToStd(action), dt);
    ChainStepResult real_step = ChainStep(r, sim_step.chain.q, dt);
    s = std::move(sim_step.chain);
    r = std::move(real_step.chain);

    const std::vector<double> naive_target = ToStd(policy.Act(SinusoidPolicy::Observe(naive.q, t)));
    ChainStepResult naive_step = ChainStep(naive, naive_target, dt);
    naive = std::move(naive_step.chain);

    HybridStep rec;
    rec.step = k;
    rec.sim_q = s.q;
    rec.real_q = r.q;
    rec.deviation = Distance(s.q, r.q);
    rec.naive_target = naive_target;
    rec.naive_q = naive.q;
    rec.naive_deviation = Distance(naive_target, naive.q);
    rec.joint_limit = sim_step.joint_limit || real_step.joint_limit || naive_step.joint_limit;
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

HybridTrace RunHybrid(const HybridConfig& cfg, uint64_t seed) {
  cfg.Validate();
  const SinusoidPolicy policy(cfg.dof, cfg.amplitude, cfg.max_delta, DeriveSeed(seed, 0));
  const KinematicChain sim =
      KinematicChain::Uniform(cfg.dof, cfg.tau_sim, -cfg.joint_limit, cfg.joint_limit);
  const KinematicChain real =
      KinematicChain::Uniform(cfg.dof, cfg.tau_real, -cfg.joint_limit, cfg.joint_limit);
  return RunHybrid(policy, sim, real, cfg.steps, cfg.dt);
}

void WriteHybridCsv(const HybridTrace& trace, std::ostream& out) {
  const size_t dof = trace.steps.empty() ? 0 : trace.steps.front().sim_q.size();
  out << "step";
  for (size_t j = 0; j < dof; ++j) out << ",sim_q" << j;
  for (size_t j = 0; j < dof; ++j) out << ",real_q" << j;
  out << ",deviation_norm";
  for (size_t j = 0; j < dof; ++j) out << ",naive_target_q" << j;
  for (size_t j = 0; j < dof; ++j) out << ",naive_real_q" << j;
  out << ",naive_deviation_norm,joint_limit\n";
  for (const HybridStep& s : trace.steps) {
    out << s.step;
    for (double q : s.sim_q) out << ',' << FormatDouble(q);
    for (double q : s.real_q) out << ',' << FormatDouble(q);
    out << ',' << FormatDouble(s.deviation);
    for (double q : s.naive_target) out << ',' << FormatDouble(q);
    for (double q : s.naive_q) out << ',' << FormatDouble(q);
    out << ',' << FormatDouble(s.naive_deviation) << ',' << (s.joint_limit ? 1 : 0) << '\n';
  }
}

}  // namespace h2r
