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

#ifndef H2R_HYBRID_H_
#define H2R_HYBRID_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "h2r/dagger.h"
#include "h2r/simworld.h"

namespace h2r {

/// Follows a seeded sum of per-joint sinusoids, moving at most max_delta per
/// step from the observed joints. Observation: [q..., t].
class SinusoidPolicy : public Policy {
 public:
  SinusoidPolicy(int dof, double amplitude, double max_delta, uint64_t seed);
  Vector Act(const Vector& obs) const override;
  static Vector Observe(const std::vector<double>& q, double t);

 private:
  std::vector<double> amplitude_, omega_, phase_;
  double max_delta_;
};

struct HybridConfig {
  int dof = 6;
  int steps = 200;
  double dt = 0.02;
  double tau_sim = 0.06;
  double tau_real = 0.06;
  double joint_limit = 2.5;  // symmetric, rad
  double amplitude = 0.8;
  double max_delta = 0.05;   // rad per step

  void Validate() const;
};

struct HybridStep {
  int step = 0;
  std::vector<double> sim_q;
  std::vector<double> real_q;
  double deviation = 0.0;  // |sim - real|
  std::vector<double> naive_target;
  std::vector<double> naive_q;
  double naive_deviation = 0.0;  // |sent target - reached|
  bool joint_limit = false;
};

struct HybridTrace {
  std::vector<HybridStep> steps;
  double terminal_deviation() const { return steps.empty() ? 0.0 : steps.back().deviation; }
  double terminal_naive_deviation() const {
    return steps.empty() ? 0.0 : steps.back().naive_deviation;
  }
};

/// Each step the policy reads the real joints, the simulated chain executes
/// the action, and the real chain is sent the simulated joint positions. The
/// naive baseline sends the action straight to a second real chain.
HybridTrace RunHybrid(const Policy& policy, const KinematicChain& sim, const KinematicChain& real,
                      int steps, double dt);

/// Seeded policy and chains from the config, then RunHybrid.
HybridTrace RunHybrid(const HybridConfig& cfg, uint64_t seed);

void WriteHybridCsv(const HybridTrace& trace, std::ostream& out);

}  // namespace h2r

#endif  // H2R_HYBRID_H_
