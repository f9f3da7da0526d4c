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

#ifndef H2R_DAGGER_H_
#define H2R_DAGGER_H_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace h2r {

using Vector = Eigen::VectorXd;

/// Probability of executing the expert action, decayed geometrically.
class RolloutScheduler {
 public:
  explicit RolloutScheduler(double p0 = 1.0, double decay = 0.93);
  double p() const { return p_; }
  double decay() const { return decay_; }
  void Step() { p_ *= decay_; }

 private:
  double p_;
  double decay_;
};

struct ChosenAction {
  Vector action;
  bool from_expert = false;
};

/// Expert with probability p, student otherwise.
ChosenAction ChooseAction(const Vector& student, const Vector& expert, double p,
                          std::mt19937_64& rng);

/// Squared L2 plus L1 of the difference. Throws DimensionMismatch.
double ActionLoss(const Vector& a, const Vector& a_star);

/// Adds U[-range, range] at the given indices only.
Vector InjectProprioNoise(const Vector& obs, std::span<const int> proprio_indices, double range,
                          std::mt19937_64& rng);

struct Transition {
  Vector observation;  // as the student saw it
  Vector expert_action;
};

/// Bounded aggregate dataset; the oldest pair goes first when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity = 100000);
  void Add(Transition t);
  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  const std::deque<Transition>& entries() const { return entries_; }

 private:
  size_t capacity_;
  std::deque<Transition> entries_;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Vector Act(const Vector& obs) const = 0;
};

/// a = W o, optionally clamped elementwise.
class LinearPolicy : public Policy {
 public:
  LinearPolicy(Eigen::MatrixXd weights, double clamp = 0.0);  // clamp 0: unbounded
  Vector Act(const Vector& obs) const override;
  /// Least-squares fit to every buffered pair.
  void Fit(const ReplayBuffer& buffer);
  const Eigen::MatrixXd& weights() const { return w_; }

 private:
  Eigen::MatrixXd w_;
  double clamp_;
};

/// Planar point mass driven toward a goal inside a walled square.
/// Observation [p, g, 1].
struct ToyTask {
  double action_bound = 1.0;  // per component, m/s
  double dt = 0.1;
  int horizon = 50;
  double expert_gain = 0.5;  // expert velocity per metre of error
  double extent = 1.0;       // positions and goals drawn from [-extent, extent]^2

  static constexpr int kObsDim = 5;
  static constexpr int kActDim = 2;
  static constexpr int kProprioIndices[2] = {0, 1};

  void Validate() const;
  /// Proportional expert; the walls keep it inside its bound, so it is linear.
  LinearPolicy Expert() const;
  Vector Reset(std::mt19937_64& rng) const;
  /// Clamps the action, integrates, stops at the walls.
  Vector Step(const Vector& obs, const Vector& action) const;
  static double Reward(const Vector& obs);  // negative distance to goal
};

struct DaggerConfig {
  int epochs = 50;
  int episodes_per_epoch = 4;
  double p0 = 1.0;
  double decay = 0.93;
  bool decay_per_epoch = false;  // default steps the scheduler every environment step
  size_t buffer_capacity = 100000;
  double proprio_noise = 0.01;
  int probe_states = 256;

  void Validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double p = 0.0;             // at the start of the epoch
  size_t buffer_size = 0;     // after the epoch's rollouts
  double probe_loss = 0.0;    // of the student that ran the epoch
  double rollout_return = 0.0;
};

struct DaggerResult {
  std::vector<EpochRecord> epochs;
  double final_probe_loss = 0.0;  // after the last fit
  double final_p = 0.0;
  size_t expert_steps = 0;
  size_t total_steps = 0;
};

/// Fixed held-out observations for measuring distillation progress.
std::vector<Vector> ProbeSet(const ToyTask& task, int count, uint64_t seed);
double ProbeLoss(const Policy& student, const Policy& expert, const std::vector<Vector>& probe);

/// Roll out under the mixed policy, aggregate (noisy student obs, clean expert
/// action) pairs, refit the student after each epoch.
DaggerResult DaggerTrain(const ToyTask& task, const Policy& expert, LinearPolicy& student,
                         const DaggerConfig& cfg, uint64_t seed);

void WriteDaggerCsv(const std::vector<EpochRecord>& epochs, std::ostream& out);

}  // namespace h2r

#endif  // H2R_DAGGER_H_
