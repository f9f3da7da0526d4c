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

#ifndef H2R_COMMANDS_H_
#define H2R_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "h2r/config.h"

namespace h2r {

// Each command writes its artifacts under cfg.out_dir, prints a one-line
// summary to `log`, and throws on invalid input.

ServoOutcome RunServoCommand(const ExperimentConfig& cfg, std::ostream& log);

struct SweepTrial {
  int trial = 0;
  BaseState start;
  bool converged = false;
  int steps = 0;
  GroundTruthError closed_loop;
  GroundTruthError open_loop;
};

struct ErrorStats {
  double mean_dist = 0.0, std_dist = 0.0;
  double mean_ori = 0.0, std_ori = 0.0;
};

struct SweepResult {
  std::vector<SweepTrial> trials;  // in trial order
  ErrorStats closed_loop;
  ErrorStats open_loop;
  int converged = 0;
};

/// One seeded trial: sampled start, closed loop, then the open-loop baseline
/// on an identical world.
SweepTrial RunSweepTrial(const ExperimentConfig& cfg, int trial);
/// Trials run on worker threads; results are identical to a serial run.
SweepResult RunSweep(const ExperimentConfig& cfg);
SweepResult RunSweepCommand(const ExperimentConfig& cfg, std::ostream& log);
void WriteSweepCsv(const SweepResult& result, std::ostream& trials, std::ostream& summary);

void RunRewardEvalCommand(const ExperimentConfig& cfg, std::ostream& log);

enum class DepthMode { kSim, kReal };
DepthMode ParseDepthMode(std::string_view text);
void RunDepthCommand(const ExperimentConfig& cfg, const std::filesystem::path& input,
                     DepthMode mode, std::ostream& log);

void RunDaggerCommand(const ExperimentConfig& cfg, std::ostream& log);
void RunHybridCommand(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace h2r

#endif  // H2R_COMMANDS_H_
