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

#ifndef H2R_CONFIG_H_
#define H2R_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "h2r/dagger.h"
#include "h2r/depth_aug.h"
#include "h2r/hybrid.h"
#include "h2r/rollout.h"
#include "h2r/servo.h"
#include "h2r/simworld.h"

namespace h2r {

struct ScenarioConfig {
  BaseState goal;
  BaseState start{0.3, -0.2, 15.0 * std::numbers::pi / 180.0, std::nullopt};
  // Sweep start offsets: distance up to max_offset in a uniform direction,
  // yaw uniform in [-max_yaw_offset, max_yaw_offset].
  double max_offset = 0.5;
  double max_yaw_offset = 20.0 * std::numbers::pi / 180.0;
  uint64_t field_seed = 1;
};

struct DepthCommandConfig {
  AugmentConfig augment;
  int histogram_bins = 50;
  std::string dataset;  // optional mixup partner, PGM
};

struct ExperimentConfig {
  uint64_t seed = 0;
  std::string out_dir = "out";
  WorldConfig world;
  ServoConfig servo;
  ScenarioConfig scenario;
  int sweep_trials = 100;
  DepthCommandConfig depth;
  RewardEvalConfig reward;
  std::string trajectory_path;
  std::string rollout_path;
  ToyTask task;
  DaggerConfig dagger;
  HybridConfig hybrid;

  /// Defaults used by the shipped experiments, with the cross-section links
  /// (servo extrinsic, world and augmentation seeds) already resolved.
  static ExperimentConfig Defaults();
  /// Every section, plus referenced files existing. Throws ConfigError.
  void Validate() const;
};

/// INI text: [section] headers and key = value lines. Unknown sections or
/// keys are rejected. Overrides take the form section.key=value.
ExperimentConfig ParseConfig(std::istream& in, const std::vector<std::string>& overrides = {});
ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});
/// Defaults plus overrides, no file.
ExperimentConfig ConfigFromOverrides(const std::vector<std::string>& overrides);

/// Every recognised key with its current value, loadable by ParseConfig.
void WriteConfig(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace h2r

#endif  // H2R_CONFIG_H_
