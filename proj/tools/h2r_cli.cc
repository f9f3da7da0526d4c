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

// h2r: run the servo, sweep, reward, depth, DAgger and hybrid experiments.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "h2r/commands.h"
#include "h2r/config.h"
#include "h2r/errors.h"

namespace {

struct GlobalOptions {
  std::string config;
  std::string out;
  long long seed = -1;
  std::vector<std::string> overrides;
};

h2r::ExperimentConfig Resolve(const GlobalOptions& g, std::vector<std::string> extra) {
  std::vector<std::string> overrides = g.overrides;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  // Flags win over both the file and --override.
  if (g.seed >= 0) overrides.push_back("experiment.seed=" + std::to_string(g.seed));
  if (!g.out.empty()) overrides.push_back("experiment.out_dir=" + g.out);
  return g.config.empty() ? h2r::ConfigFromOverrides(overrides)
                          : h2r::LoadConfig(g.config, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop servoing, reward, depth and distillation experiments"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "experiment seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory");
  app.add_option("--override", g.overrides, "section.key=value, repeatable");

  auto* servo = app.add_subcommand("servo", "one closed-loop episode in the simulated world");
  auto* sweep = app.add_subcommand("sweep", "seeded episodes plus the open-loop baseline");
  auto* trials = sweep->add_option("--trials", "number of episodes");
  int n_trials = 0;
  trials->each([&](const std::string& v) { n_trials = std::stoi(v); });

  auto* reward = app.add_subcommand("reward-eval", "per-step rewards of a rollout");
  std::string trajectory, rollout;
  reward->add_option("--trajectory", trajectory, "reference trajectory file");
  reward->add_option("--rollout", rollout, "rollout file");

  auto* depth = app.add_subcommand("depth", "depth augmentation pipelines");
  std::string input, mode = "sim", dataset;
  depth->add_option("--input", input, "16-bit PGM depth image")->required();
  depth->add_option("--mode", mode, "sim or real")->check(CLI::IsMember({"sim", "real"}));
  depth->add_option("--dataset", dataset, "mixup partner image (sim mode)");

  auto* dagger = app.add_subcommand("dagger", "distill the toy expert into a linear student");
  auto* hybrid = app.add_subcommand("hybrid", "hybrid vs naive control of a lagged arm");

  for (CLI::App* sub : {servo, sweep, reward, depth, dagger, hybrid}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::vector<std::string> extra;
    if (*sweep && n_trials > 0) extra.push_back("sweep.trials=" + std::to_string(n_trials));
    if (!trajectory.empty()) extra.push_back("reward.trajectory=" + trajectory);
    if (!rollout.empty()) extra.push_back("reward.rollout=" + rollout);
    if (!dataset.empty()) extra.push_back("augmentation.dataset=" + dataset);
    const h2r::ExperimentConfig cfg = Resolve(g, extra);

    if (*servo) h2r::RunServoCommand(cfg, std::cout);
    if (*sweep) h2r::RunSweepCommand(cfg, std::cout);
    if (*reward) h2r::RunRewardEvalCommand(cfg, std::cout);
    if (*depth) h2r::RunDepthCommand(cfg, input, h2r::ParseDepthMode(mode), std::cout);
    if (*dagger) h2r::RunDaggerCommand(cfg, std::cout);
    if (*hybrid) h2r::RunHybridCommand(cfg, std::cout);
  } catch (const h2r::Error& e) {
    std::cerr << "h2r: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "h2r: unexpected failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
