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

#include "h2r/commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/random.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

std::ofstream OpenArtifact(const ExperimentConfig& cfg, const std::string& name) {
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", (dir / name).string()));
  return out;
}

void Close(std::ofstream& out, const std::string& name) {
  out.close();
  if (!out) throw ValidationError(fmt::format("failed while writing '{}'", name));
}

ErrorStats Stats(const std::vector<GroundTruthError>& errors) {
  ErrorStats s;
  const double n = static_cast<double>(errors.size());
  for (const GroundTruthError& e : errors) {
    s.mean_dist += e.dist / n;
    s.mean_ori += e.ori / n;
  }
  if (errors.size() > 1) {
    for (const GroundTruthError& e : errors) {
      s.std_dist += (e.dist - s.mean_dist) * (e.dist - s.mean_dist);
      s.std_ori += (e.ori - s.mean_ori) * (e.ori - s.mean_ori);
    }
    s.std_dist = std::sqrt(s.std_dist / (n - 1.0));
    s.std_ori = std::sqrt(s.std_ori / (n - 1.0));
  }
  return s;
}

std::string Bool(bool b) { return b ? "true" : "false"; }

}  // namespace

ServoOutcome RunServoCommand(const ExperimentConfig& cfg, std::ostream& log) {
  const LandmarkField field = GenerateField(cfg.world);
  SimServoWorld world(cfg.world, field, cfg.scenario.start, cfg.scenario.goal,
                      DeriveSeed(cfg.seed, 1));
  const ServoOutcome outcome = ServoLoop(world, cfg.servo, DeriveSeed(cfg.seed, 2));

  std::ofstream csv = OpenArtifact(cfg, "servo.csv");
  WriteServoCsv(outcome.history, csv);
  Close(csv, "servo.csv");

  const GroundTruthError gt = outcome.final_ground_truth.value_or(GroundTruthError{});
  std::ofstream summary = OpenArtifact(cfg, "servo_summary.csv");
  summary << "converged,status,steps,gt_dist_error_m,gt_ori_error_rad\n"
          << fmt::format("{},{},{},{},{}\n", Bool(outcome.converged()), StatusName(outcome.status),
                         outcome.steps, FormatDouble(gt.dist), FormatDouble(gt.ori));
  Close(summary, "servo_summary.csv");
  log << fmt::format("converged={} status={} steps={} gt_dist_error={} gt_ori_error={}\n",
                     Bool(outcome.converged()), StatusName(outcome.status), outcome.steps,
                     FormatDouble(gt.dist), FormatDouble(gt.ori));
  return outcome;
}

SweepTrial RunSweepTrial(const ExperimentConfig& cfg, int trial) {
  std::mt19937_64 rng(DeriveSeed(cfg.seed, 100 + trial));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = cfg.scenario.max_offset * u(rng);
  const double heading = 2.0 * std::numbers::pi * u(rng);
  const double yaw = cfg.scenario.max_yaw_offset * (2.0 * u(rng) - 1.0);
  // Offset expressed in the goal frame.
  const BaseState& goal = cfg.scenario.goal;
  const double dx = r * std::cos(heading);
  const double dy = r * std::sin(heading);
  SweepTrial t;
  t.trial = trial;
  t.start = {goal.x + std::cos(goal.yaw) * dx - std::sin(goal.yaw) * dy,
             goal.y + std::sin(goal.yaw) * dx + std::cos(goal.yaw) * dy,
             WrapAngle(goal.yaw + yaw), std::nullopt};

  WorldConfig wc = cfg.world;
  wc.seed = DeriveSeed(cfg.scenario.field_seed, trial);
  const LandmarkField field = GenerateField(wc);
  const uint64_t world_seed = DeriveSeed(cfg.seed, 200 + trial);
  const uint64_t solver_seed = DeriveSeed(cfg.seed, 300 + trial);

  SimServoWorld closed(wc, field, t.start, goal, world_seed);
  const ServoOutcome outcome = ServoLoop(closed, cfg.servo, solver_seed);
  t.converged = outcome.converged();
  t.steps = outcome.steps;
  t.closed_loop = *outcome.final_ground_truth;

  SimServoWorld open(wc, field, t.start, goal, world_seed);
  t.open_loop = RunOpenLoop(open, cfg.servo, solver_seed);
  return t;
}

SweepResult RunSweep(const ExperimentConfig& cfg) {
  const int n = cfg.sweep_trials;
  SweepResult result;
  result.trials.resize(n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        result.trials[i] = RunSweepTrial(cfg, i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(static_cast<int>(std::thread::hardware_concurrency()), 1, n);
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<GroundTruthError> closed, open;
  for (const SweepTrial& t : result.trials) {
    closed.push_back(t.closed_loop);
    open.push_back(t.open_loop);
    result.converged += t.converged;
  }
  result.closed_loop = Stats(closed);
  result.open_loop = Stats(open);
  return result;
}

void WriteSweepCsv(const SweepResult& result, std::ostream& trials, std::ostream& summary) {
  trials << "trial,start_x,start_y,start_yaw,converged,steps,dist_error_m,ori_error_rad,"
            "open_loop_dist_error_m,open_loop_ori_error_rad\n";
  for (const SweepTrial& t : result.trials) {
    trials << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", t.trial, FormatDouble(t.start.x),
                          FormatDouble(t.start.y), FormatDouble(t.start.yaw), Bool(t.converged),
                          t.steps, FormatDouble(t.closed_loop.dist),
                          FormatDouble(t.closed_loop.ori), FormatDouble(t.open_loop.dist),
                          FormatDouble(t.open_loop.ori));
  }
  const size_t n = result.trials.size();
  summary << "mode,trials,converged,mean_dist_error_m,std_dist_error_m,mean_ori_error_rad,"
             "std_ori_error_rad\n";
  const auto row = [&](std::string_view mode, int converged, const ErrorStats& s) {
    summary << fmt::format("{},{},{},{},{},{},{}\n", mode, n, converged,
                           FormatDouble(s.mean_dist), FormatDouble(s.std_dist),
                           FormatDouble(s.mean_ori), FormatDouble(s.std_ori));
  };
  row("closed_loop", result.converged, result.closed_loop);
  row("open_loop", 0, result.open_loop);
}

SweepResult RunSweepCommand(const ExperimentConfig& cfg, std::ostream& log) {
  const SweepResult result = RunSweep(cfg);
  std::ofstream trials = OpenArtifact(cfg, "sweep.csv");
  std::ofstream summary = OpenArtifact(cfg, "sweep_summary.csv");
  WriteSweepCsv(result, trials, summary);
  Close(trials, "sweep.csv");
  Close(summary, "sweep_summary.csv");
  log << fmt::format(
      "trials={} converged={} closed_dist={:.4f}+-{:.4f} m closed_ori={:.3f}+-{:.3f} deg "
      "open_dist={:.4f}+-{:.4f} m\n",
      result.trials.size(), result.converged, result.closed_loop.mean_dist,
      result.closed_loop.std_dist, result.closed_loop.mean_ori * 180.0 / std::numbers::pi,
      result.closed_loop.std_ori * 180.0 / std::numbers::pi, result.open_loop.mean_dist,
      result.open_loop.std_dist);
  return result;
}

void RunRewardEvalCommand(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.trajectory_path.empty() || cfg.rollout_path.empty()) {
    throw ConfigError("reward-eval needs both a trajectory and a rollout file");
  }
  const ReferenceTrajectory reference = LoadTrajectory(cfg.trajectory_path);
  const Rollout rollout = LoadRollout(cfg.rollout_path);
  const std::vector<RewardRow> rows = EvaluateRollout(reference, rollout, cfg.reward);
  std::ofstream csv = OpenArtifact(cfg, "rewards.csv");
  WriteRewardCsv(rows, csv);
  Close(csv, "rewards.csv");
  double total = 0.0;
  for (const RewardRow& r : rows) total += r.total;
  log << fmt::format("steps={} terminated={} return={}\n", rows.size(),
                     Bool(!rows.empty() && rows.back().terminated), FormatDouble(total));
}

DepthMode ParseDepthMode(std::string_view text) {
  if (text == "sim") return DepthMode::kSim;
  if (text == "real") return DepthMode::kReal;
  throw ConfigError(fmt::format("depth mode must be sim or real, got '{}'", text));
}

void RunDepthCommand(const ExperimentConfig& cfg, const std::filesystem::path& input,
                     DepthMode mode, std::ostream& log) {
  const DepthImage img = LoadPgm(input);
  DepthImage out;
  std::string tag;
  if (mode == DepthMode::kSim) {
    tag = "sim";
    if (cfg.depth.dataset.empty()) {
      out = SimPipeline(img, cfg.depth.augment);
    } else {
      const DepthImage dataset = LoadPgm(cfg.depth.dataset);
      out = SimPipeline(img, cfg.depth.augment, &dataset);
    }
  } else {
    tag = "real";
    out = RealPipeline(img, cfg.depth.augment.clip_distance);
  }
  const std::string image_name = fmt::format("depth_{}.pgm", tag);
  const std::string hist_name = fmt::format("histogram_{}.csv", tag);
  std::ofstream pgm = OpenArtifact(cfg, image_name);
  WritePgm(out, pgm);
  Close(pgm, image_name);
  std::ofstream hist = OpenArtifact(cfg, hist_name);
  WriteHistogramCsv(Histogram(out, cfg.depth.histogram_bins), out.max_depth, hist);
  Close(hist, hist_name);
  log << fmt::format("mode={} size={}x{} max_depth={}\n", tag, out.width, out.height,
                     FormatDouble(out.max_depth));
}

void RunDaggerCommand(const ExperimentConfig& cfg, std::ostream& log) {
  std::ofstream csv = OpenArtifact(cfg, "dagger.csv");
  if (cfg.dagger.epochs == 0) {
    WriteDaggerCsv({}, csv);
    Close(csv, "dagger.csv");
    log << "epochs=0\n";
    return;
  }
  const LinearPolicy expert = cfg.task.Expert();
  LinearPolicy student(Eigen::MatrixXd::Zero(ToyTask::kActDim, ToyTask::kObsDim));
  const DaggerResult r = DaggerTrain(cfg.task, expert, student, cfg.dagger, cfg.seed);
  WriteDaggerCsv(r.epochs, csv);
  Close(csv, "dagger.csv");
  log << fmt::format("epochs={} first_probe_loss={} final_probe_loss={} final_p={}\n",
                     r.epochs.size(), FormatDouble(r.epochs.front().probe_loss),
                     FormatDouble(r.final_probe_loss), FormatDouble(r.final_p));
}

void RunHybridCommand(const ExperimentConfig& cfg, std::ostream& log) {
  const HybridTrace trace = RunHybrid(cfg.hybrid, cfg.seed);
  std::ofstream csv = OpenArtifact(cfg, "hybrid.csv");
  WriteHybridCsv(trace, csv);
  Close(csv, "hybrid.csv");
  log << fmt::format("steps={} terminal_deviation={} naive_terminal_deviation={}\n",
                     trace.steps.size(), FormatDouble(trace.terminal_deviation()),
                     FormatDouble(trace.terminal_naive_deviation()));
}

}  // namespace h2r
