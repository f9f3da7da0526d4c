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

#include "h2r/config.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/text_io.h"

namespace h2r {
namespace {

namespace pt = boost::property_tree;

constexpr double kDegree = std::numbers::pi / 180.0;

struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

// `member` is a generic lambda returning a reference into the config.
template <typename Member>
Field Real(const char* section, const char* key, Member member, double scale = 1.0) {
  Field f{section, key, nullptr, nullptr};
  f.set = [member, scale, name = std::string(section) + "." + key](ExperimentConfig& c,
                                                                    std::string_view v) {
    member(c) = ParseDouble(v, name) * scale;
  };
  f.get = [member, scale](const ExperimentConfig& c) {
    // Unit conversions do not round-trip exactly; 12 digits hide the residue.
    return scale == 1.0 ? FormatDouble(member(c)) : fmt::format("{:.12g}", member(c) / scale);
  };
  return f;
}

template <typename Member>
Field Integer(const char* section, const char* key, Member member) {
  Field f{section, key, nullptr, nullptr};
  f.set = [member, name = std::string(section) + "." + key](ExperimentConfig& c,
                                                            std::string_view v) {
    using T = std::remove_reference_t<decltype(member(c))>;
    const long long x = ParseInt(v, name);
    if (std::is_unsigned_v<T> && x < 0) throw ConfigError(fmt::format("{} must be >= 0", name));
    member(c) = static_cast<T>(x);
  };
  f.get = [member](const ExperimentConfig& c) { return std::to_string(member(c)); };
  return f;
}

template <typename Member>
Field Flag(const char* section, const char* key, Member member) {
  Field f{section, key, nullptr, nullptr};
  f.set = [member, name = std::string(section) + "." + key](ExperimentConfig& c,
                                                            std::string_view v) {
    if (v == "true" || v == "1") {
      member(c) = true;
    } else if (v == "false" || v == "0") {
      member(c) = false;
    } else {
      throw ConfigError(fmt::format("{}: expected true or false, got '{}'", name, v));
    }
  };
  f.get = [member](const ExperimentConfig& c) { return std::string(member(c) ? "true" : "false"); };
  return f;
}

template <typename Member>
Field Text(const char* section, const char* key, Member member) {
  Field f{section, key, nullptr, nullptr};
  f.set = [member](ExperimentConfig& c, std::string_view v) { member(c) = std::string(v); };
  f.get = [member](const ExperimentConfig& c) { return member(c); };
  return f;
}

#define H2R_M(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Integer("experiment", "seed", H2R_M(seed)),
      Text("experiment", "out_dir", H2R_M(out_dir)),

      Real("world", "pixel_noise_sigma", H2R_M(world.pixel_noise_sigma)),
      Real("world", "outlier_fraction", H2R_M(world.outlier_fraction)),
      Real("world", "depth_noise_sigma", H2R_M(world.depth_noise_sigma)),
      Real("world", "actuation_noise_sigma", H2R_M(world.actuation_noise_sigma)),
      Real("world", "coupling_gain", H2R_M(world.coupling_gain)),
      Integer("world", "num_landmarks", H2R_M(world.num_landmarks)),
      Real("world", "fx", H2R_M(world.camera.fx)),
      Real("world", "fy", H2R_M(world.camera.fy)),
      Real("world", "cx", H2R_M(world.camera.cx)),
      Real("world", "cy", H2R_M(world.camera.cy)),
      Integer("world", "image_width", H2R_M(world.image_width)),
      Integer("world", "image_height", H2R_M(world.image_height)),
      Real("world", "near_clip", H2R_M(world.near_clip)),
      Real("world", "far_clip", H2R_M(world.far_clip)),
      Real("world", "max_depth", H2R_M(world.max_depth)),

      Real("servo", "eps_x", H2R_M(servo.eps_x)),
      Real("servo", "eps_y", H2R_M(servo.eps_y)),
      Real("servo", "eps_yaw_deg", H2R_M(servo.eps_yaw), kDegree),
      Real("servo", "dt", H2R_M(servo.dt)),
      Integer("servo", "max_steps", H2R_M(servo.max_steps)),
      Integer("servo", "matcher_failure_limit", H2R_M(servo.matcher_failure_limit)),
      Flag("servo", "simultaneous", H2R_M(servo.simultaneous)),
      Integer("servo", "ransac_iterations", H2R_M(servo.pnp.ransac_iterations)),
      Real("servo", "ransac_confidence", H2R_M(servo.pnp.ransac_confidence)),
      Real("servo", "inlier_threshold_px", H2R_M(servo.pnp.inlier_threshold_px)),
      Integer("servo", "refine_max_iterations", H2R_M(servo.pnp.refine_max_iterations)),
      Real("servo", "refine_tolerance", H2R_M(servo.pnp.refine_tolerance)),
      Real("servo", "kp_x", H2R_M(servo.gains_x.kp)),
      Real("servo", "ki_x", H2R_M(servo.gains_x.ki)),
      Real("servo", "kd_x", H2R_M(servo.gains_x.kd)),
      Real("servo", "integral_clamp_x", H2R_M(servo.gains_x.integral_clamp)),
      Real("servo", "velocity_clamp_x", H2R_M(servo.gains_x.output_clamp)),
      Real("servo", "kp_y", H2R_M(servo.gains_y.kp)),
      Real("servo", "ki_y", H2R_M(servo.gains_y.ki)),
      Real("servo", "kd_y", H2R_M(servo.gains_y.kd)),
      Real("servo", "integral_clamp_y", H2R_M(servo.gains_y.integral_clamp)),
      Real("servo", "velocity_clamp_y", H2R_M(servo.gains_y.output_clamp)),
      Real("servo", "kp_yaw", H2R_M(servo.gains_yaw.kp)),
      Real("servo", "ki_yaw", H2R_M(servo.gains_yaw.ki)),
      Real("servo", "kd_yaw", H2R_M(servo.gains_yaw.kd)),
      Real("servo", "integral_clamp_yaw", H2R_M(servo.gains_yaw.integral_clamp)),
      Real("servo", "velocity_clamp_yaw", H2R_M(servo.gains_yaw.output_clamp)),

      Real("scenario", "goal_x", H2R_M(scenario.goal.x)),
      Real("scenario", "goal_y", H2R_M(scenario.goal.y)),
      Real("scenario", "goal_yaw_deg", H2R_M(scenario.goal.yaw), kDegree),
      Real("scenario", "start_x", H2R_M(scenario.start.x)),
      Real("scenario", "start_y", H2R_M(scenario.start.y)),
      Real("scenario", "start_yaw_deg", H2R_M(scenario.start.yaw), kDegree),
      Real("scenario", "max_offset", H2R_M(scenario.max_offset)),
      Real("scenario", "max_yaw_offset_deg", H2R_M(scenario.max_yaw_offset), kDegree),
      Integer("scenario", "field_seed", H2R_M(scenario.field_seed)),

      Integer("sweep", "trials", H2R_M(sweep_trials)),

      Real("augmentation", "clip_distance", H2R_M(depth.augment.clip_distance)),
      Real("augmentation", "clip_range_lower", H2R_M(depth.augment.clip_range_lower)),
      Real("augmentation", "clip_range_upper", H2R_M(depth.augment.clip_range_upper)),
      Real("augmentation", "noise_sigma", H2R_M(depth.augment.noise_sigma)),
      Real("augmentation", "blur_sigma", H2R_M(depth.augment.blur_sigma)),
      Real("augmentation", "dropout_fraction", H2R_M(depth.augment.dropout_fraction)),
      Real("augmentation", "mixup_alpha", H2R_M(depth.augment.mixup_alpha)),
      Integer("augmentation", "histogram_bins", H2R_M(depth.histogram_bins)),
      Text("augmentation", "dataset", H2R_M(depth.dataset)),

      Real("reward", "k1", H2R_M(reward.reward.k1)),
      Real("reward", "k2", H2R_M(reward.reward.k2)),
      Real("reward", "lambda", H2R_M(reward.reward.lambda)),
      Integer("reward", "n_num", H2R_M(reward.reward.n_num)),
      Real("reward", "w_chain", H2R_M(reward.reward.w_chain)),
      Real("reward", "w_obj", H2R_M(reward.reward.w_obj)),
      Real("reward", "termination_threshold", H2R_M(reward.termination_threshold)),
      Text("reward", "target_object", H2R_M(reward.target_object)),
      Text("reward", "trajectory", H2R_M(trajectory_path)),
      Text("reward", "rollout", H2R_M(rollout_path)),

      Integer("dagger", "epochs", H2R_M(dagger.epochs)),
      Integer("dagger", "episodes_per_epoch", H2R_M(dagger.episodes_per_epoch)),
      Real("dagger", "p0", H2R_M(dagger.p0)),
      Real("dagger", "decay", H2R_M(dagger.decay)),
      Flag("dagger", "decay_per_epoch", H2R_M(dagger.decay_per_epoch)),
      Integer("dagger", "buffer_capacity", H2R_M(dagger.buffer_capacity)),
      Real("dagger", "proprio_noise", H2R_M(dagger.proprio_noise)),
      Integer("dagger", "probe_states", H2R_M(dagger.probe_states)),
      Integer("dagger", "horizon", H2R_M(task.horizon)),
      Real("dagger", "dt", H2R_M(task.dt)),
      Real("dagger", "action_bound", H2R_M(task.action_bound)),
      Real("dagger", "expert_gain", H2R_M(task.expert_gain)),
      Real("dagger", "extent", H2R_M(task.extent)),

      Integer("hybrid", "dof", H2R_M(hybrid.dof)),
      Integer("hybrid", "steps", H2R_M(hybrid.steps)),
      Real("hybrid", "dt", H2R_M(hybrid.dt)),
      Real("hybrid", "tau_sim", H2R_M(hybrid.tau_sim)),
      Real("hybrid", "tau_real", H2R_M(hybrid.tau_real)),
      Real("hybrid", "joint_limit", H2R_M(hybrid.joint_limit)),
      Real("hybrid", "amplitude", H2R_M(hybrid.amplitude)),
      Real("hybrid", "max_delta", H2R_M(hybrid.max_delta)),
  };
  return fields;
}

#undef H2R_M

const Field& Lookup(std::string_view section, std::string_view key) {
  for (const Field& f : Fields()) {
    if (f.section == section && f.key == key) return f;
  }
  throw ConfigError(fmt::format("unknown config key [{}] {}", section, key));
}

void Assign(ExperimentConfig& cfg, std::string_view section, std::string_view key,
            std::string_view value) {
  const Field& f = Lookup(section, key);
  try {
    f.set(cfg, Trim(value));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

void ApplyOverrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const size_t eq = o.find('=');
    const size_t dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError(fmt::format("override '{}' is not section.key=value", o));
    }
    Assign(cfg, Trim(std::string_view(o).substr(0, dot)),
           Trim(std::string_view(o).substr(dot + 1, eq - dot - 1)),
           std::string_view(o).substr(eq + 1));
  }
}

void RequireFile(const std::string& path, std::string_view what) {
  if (!path.empty() && !std::filesystem::is_regular_file(path)) {
    throw ConfigError(fmt::format("{} file '{}' does not exist", what, path));
  }
}

ExperimentConfig Finish(ExperimentConfig cfg) {
  // The servo knows the camera mount the world was built with.
  cfg.servo.extrinsic = cfg.world.mount;
  cfg.world.seed = cfg.scenario.field_seed;
  cfg.depth.augment.seed = cfg.seed;
  cfg.Validate();
  return cfg;
}

}  // namespace

ExperimentConfig ExperimentConfig::Defaults() {
  ExperimentConfig cfg;
  cfg.depth.augment.noise_sigma = 0.005;
  return Finish(std::move(cfg));
}

void ExperimentConfig::Validate() const {
  try {
    world.Validate();
    servo.Validate();
    depth.augment.Validate();
    reward.reward.Validate();
    task.Validate();
    dagger.Validate();
    hybrid.Validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (out_dir.empty()) throw ConfigError("experiment.out_dir must not be empty");
  if (!(scenario.max_offset >= 0.0 && scenario.max_yaw_offset >= 0.0)) {
    throw ConfigError("scenario offsets must be >= 0");
  }
  if (sweep_trials < 1) throw ConfigError("sweep.trials must be >= 1");
  if (depth.histogram_bins < 1) throw ConfigError("augmentation.histogram_bins must be >= 1");
  if (!(reward.termination_threshold > 0.0)) {
    throw ConfigError("reward.termination_threshold must be > 0");
  }
  RequireFile(depth.dataset, "augmentation.dataset");
  RequireFile(trajectory_path, "reward.trajectory");
  RequireFile(rollout_path, "reward.rollout");
}

ExperimentConfig ParseConfig(std::istream& in, const std::vector<std::string>& overrides) {
  // read_ini drops sections without keys, so headers are checked on the raw text.
  const std::string text(std::istreambuf_iterator<char>(in), {});
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const std::string_view t = Trim(line);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
    const std::string_view name = Trim(t.substr(1, t.size() - 2));
    if (std::none_of(Fields().begin(), Fields().end(),
                     [&](const Field& f) { return f.section == name; })) {
      throw ConfigError(fmt::format("unknown config section [{}]", name));
    }
  }
  pt::ptree tree;
  try {
    std::istringstream body(text);
    pt::read_ini(body, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  ExperimentConfig cfg = ExperimentConfig::Defaults();
  for (const auto& [section, body] : tree) {
    const bool known = std::any_of(Fields().begin(), Fields().end(),
                                   [&](const Field& f) { return f.section == section; });
    if (!known) throw ConfigError(fmt::format("unknown config section [{}]", section));
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("config key '{}' is outside any [section]", section));
    }
    for (const auto& [key, value] : body) Assign(cfg, section, key, value.data());
  }
  ApplyOverrides(cfg, overrides);
  return Finish(std::move(cfg));
}

ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  return ParseConfig(in, overrides);
}

ExperimentConfig ConfigFromOverrides(const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = ExperimentConfig::Defaults();
  ApplyOverrides(cfg, overrides);
  return Finish(std::move(cfg));
}

void WriteConfig(const ExperimentConfig& cfg, std::ostream& out) {
  std::string section;
  for (const Field& f : Fields()) {
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
}

}  // namespace h2r
