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

#include "h2r/simworld.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "h2r/errors.h"
#include "h2r/random.h"

namespace h2r {
namespace {

constexpr int kFieldAttempts = 8;
constexpr int kMinLandmarks = 12;

RigidTransform BaseInWorld(const BaseState& b) {
  return {UnitQuaternion::FromYaw(b.yaw), Vec3(b.x, b.y, 0.0)};
}

bool InImage(const PixelPoint& p, const WorldConfig& cfg) {
  return p.u >= 0.0 && p.v >= 0.0 && p.u < cfg.image_width && p.v < cfg.image_height;
}

// Camera-frame point if the landmark is inside the view frustum.
std::optional<Vec3> Visible(const RigidTransform& world_to_camera, const Vec3& landmark,
                            const WorldConfig& cfg) {
  const Vec3 c = world_to_camera.Apply(landmark);
  if (c.z() < cfg.near_clip || c.z() > cfg.far_clip) return std::nullopt;
  if (!InImage(Project(cfg.camera, c), cfg)) return std::nullopt;
  return c;
}

}  // namespace

RigidTransform WorldConfig::DefaultMount() {
  // Optical axes in base coordinates: x right, y down, z forward.
  Mat3 r;
  r.col(0) = Vec3(0.0, -1.0, 0.0);
  r.col(1) = Vec3(0.0, 0.0, -1.0);
  r.col(2) = Vec3(1.0, 0.0, 0.0);
  return {UnitQuaternion(r), Vec3(0.2, 0.0, 0.5)};
}

void WorldConfig::Validate() const {
  if (!(pixel_noise_sigma >= 0.0 && depth_noise_sigma >= 0.0 && actuation_noise_sigma >= 0.0 &&
        coupling_gain >= 0.0)) {
    throw ConfigError("world noise magnitudes must be >= 0");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw ConfigError("outlier_fraction must be in [0, 1)");
  }
  if (num_landmarks < kMinLandmarks) {
    throw ConfigError(fmt::format("num_landmarks must be >= {}", kMinLandmarks));
  }
  if (!((field_upper - field_lower).minCoeff() >= 0.0)) {
    throw ConfigError("landmark volume bounds are inverted");
  }
  if (image_width < 1 || image_height < 1) throw ConfigError("image size must be positive");
  if (!(camera.fx > 0.0 && camera.fy > 0.0)) throw ConfigError("focal lengths must be > 0");
  if (!(near_clip > 0.0 && far_clip > near_clip)) throw ConfigError("need 0 < near < far");
  if (!(max_depth > 0.0)) throw ConfigError("max_depth must be > 0");
}

double PlanarityMeasure(const std::vector<Vec3>& points) {
  if (points.size() < 3) return 0.0;
  Eigen::MatrixXd m(points.size(), 3);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  for (size_t i = 0; i < points.size(); ++i) m.row(i) = (points[i] - mean).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Vec3 s = svd.singularValues();
  return s[0] > 0.0 ? s[2] / s[0] : 0.0;
}

LandmarkField GenerateField(const WorldConfig& cfg) {
  cfg.Validate();
  std::mt19937_64 rng(DeriveSeed(cfg.seed, 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < kFieldAttempts; ++attempt) {
    LandmarkField field;
    field.points.reserve(cfg.num_landmarks);
    for (int i = 0; i < cfg.num_landmarks; ++i) {
      const Vec3 t(u(rng), u(rng), u(rng));
      field.points.push_back(cfg.field_lower +
                             (cfg.field_upper - cfg.field_lower).cwiseProduct(t));
    }
    if (PlanarityMeasure(field.points) > kCoplanarTolerance) return field;
  }
  throw DegenerateField(
      fmt::format("landmark field stayed coplanar after {} attempts", kFieldAttempts));
}

RigidTransform CameraInWorld(const BaseState& base, const WorldConfig& cfg) {
  return Compose(BaseInWorld(base), cfg.mount);
}

Observation Observe(const BaseState& base, const BaseState& goal, const LandmarkField& field,
                    const WorldConfig& cfg, uint64_t seed, bool render_depth) {
  const RigidTransform to_current = CameraInWorld(base, cfg).Inverse();
  const RigidTransform to_goal = CameraInWorld(goal, cfg).Inverse();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Observation obs;
  std::vector<Vec3> current_points;
  for (size_t i = 0; i < field.points.size(); ++i) {
    const auto c = Visible(to_current, field.points[i], cfg);
    const auto g = Visible(to_goal, field.points[i], cfg);
    if (!c || !g) continue;
    PixelPoint px = Project(cfg.camera, *g);
    Vec3 point = *c;
    if (cfg.pixel_noise_sigma > 0.0) {
      px.u += cfg.pixel_noise_sigma * unit(rng);
      px.v += cfg.pixel_noise_sigma * unit(rng);
    }
    if (cfg.depth_noise_sigma > 0.0) {
      point += point.normalized() * (cfg.depth_noise_sigma * unit(rng));
    }
    obs.correspondences.push_back({px, point});
    obs.landmark_index.push_back(static_cast<int>(i));
  }
  if (obs.correspondences.empty()) {
    throw NoVisibleLandmarks("no landmark is visible from both the current and the goal pose");
  }

  const size_t n = obs.correspondences.size();
  obs.is_outlier.assign(n, false);
  const auto n_outliers = static_cast<size_t>(std::llround(cfg.outlier_fraction * n));
  if (n_outliers > 0) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::uniform_real_distribution<double> u(0.0, cfg.image_width);
    std::uniform_real_distribution<double> v(0.0, cfg.image_height);
    for (size_t k = 0; k < n_outliers; ++k) {
      const size_t j = std::uniform_int_distribution<size_t>(k, n - 1)(rng);
      std::swap(order[k], order[j]);
      const size_t idx = order[k];
      obs.correspondences[idx].goal_pixel = {u(rng), v(rng)};
      obs.is_outlier[idx] = true;
    }
  }

  if (render_depth) {
    DepthImage img = DepthImage::Filled(cfg.image_width, cfg.image_height, cfg.max_depth,
                                        cfg.max_depth);
    for (const Correspondence& c : obs.correspondences) {
      const Vec3& p = c.current_point;
      if (!(p.z() > 0.0)) continue;
      const PixelPoint px = Project(cfg.camera, p);
      const int x = static_cast<int>(std::floor(px.u));
      const int y = static_cast<int>(std::floor(px.v));
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      img.at(x, y) = std::min(img.at(x, y), std::min(p.z(), cfg.max_depth));
    }
    obs.depth = std::move(img);
  }
  return obs;
}

BaseState StepBase(const BaseState& state, const VelocityCommand& v, double dt,
                   const WorldConfig& cfg, uint64_t seed) {
  if (!(dt > 0.0)) throw ValidationError("step_base needs dt > 0");
  double vx = v.v_x;
  double vy = v.v_y;
  double w = v.v_yaw;
  if (cfg.actuation_noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, cfg.actuation_noise_sigma);
    vx *= 1.0 + n(rng);
    vy *= 1.0 + n(rng);
    w *= 1.0 + n(rng);
  }
  const double mid = state.yaw + 0.5 * w * dt;
  const double c = std::cos(mid);
  const double s = std::sin(mid);
  double bx = vx * dt;
  double by = vy * dt;

  BaseState out = state;
  if (v.v_x != 0.0 || v.v_y != 0.0) {
    const double heading = std::atan2(v.v_y, v.v_x);
    if (state.wheel_heading && cfg.coupling_gain > 0.0) {
      const double swing = WrapAngle(heading - *state.wheel_heading);
      // Slip perpendicular to the new drive direction, toward the swing.
      const double slip = cfg.coupling_gain * std::abs(swing) * std::hypot(bx, by);
      const double side = swing >= 0.0 ? 1.0 : -1.0;
      bx += -std::sin(heading) * slip * side;
      by += std::cos(heading) * slip * side;
    }
    out.wheel_heading = heading;
  }
  out.x = state.x + c * bx - s * by;
  out.y = state.y + s * bx + c * by;
  out.yaw = WrapAngle(state.yaw + w * dt);
  return out;
}

GroundTruthError GroundTruthErrorOf(const BaseState& base, const BaseState& goal) {
  return {std::hypot(base.x - goal.x, base.y - goal.y), std::abs(WrapAngle(base.yaw - goal.yaw))};
}

SimServoWorld::SimServoWorld(WorldConfig cfg, LandmarkField field, BaseState start,
                             BaseState goal, uint64_t seed)
    : cfg_(std::move(cfg)),
      field_(std::move(field)),
      state_(start),
      goal_(goal),
      seed_(seed) {
  cfg_.Validate();
}

CorrespondenceSet SimServoWorld::Acquire() {
  const uint64_t stream = 2 * acquisitions_++;
  try {
    return Observe(state_, goal_, field_, cfg_, DeriveSeed(seed_, stream), false).correspondences;
  } catch (const NoVisibleLandmarks&) {
    return {};
  }
}

void SimServoWorld::Command(const VelocityCommand& v, double dt) {
  const uint64_t stream = 2 * commands_++ + 1;
  state_ = StepBase(state_, v, dt, cfg_, DeriveSeed(seed_, stream));
}

std::optional<GroundTruthError> SimServoWorld::GroundTruth() const {
  return GroundTruthErrorOf(state_, goal_);
}

GroundTruthError RunOpenLoop(SimServoWorld& world, const ServoConfig& cfg, uint64_t seed) {
  cfg.Validate();
  const PnPEstimate est = SolvePnPRansac(world.Acquire(), world.intrinsics(), cfg.pnp, seed);
  const PoseError err = ExtractPoseErrors(est.transform(), cfg.extrinsic);
  const auto execute = [&](double distance, double speed_limit, auto make_command) {
    const double step = speed_limit * cfg.dt;
    const int full = static_cast<int>(std::floor(std::abs(distance) / step));
    const double sign = distance < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < full; ++i) world.Command(make_command(sign * speed_limit), cfg.dt);
    const double rest = distance - sign * full * step;
    if (rest != 0.0) world.Command(make_command(rest / cfg.dt), cfg.dt);
  };
  execute(err.e_x, cfg.gains_x.output_clamp, [](double v) { return VelocityCommand{v, 0, 0}; });
  execute(err.e_y, cfg.gains_y.output_clamp, [](double v) { return VelocityCommand{0, v, 0}; });
  execute(err.e_yaw, cfg.gains_yaw.output_clamp,
          [](double v) { return VelocityCommand{0, 0, v}; });
  return *world.GroundTruth();
}

KinematicChain KinematicChain::Uniform(int dof, double tau, double lower, double upper) {
  KinematicChain c;
  c.q.assign(dof, 0.0);
  c.tau.assign(dof, tau);
  c.lower.assign(dof, lower);
  c.upper.assign(dof, upper);
  c.Validate();
  return c;
}

void KinematicChain::Validate() const {
  const size_t n = q.size();
  if (tau.size() != n || lower.size() != n || upper.size() != n) {
    throw DimensionMismatch("kinematic chain vectors differ in length");
  }
  for (size_t j = 0; j < n; ++j) {
    if (!(tau[j] > 0.0)) throw ValidationError(fmt::format("joint {}: tau must be > 0", j));
    if (!(lower[j] <= upper[j])) throw ValidationError(fmt::format("joint {}: lower > upper", j));
    if (!(q[j] >= lower[j] && q[j] <= upper[j])) {
      throw ValidationError(fmt::format("joint {}: q = {} outside limits", j, q[j]));
    }
  }
}

ChainStepResult ChainStep(const KinematicChain& chain, const std::vector<double>& target,
                          double dt) {
  if (target.size() != chain.dof()) {
    throw DimensionMismatch(
        fmt::format("target has {} joints, chain has {}", target.size(), chain.dof()));
  }
  if (!(dt > 0.0)) throw ValidationError("chain_step needs dt > 0");
  ChainStepResult out{chain, false};
  for (size_t j = 0; j < chain.dof(); ++j) {
    const double a = std::min(1.0, dt / chain.tau[j]);
    const double next = a == 1.0 ? target[j] : chain.q[j] + a * (target[j] - chain.q[j]);
    const double clamped = std::clamp(next, chain.lower[j], chain.upper[j]);
    out.joint_limit |= clamped != next;
    out.chain.q[j] = clamped;
  }
  return out;
}

std::vector<TabletopScene> TabletopSuite(uint64_t seed, int count) {
  std::vector<TabletopScene> suite;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TabletopScene scene;
    // Camera above the near table edge looking down and forward.
    const double pitch = 0.9 + 0.4 * u(rng);  // below the horizon, rad
    const double height = 0.55 + 0.15 * u(rng);
    const Mat3 level = WorldConfig::DefaultMount().rotation.Matrix();
    const Mat3 tilt = Eigen::AngleAxisd(pitch, Vec3::UnitY()).toRotationMatrix();
    scene.camera = {UnitQuaternion(Mat3(tilt * level)),
                    Vec3(-0.55 + 0.1 * u(rng), 0.1 * (u(rng) - 0.5), height)};
    const int boxes = 2 + static_cast<int>(u(rng) * 3.0);
    for (int b = 0; b < boxes; ++b) {
      SceneBox box;
      box.half_extents = Vec3(0.03 + 0.07 * u(rng), 0.03 + 0.07 * u(rng), 0.02 + 0.1 * u(rng));
      box.center = Vec3(-0.3 + 0.6 * u(rng), -0.25 + 0.5 * u(rng), box.half_extents.z());
      box.yaw = M_PI * u(rng);
      scene.boxes.push_back(box);
    }
    suite.push_back(std::move(scene));
  }
  return suite;
}

namespace {

// Slab test of a ray against an axis-aligned box; returns the entry parameter.
std::optional<double> HitBox(const Vec3& origin, const Vec3& dir, const SceneBox& box) {
  const UnitQuaternion to_box = UnitQuaternion::FromYaw(-box.yaw);
  const Vec3 o = to_box.Rotate(origin - box.center);
  const Vec3 d = to_box.Rotate(dir);
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (std::abs(o[a]) > box.half_extents[a]) return std::nullopt;
      continue;
    }
    double lo = (-box.half_extents[a] - o[a]) / d[a];
    double hi = (box.half_extents[a] - o[a]) / d[a];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::nullopt;
  }
  return t0 > 0.0 ? std::optional<double>(t0) : std::nullopt;
}

}  // namespace

DepthImage RenderTabletop(const TabletopScene& scene, const SceneCamera& cam) {
  DepthImage img = DepthImage::Filled(cam.width, cam.height, cam.max_depth, cam.max_depth);
  const Mat3 r = scene.camera.rotation.Matrix();
  const Vec3& origin = scene.camera.translation;
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      // Ray with unit camera-frame z, so the hit parameter is the depth.
      const Vec3 ray((x + 0.5 - cam.k.cx) / cam.k.fx, (y + 0.5 - cam.k.cy) / cam.k.fy, 1.0);
      const Vec3 dir = r * ray;
      double best = std::numeric_limits<double>::infinity();
      if (dir.z() < 0.0) {
        const double t_table = -origin.z() / dir.z();
        const Vec3 hit = origin + t_table * dir;
        if (std::abs(hit.x()) <= scene.table_half_x && std::abs(hit.y()) <= scene.table_half_y) {
          best = t_table;
        } else {
          best = (scene.floor_z - origin.z()) / dir.z();
        }
      }
      for (const SceneBox& box : scene.boxes) {
        if (const auto t = HitBox(origin, dir, box); t && *t < best) best = *t;
      }
      img.at(x, y) = std::min(best, cam.max_depth);
    }
  }
  return img;
}

DepthImage SyntheticRealCapture(const DepthImage& clean, const RealCaptureConfig& cfg,
                                uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DepthImage out = clean;
  for (int y = 0; y < clean.height; ++y) {
    for (int x = 0; x < clean.width; ++x) {
      const double z = clean.at(x, y);
      // Neighbour with the largest depth jump.
      double far = z;
      const auto consider = [&](int nx, int ny) {
        const double n = clean.at(nx, ny);
        if (std::abs(n - z) > std::abs(far - z)) far = n;
      };
      if (x + 1 < clean.width) consider(x + 1, y);
      if (y + 1 < clean.height) consider(x, y + 1);
      if (x > 0) consider(x - 1, y);
      if (y > 0) consider(x, y - 1);
      const bool edge = std::abs(far - z) > cfg.edge_jump;
      const double noise = (cfg.noise_base + cfg.noise_quadratic * z * z) * unit(rng);
      const double drop = u(rng);
      const double mix = u(rng);
      if (z >= clean.max_depth || (edge && drop < cfg.edge_dropout) ||
          (!edge && drop < cfg.missing_fraction)) {
        out.at(x, y) = 0.0;
      } else {
        // Surviving edge pixels read a blend of both surfaces.
        const double seen = edge ? z + mix * (far - z) : z;
        out.at(x, y) = std::clamp(seen + noise, 0.0, clean.max_depth);
      }
    }
  }
  return out;
}

AlignmentReport SceneSuiteAlignment(uint64_t seed, int scenes, const AugmentConfig& aug,
                                    const RealCaptureConfig& real, int bins) {
  if (scenes < 1) throw ValidationError("scene suite needs at least one scene");
  aug.Validate();
  const SceneCamera cam;
  AlignmentReport report;
  report.raw_hist.assign(bins, 0.0);
  report.augmented_hist.assign(bins, 0.0);
  report.real_hist.assign(bins, 0.0);
  const auto accumulate = [&](std::vector<double>& into, const DepthImage& img) {
    const std::vector<double> h = Histogram(img, bins);
    for (int b = 0; b < bins; ++b) into[b] += h[b] / scenes;
  };
  const std::vector<TabletopScene> suite = TabletopSuite(seed, scenes);
  for (int i = 0; i < scenes; ++i) {
    const DepthImage clean = RenderTabletop(suite[i], cam);
    AugmentConfig per_scene = aug;
    per_scene.seed = DeriveSeed(aug.seed, i);
    accumulate(report.raw_hist, ClipDepth(clean, aug.clip_distance));
    accumulate(report.augmented_hist, SimPipeline(clean, per_scene));
    const DepthImage capture = SyntheticRealCapture(clean, real, DeriveSeed(seed, 1000 + i));
    accumulate(report.real_hist, RealPipeline(capture, aug.clip_distance));
  }
  report.kl_raw = KlDivergence(report.raw_hist, report.real_hist);
  report.kl_augmented = KlDivergence(report.augmented_hist, report.real_hist);
  return report;
}

}  // namespace h2r
