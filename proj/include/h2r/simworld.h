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

#ifndef H2R_SIMWORLD_H_
#define H2R_SIMWORLD_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "h2r/depth_aug.h"
#include "h2r/geometry.h"
#include "h2r/pnp.h"
#include "h2r/servo.h"

namespace h2r {

struct WorldConfig {
  double pixel_noise_sigma = 1.0;       // px
  double outlier_fraction = 0.1;
  double depth_noise_sigma = 0.005;     // m, along the viewing ray
  double actuation_noise_sigma = 0.02;  // relative, per axis
  /// Lateral slip while the wheels swing to a new drive direction, as a
  /// fraction of the distance covered per radian of swing.
  double coupling_gain = 0.4;

  int num_landmarks = 300;
  Vec3 field_lower{1.5, -2.5, 0.0};
  Vec3 field_upper{3.5, 2.5, 1.0};

  CameraIntrinsics camera{300.0, 300.0, 320.0, 240.0};
  int image_width = 640;
  int image_height = 480;
  double near_clip = 0.1;
  double far_clip = 10.0;
  double max_depth = 6.0;  // depth-image backdrop
  /// Camera pose on the base: maps camera-frame points into the base frame.
  RigidTransform mount = DefaultMount();

  uint64_t seed = 0;

  void Validate() const;
  /// Forward-looking camera 0.2 m ahead of the base centre, 0.5 m up.
  static RigidTransform DefaultMount();
};

struct LandmarkField {
  std::vector<Vec3> points;
};

/// Planar base pose. The wheel drive direction is remembered so that the
/// coupling slip can be applied when it changes.
struct BaseState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  std::optional<double> wheel_heading;
};

/// Seeded uniform landmarks inside the configured box, regenerated a few
/// times if they come out (near) coplanar. Throws DegenerateField.
LandmarkField GenerateField(const WorldConfig& cfg);

/// Smallest singular value of the centred point cloud relative to the largest.
double PlanarityMeasure(const std::vector<Vec3>& points);
inline constexpr double kCoplanarTolerance = 1e-3;

RigidTransform CameraInWorld(const BaseState& base, const WorldConfig& cfg);

struct Observation {
  CorrespondenceSet correspondences;
  std::vector<bool> is_outlier;
  std::vector<int> landmark_index;  // source landmark per correspondence
  std::optional<DepthImage> depth;  // current view
};

/// Matcher oracle. Throws NoVisibleLandmarks.
Observation Observe(const BaseState& base, const BaseState& goal, const LandmarkField& field,
                    const WorldConfig& cfg, uint64_t seed, bool render_depth = true);

/// Body-frame command integrated at the mid-interval heading, so a noise-free
/// step is undone exactly by the negated command.
BaseState StepBase(const BaseState& state, const VelocityCommand& v, double dt,
                   const WorldConfig& cfg, uint64_t seed);

GroundTruthError GroundTruthErrorOf(const BaseState& base, const BaseState& goal);

/// Closed-loop harness world around one landmark field.
class SimServoWorld : public ServoWorld {
 public:
  SimServoWorld(WorldConfig cfg, LandmarkField field, BaseState start, BaseState goal,
                uint64_t seed);

  const CameraIntrinsics& intrinsics() const override { return cfg_.camera; }
  CorrespondenceSet Acquire() override;
  void Command(const VelocityCommand& v, double dt) override;
  std::optional<GroundTruthError> GroundTruth() const override;

  const BaseState& state() const { return state_; }
  const BaseState& goal() const { return goal_; }

 private:
  WorldConfig cfg_;
  LandmarkField field_;
  BaseState state_;
  BaseState goal_;
  uint64_t seed_;
  uint64_t acquisitions_ = 0;
  uint64_t commands_ = 0;
};

/// One pose estimate, then timed moves along x, y and yaw at the velocity
/// clamps with no further feedback. Returns the final ground-truth error.
GroundTruthError RunOpenLoop(SimServoWorld& world, const ServoConfig& cfg, uint64_t seed);

// First-order joint chains for the hybrid-control harness.
struct KinematicChain {
  std::vector<double> q;
  std::vector<double> tau;  // s
  std::vector<double> lower;
  std::vector<double> upper;

  static KinematicChain Uniform(int dof, double tau, double lower, double upper);
  size_t dof() const { return q.size(); }
  void Validate() const;
};

struct ChainStepResult {
  KinematicChain chain;
  bool joint_limit = false;  // a joint was clamped
};

/// q <- q + a (target - q) with a = min(1, dt / tau), clamped to limits.
ChainStepResult ChainStep(const KinematicChain& chain, const std::vector<double>& target,
                          double dt);

// Tabletop depth scenes for the sim-vs-real histogram comparison.
struct SceneBox {
  Vec3 center;        // world, table surface at z = 0
  Vec3 half_extents;
  double yaw = 0.0;
};

struct TabletopScene {
  RigidTransform camera;  // camera-frame points to world
  double table_half_x = 0.6;
  double table_half_y = 0.4;
  double floor_z = -0.75;
  std::vector<SceneBox> boxes;
};

struct SceneCamera {
  CameraIntrinsics k{150.0, 150.0, 80.0, 60.0};
  int width = 160;
  int height = 120;
  double max_depth = 4.0;
};

/// Seeded scenes: a table with a few boxes seen from above at varying pitch.
std::vector<TabletopScene> TabletopSuite(uint64_t seed, int count);

/// Ray-cast camera-frame z of the nearest surface; max_depth where nothing is hit.
DepthImage RenderTabletop(const TabletopScene& scene, const SceneCamera& cam);

/// Structured-light style degradations of a clean render.
struct RealCaptureConfig {
  double noise_base = 0.002;       // m
  double noise_quadratic = 0.004;  // m per m^2 of depth
  double edge_jump = 0.03;         // m; larger neighbour jumps count as edges
  double edge_dropout = 0.6;       // chance an edge pixel reads as missing
  double missing_fraction = 0.005;  // random missing pixels elsewhere
};

/// Missing readings come back as 0, like a real sensor.
DepthImage SyntheticRealCapture(const DepthImage& clean, const RealCaptureConfig& cfg,
                                uint64_t seed);

struct AlignmentReport {
  double kl_raw = 0.0;        // KL(clip-only sim || real)
  double kl_augmented = 0.0;  // KL(augmented sim || real)
  std::vector<double> raw_hist, augmented_hist, real_hist;  // pooled over the suite
};

/// Histograms of the suite rendered three ways: clip-only, through the sim
/// augmentation pipeline, and as a degraded capture through the real pipeline.
AlignmentReport SceneSuiteAlignment(uint64_t seed, int scenes, const AugmentConfig& aug,
                                    const RealCaptureConfig& real, int bins);

}  // namespace h2r

#endif  // H2R_SIMWORLD_H_
