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

#ifndef H2R_PNP_H_
#define H2R_PNP_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "h2r/geometry.h"

namespace h2r {

/// A goal-image pixel matched to a 3D point expressed in the current camera
/// frame. The pose being estimated maps current-camera points into the goal
/// camera: goal_pixel ~ K (R X + t).
struct Correspondence {
  PixelPoint goal_pixel;
  Vec3 current_point = Vec3::UnitZ();
};

using CorrespondenceSet = std::vector<Correspondence>;

struct PnPEstimate {
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();
  std::vector<bool> inlier_mask;
  double mean_reprojection_error = 0.0;  // px^2, over inliers
  int iterations = 0;                    // refinement iterations taken

  RigidTransform transform() const { return {rotation, translation}; }
  int inlier_count() const;
};

struct PnPOptions {
  int ransac_iterations = 200;
  double ransac_confidence = 0.9999;
  double inlier_threshold_px = 3.0;
  int refine_max_iterations = 20;
  double refine_tolerance = 1e-10;
};

/// Mean over correspondences of |project(K, R X + t) - goal_pixel|^2.
/// Throws PointBehindCamera.
double ReprojectionError(const CameraIntrinsics& k, const RigidTransform& pose,
                         std::span<const Correspondence> corrs);

/// Same, restricted to entries whose mask bit is set (all when mask is empty).
double ReprojectionError(const CameraIntrinsics& k, const RigidTransform& pose,
                         std::span<const Correspondence> corrs, const std::vector<bool>& mask);

/// 2x6 Jacobian of the pixel residual with respect to a left rotation
/// increment w and a translation increment dt: R <- Exp(w) R, t <- t + dt.
Eigen::Matrix<double, 2, 6> ReprojectionJacobian(const CameraIntrinsics& k,
                                                 const RigidTransform& pose, const Vec3& point);

/// Every pose consistent with three bearing/point pairs (Grunert's quartic,
/// roots polished by Newton steps on the law-of-cosines system).
std::vector<RigidTransform> SolveP3P(const std::array<Vec3, 3>& bearings,
                                     const std::array<Vec3, 3>& points);

/// RANSAC over 4-point minimal samples (P3P on three, the fourth picks the
/// root), followed by refinement on the consensus set. Deterministic per seed.
/// Throws TooFewCorrespondences, DegenerateGeometry.
PnPEstimate SolvePnPRansac(std::span<const Correspondence> corrs, const CameraIntrinsics& k,
                           const PnPOptions& opts, uint64_t seed);

/// Gauss-Newton on the inliers of `initial` with backtracking, so the mean
/// reprojection error never increases. Throws SingularNormalEquations after
/// one damped retry.
PnPEstimate RefinePnP(std::span<const Correspondence> corrs, const CameraIntrinsics& k,
                      const PnPEstimate& initial, const PnPOptions& opts);

}  // namespace h2r

#endif  // H2R_PNP_H_
