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

#include "h2r/pnp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <fmt/format.h>

#include "h2r/errors.h"

namespace h2r {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMinimalSample = 4;

Vec3 Bearing(const CameraIntrinsics& k, const PixelPoint& px) {
  return Vec3((px.u - k.cx) / k.fx, (px.v - k.cy) / k.fy, 1.0).normalized();
}

// Squared pixel distance, or +inf for points at or behind the camera.
double SquaredResidual(const CameraIntrinsics& k, const RigidTransform& pose,
                       const Correspondence& c) {
  const Vec3 x = pose.Apply(c.current_point);
  if (!(x.z() > 0.0)) return kInf;
  const PixelPoint p = Project(k, x);
  const double du = p.u - c.goal_pixel.u;
  const double dv = p.v - c.goal_pixel.v;
  return du * du + dv * dv;
}

// Real roots of a4 x^4 + ... + a0 via the companion matrix.
std::vector<double> QuarticRealRoots(const std::array<double, 5>& a) {
  std::vector<double> roots;
  if (std::abs(a[4]) < 1e-14 * (std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]) + std::abs(a[3]))) {
    return roots;
  }
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) companion(0, i) = -a[3 - i] / a[4];
  companion(1, 0) = companion(2, 1) = companion(3, 2) = 1.0;
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
  for (int i = 0; i < 4; ++i) {
    const std::complex<double> r = solver.eigenvalues()[i];
    if (std::abs(r.imag()) <= 1e-3 * (1.0 + std::abs(r.real()))) {
      double x = r.real();
      // Newton polish on the polynomial itself.
      for (int it = 0; it < 4; ++it) {
        const double f = (((a[4] * x + a[3]) * x + a[2]) * x + a[1]) * x + a[0];
        const double df = ((4.0 * a[4] * x + 3.0 * a[3]) * x + 2.0 * a[2]) * x + a[1];
        if (df == 0.0) break;
        x -= f / df;
      }
      roots.push_back(x);
    }
  }
  return roots;
}

// Newton refinement of the three ray lengths on the law-of-cosines system.
bool PolishDistances(Vec3& s, double a2, double b2, double c2, double ca, double cb, double cg) {
  for (int it = 0; it < 8; ++it) {
    const Vec3 f(s[1] * s[1] + s[2] * s[2] - 2.0 * s[1] * s[2] * ca - a2,
                 s[0] * s[0] + s[2] * s[2] - 2.0 * s[0] * s[2] * cb - b2,
                 s[0] * s[0] + s[1] * s[1] - 2.0 * s[0] * s[1] * cg - c2);
    Mat3 j;
    j << 0.0, 2.0 * s[1] - 2.0 * s[2] * ca, 2.0 * s[2] - 2.0 * s[1] * ca,
         2.0 * s[0] - 2.0 * s[2] * cb, 0.0, 2.0 * s[2] - 2.0 * s[0] * cb,
         2.0 * s[0] - 2.0 * s[1] * cg, 2.0 * s[1] - 2.0 * s[0] * cg, 0.0;
    const Eigen::FullPivLU<Mat3> lu(j);
    if (!lu.isInvertible()) break;
    const Vec3 step = lu.solve(f);
    s -= step;
    if (step.norm() < 1e-15 * s.norm()) break;
  }
  const double scale = std::max({a2, b2, c2});
  const double r1 = s[1] * s[1] + s[2] * s[2] - 2.0 * s[1] * s[2] * ca - a2;
  const double r2 = s[0] * s[0] + s[2] * s[2] - 2.0 * s[0] * s[2] * cb - b2;
  const double r3 = s[0] * s[0] + s[1] * s[1] - 2.0 * s[0] * s[1] * cg - c2;
  return (s.array() > 0.0).all() &&
         std::max({std::abs(r1), std::abs(r2), std::abs(r3)}) < 1e-6 * scale;
}

bool SampleIsDegenerate(std::span<const Correspondence> corrs, const std::array<int, 4>& idx) {
  const Vec3& p0 = corrs[idx[0]].current_point;
  const Vec3& p1 = corrs[idx[1]].current_point;
  const Vec3& p2 = corrs[idx[2]].current_point;
  const Vec3 e1 = p1 - p0;
  const Vec3 e2 = p2 - p0;
  const double scale = e1.norm() * e2.norm();
  return scale < 1e-18 || e1.cross(e2).norm() < 1e-6 * scale;
}

struct Hypothesis {
  RigidTransform pose;
  int inliers = -1;
  double score = kInf;  // summed truncated residual, breaks inlier-count ties
};

Hypothesis Score(const CameraIntrinsics& k, const RigidTransform& pose,
                 std::span<const Correspondence> corrs, double threshold2) {
  Hypothesis h{pose, 0, 0.0};
  for (const Correspondence& c : corrs) {
    const double r2 = SquaredResidual(k, pose, c);
    if (r2 <= threshold2) {
      ++h.inliers;
      h.score += r2;
    } else {
      h.score += threshold2;
    }
  }
  return h;
}

std::vector<bool> InlierMask(const CameraIntrinsics& k, const RigidTransform& pose,
                             std::span<const Correspondence> corrs, double threshold2) {
  std::vector<bool> mask(corrs.size());
  for (size_t i = 0; i < corrs.size(); ++i) mask[i] = SquaredResidual(k, pose, corrs[i]) <= threshold2;
  return mask;
}

int RequiredIterations(double inlier_ratio, double confidence, int cap) {
  const double w4 = std::pow(inlier_ratio, kMinimalSample);
  if (w4 >= 1.0 - 1e-12) return 1;
  if (w4 <= 0.0) return cap;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - w4);
  return static_cast<int>(std::min<double>(cap, std::ceil(n)));
}

}  // namespace

int PnPEstimate::inlier_count() const {
  return static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

double ReprojectionError(const CameraIntrinsics& k, const RigidTransform& pose,
                         std::span<const Correspondence> corrs) {
  return ReprojectionError(k, pose, corrs, {});
}

double ReprojectionError(const CameraIntrinsics& k, const RigidTransform& pose,
                         std::span<const Correspondence> corrs, const std::vector<bool>& mask) {
  if (corrs.empty()) throw TooFewCorrespondences("reprojection error needs correspondences");
  double sum = 0.0;
  size_t used = 0;
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double r2 = SquaredResidual(k, pose, corrs[i]);
    if (r2 == kInf) {
      throw PointBehindCamera(fmt::format("correspondence {} lands behind the camera", i));
    }
    sum += r2;
    ++used;
  }
  if (used == 0) throw TooFewCorrespondences("no correspondence selected by the mask");
  return sum / static_cast<double>(used);
}

Eigen::Matrix<double, 2, 6> ReprojectionJacobian(const CameraIntrinsics& k,
                                                 const RigidTransform& pose, const Vec3& point) {
  const Vec3 rotated = pose.rotation.Rotate(point);
  const Vec3 x = rotated + pose.translation;
  const double iz = 1.0 / x.z();
  Eigen::Matrix<double, 2, 3> dproj;
  dproj << k.fx * iz, 0.0, -k.fx * x.x() * iz * iz,
           0.0, k.fy * iz, -k.fy * x.y() * iz * iz;
  Eigen::Matrix<double, 3, 6> dx;
  dx.leftCols<3>() = -Skew(rotated);
  dx.rightCols<3>() = Mat3::Identity();
  return dproj * dx;
}

std::vector<RigidTransform> SolveP3P(const std::array<Vec3, 3>& bearings,
                                     const std::array<Vec3, 3>& points) {
  const Vec3& j1 = bearings[0];
  const Vec3& j2 = bearings[1];
  const Vec3& j3 = bearings[2];
  const double a2 = (points[1] - points[2]).squaredNorm();
  const double b2 = (points[0] - points[2]).squaredNorm();
  const double c2 = (points[0] - points[1]).squaredNorm();
  std::vector<RigidTransform> solutions;
  if (a2 <= 0.0 || b2 <= 0.0 || c2 <= 0.0) return solutions;
  const double ca = j2.dot(j3);
  const double cb = j1.dot(j3);
  const double cg = j1.dot(j2);

  // Grunert: s2 = u s1, s3 = v s1, quartic in v.
  const double p = (a2 - c2) / b2;
  const double q = (a2 + c2) / b2;
  const double r = (b2 - c2) / b2;
  const double w = (b2 - a2) / b2;
  std::array<double, 5> coeff{};
  coeff[4] = (p - 1.0) * (p - 1.0) - 4.0 * c2 / b2 * ca * ca;
  coeff[3] = 4.0 * (p * (1.0 - p) * cb - (1.0 - q) * ca * cg + 2.0 * c2 / b2 * ca * ca * cb);
  coeff[2] = 2.0 * (p * p - 1.0 + 2.0 * p * p * cb * cb + 2.0 * r * ca * ca -
                    4.0 * q * ca * cb * cg + 2.0 * w * cg * cg);
  coeff[1] = 4.0 * (-p * (1.0 + p) * cb + 2.0 * a2 / b2 * cg * cg * cb - (1.0 - q) * ca * cg);
  coeff[0] = (1.0 + p) * (1.0 + p) - 4.0 * a2 / b2 * cg * cg;

  Eigen::Matrix3d world;
  world << points[0], points[1], points[2];
  for (double v : QuarticRealRoots(coeff)) {
    if (!(v > 0.0)) continue;
    const double denom = 1.0 + v * v - 2.0 * v * cb;
    if (!(denom > 0.0)) continue;
    const double s1 = std::sqrt(b2 / denom);
    const double s3 = v * s1;
    // s2 from the (s1, s2) equation; keep the root that satisfies (s2, s3).
    const double disc = s1 * s1 * cg * cg - (s1 * s1 - c2);
    if (disc < -1e-9 * c2) continue;
    const double root = std::sqrt(std::max(0.0, disc));
    for (double s2 : {s1 * cg + root, s1 * cg - root}) {
      if (!(s2 > 0.0)) continue;
      Vec3 s(s1, s2, s3);
      if (!PolishDistances(s, a2, b2, c2, ca, cb, cg)) continue;
      Eigen::Matrix3d camera;
      camera << s[0] * j1, s[1] * j2, s[2] * j3;
      const Eigen::Matrix4d t = Eigen::umeyama(world, camera, false);
      const Mat3 rot = t.topLeftCorner<3, 3>();
      if (!rot.allFinite() || std::abs(rot.determinant() - 1.0) > 1e-6) continue;
      RigidTransform sol{UnitQuaternion(rot), t.topRightCorner<3, 1>()};
      const bool duplicate = std::any_of(solutions.begin(), solutions.end(), [&](const auto& o) {
        return (o.translation - sol.translation).norm() < 1e-9 &&
               QuatDistance(o.rotation, sol.rotation) < 1e-9;
      });
      if (!duplicate) solutions.push_back(sol);
    }
  }
  return solutions;
}

PnPEstimate SolvePnPRansac(std::span<const Correspondence> corrs, const CameraIntrinsics& k,
                           const PnPOptions& opts, uint64_t seed) {
  const int n = static_cast<int>(corrs.size());
  if (n < kMinimalSample) {
    throw TooFewCorrespondences(fmt::format("PnP needs at least 4 correspondences, got {}", n));
  }
  const double threshold2 = opts.inlier_threshold_px * opts.inlier_threshold_px;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Hypothesis best;
  int required = opts.ransac_iterations;
  int degenerate = 0;
  int iteration = 0;
  for (; iteration < std::min(required, opts.ransac_iterations); ++iteration) {
    std::array<int, 4> idx{};
    for (int s = 0; s < kMinimalSample; ++s) {
      int candidate = 0;
      do {
        candidate = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + s, candidate) != idx.begin() + s);
      idx[s] = candidate;
    }
    if (SampleIsDegenerate(corrs, idx)) {
      ++degenerate;
      continue;
    }
    std::array<Vec3, 3> bearings;
    std::array<Vec3, 3> points;
    for (int s = 0; s < 3; ++s) {
      bearings[s] = Bearing(k, corrs[idx[s]].goal_pixel);
      points[s] = corrs[idx[s]].current_point;
    }
    const std::vector<RigidTransform> candidates = SolveP3P(bearings, points);
    if (candidates.empty()) {
      ++degenerate;
      continue;
    }
    // The fourth sample point selects among the P3P roots.
    const RigidTransform* chosen = nullptr;
    double chosen_r2 = kInf;
    for (const RigidTransform& c : candidates) {
      const double r2 = SquaredResidual(k, c, corrs[idx[3]]);
      if (r2 < chosen_r2) {
        chosen_r2 = r2;
        chosen = &c;
      }
    }
    if (chosen == nullptr || chosen_r2 > threshold2) continue;
    const Hypothesis h = Score(k, *chosen, corrs, threshold2);
    if (h.inliers > best.inliers || (h.inliers == best.inliers && h.score < best.score)) {
      best = h;
      required = RequiredIterations(static_cast<double>(best.inliers) / n, opts.ransac_confidence,
                                    opts.ransac_iterations);
    }
  }
  if (best.inliers < 0) {
    throw DegenerateGeometry(fmt::format(
        "no valid minimal sample in {} RANSAC iterations ({} degenerate)", iteration, degenerate));
  }
  if (best.inliers < kMinimalSample) {
    throw DegenerateGeometry(
        fmt::format("best RANSAC hypothesis has only {} inliers", best.inliers));
  }

  PnPEstimate estimate;
  estimate.rotation = best.pose.rotation;
  estimate.translation = best.pose.translation;
  estimate.inlier_mask = InlierMask(k, best.pose, corrs, threshold2);
  estimate.mean_reprojection_error = ReprojectionError(k, best.pose, corrs, estimate.inlier_mask);
  // Refine, then re-derive the consensus set with the sharper pose; repeat
  // while the set keeps changing.
  for (int round = 0; round < 3; ++round) {
    estimate = RefinePnP(corrs, k, estimate, opts);
    std::vector<bool> mask = InlierMask(k, estimate.transform(), corrs, threshold2);
    if (mask == estimate.inlier_mask ||
        std::count(mask.begin(), mask.end(), true) < kMinimalSample) {
      break;
    }
    estimate.inlier_mask = std::move(mask);
    estimate.mean_reprojection_error =
        ReprojectionError(k, estimate.transform(), corrs, estimate.inlier_mask);
  }
  return estimate;
}

PnPEstimate RefinePnP(std::span<const Correspondence> corrs, const CameraIntrinsics& k,
                      const PnPEstimate& initial, const PnPOptions& opts) {
  std::vector<bool> mask = initial.inlier_mask;
  if (mask.size() != corrs.size()) mask.assign(corrs.size(), true);
  std::vector<size_t> used;
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (mask[i]) used.push_back(i);
  }
  if (used.size() < 3) {
    throw TooFewCorrespondences(fmt::format("refinement needs >= 3 inliers, got {}", used.size()));
  }

  const auto cost = [&](const RigidTransform& pose) {
    double sum = 0.0;
    for (size_t i : used) sum += SquaredResidual(k, pose, corrs[i]);
    return sum / static_cast<double>(used.size());
  };

  RigidTransform pose = initial.transform();
  double current = cost(pose);
  if (current == kInf) throw PointBehindCamera("initial pose puts inliers behind the camera");

  int iterations = 0;
  bool damped_once = false;
  for (; iterations < opts.refine_max_iterations; ++iterations) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (size_t i : used) {
      const Correspondence& c = corrs[i];
      const PixelPoint p = Project(k, pose.Apply(c.current_point));
      const Eigen::Vector2d r(p.u - c.goal_pixel.u, p.v - c.goal_pixel.v);
      const Eigen::Matrix<double, 2, 6> j = ReprojectionJacobian(k, pose, c.current_point);
      h.noalias() += j.transpose() * j;
      g.noalias() += j.transpose() * r;
    }
    Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(h);
    const auto well_posed = [](const Eigen::LDLT<Eigen::Matrix<double, 6, 6>>& f) {
      if (f.info() != Eigen::Success || !f.isPositive()) return false;
      const auto d = f.vectorD();
      return d.minCoeff() > 1e-12 * d.maxCoeff();
    };
    if (!well_posed(ldlt)) {
      // One damped solve per refinement; a second rank-deficient system means
      // the inlier geometry cannot pin down the pose.
      if (damped_once) {
        throw SingularNormalEquations(
            fmt::format("normal equations singular at iteration {} after a damped retry",
                        iterations));
      }
      damped_once = true;
      Eigen::Matrix<double, 6, 6> damped = h;
      damped.diagonal().array() += 1e-6 * std::max(1.0, h.diagonal().maxCoeff());
      ldlt.compute(damped);
    }
    if (g.norm() == 0.0) break;
    const Eigen::Matrix<double, 6, 1> delta = -ldlt.solve(g);

    // Backtrack until the cost does not increase.
    bool accepted = false;
    double step = 1.0;
    for (int attempt = 0; attempt < 12; ++attempt, step *= 0.5) {
      const Eigen::Matrix<double, 6, 1> d = step * delta;
      RigidTransform trial{UnitQuaternion::Exp(d.head<3>()) * pose.rotation,
                           pose.translation + d.tail<3>()};
      const double trial_cost = cost(trial);
      if (trial_cost <= current) {
        pose = trial;
        current = trial_cost;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (step * delta.norm() < opts.refine_tolerance) {
      ++iterations;
      break;
    }
  }

  PnPEstimate out;
  out.rotation = pose.rotation;
  out.translation = pose.translation;
  out.inlier_mask = std::move(mask);
  out.mean_reprojection_error = current;
  out.iterations = iterations;
  return out;
}

}  // namespace h2r
