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

#include "h2r/geometry.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "h2r/errors.h"

namespace h2r {

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z)
    : q_(w, x, y, z) {
  const double n = q_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError("quaternion must have finite non-zero norm");
  }
  // Already-unit input is kept bit-for-bit so that renormalizing is idempotent.
  if (std::abs(n - 1.0) > 2.0 * std::numeric_limits<double>::epsilon()) q_.coeffs() /= n;
}

UnitQuaternion::UnitQuaternion(const Eigen::Quaterniond& q)
    : UnitQuaternion(q.w(), q.x(), q.y(), q.z()) {}

UnitQuaternion::UnitQuaternion(const Mat3& rotation)
    : UnitQuaternion(Eigen::Quaterniond(rotation)) {}

UnitQuaternion UnitQuaternion::FromAxisAngle(const Vec3& axis, double angle) {
  return UnitQuaternion(
      Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

UnitQuaternion UnitQuaternion::FromYaw(double yaw) {
  return {std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)};
}

UnitQuaternion UnitQuaternion::Exp(const Vec3& rotation_vector) {
  const double theta = rotation_vector.norm();
  if (theta < 1e-12) {
    // Second-order expansion keeps the map smooth at the origin.
    const Vec3 half = 0.5 * rotation_vector;
    return {1.0 - 0.125 * theta * theta, half.x(), half.y(), half.z()};
  }
  const Vec3 axis = rotation_vector / theta;
  const double s = std::sin(0.5 * theta);
  return {std::cos(0.5 * theta), s * axis.x(), s * axis.y(), s * axis.z()};
}

Vec3 UnitQuaternion::Log() const {
  Eigen::Quaterniond q = q_;
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-15) return 2.0 * v;
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

RigidTransform RigidTransform::Inverse() const {
  const UnitQuaternion inv = rotation.Inverse();
  return {inv, -inv.Rotate(translation)};
}

RigidTransform Compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation.Rotate(b.translation) + a.translation};
}

Pose ApplyTransform(const RigidTransform& t, const Pose& p) {
  return {t.Apply(p.position), t.rotation * p.orientation};
}

double QuatDistance(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double dot = std::abs(a.eigen().dot(b.eigen()));
  // Near dot = 1 acos loses precision; the chord length keeps it.
  if (dot > 0.999) {
    const Eigen::Vector4d d1 = a.eigen().coeffs() - b.eigen().coeffs();
    const Eigen::Vector4d d2 = a.eigen().coeffs() + b.eigen().coeffs();
    const double chord = std::min(d1.norm(), d2.norm());
    return 4.0 * std::asin(0.5 * chord);
  }
  return 2.0 * std::acos(dot);
}

PixelPoint Project(const CameraIntrinsics& k, const Vec3& point) {
  if (!(point.z() > 0.0)) {
    throw NonPositiveDepth("cannot project a point with z <= 0");
  }
  return {k.fx * point.x() / point.z() + k.cx, k.fy * point.y() / point.z() + k.cy};
}

Vec3 Lift(const CameraIntrinsics& k, const PixelPoint& px, double depth) {
  if (!(depth > 0.0)) {
    throw NonPositiveDepth("cannot lift a pixel to depth <= 0");
  }
  return {(px.u - k.cx) / k.fx * depth, (px.v - k.cy) / k.fy * depth, depth};
}

double YawOf(const UnitQuaternion& r) {
  const Mat3 m = r.Matrix();
  return WrapAngle(std::atan2(m(1, 0), m(0, 0)));
}

double WrapAngle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Mat3 Skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

std::array<double, 7> PoseToArray(const Pose& p) {
  const UnitQuaternion& q = p.orientation;
  return {p.position.x(), p.position.y(), p.position.z(), q.w(), q.x(), q.y(), q.z()};
}

Pose PoseFromArray(std::span<const double, 7> values) {
  return {Vec3(values[0], values[1], values[2]),
          UnitQuaternion(values[3], values[4], values[5], values[6])};
}

}  // namespace h2r
