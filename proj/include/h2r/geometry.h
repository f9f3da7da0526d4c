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

#ifndef H2R_GEOMETRY_H_
#define H2R_GEOMETRY_H_

#include <array>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace h2r {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Quaternion that is unit-norm by construction. Every constructor and every
/// product renormalizes, so the norm stays within 1e-9 of one.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(Eigen::Quaterniond::Identity()) {}
  UnitQuaternion(double w, double x, double y, double z);
  explicit UnitQuaternion(const Eigen::Quaterniond& q);
  explicit UnitQuaternion(const Mat3& rotation);

  static UnitQuaternion Identity() { return {}; }
  static UnitQuaternion FromAxisAngle(const Vec3& axis, double angle);
  /// Rotation about the vertical (z) axis.
  static UnitQuaternion FromYaw(double yaw);
  /// Exponential map of a rotation vector (axis * angle).
  static UnitQuaternion Exp(const Vec3& rotation_vector);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }
  const Eigen::Quaterniond& eigen() const { return q_; }

  Mat3 Matrix() const { return q_.toRotationMatrix(); }
  Vec3 Rotate(const Vec3& v) const { return q_ * v; }
  UnitQuaternion Inverse() const { return UnitQuaternion(q_.conjugate()); }
  /// Rotation vector (axis * angle) with angle in [0, pi].
  Vec3 Log() const;

  UnitQuaternion operator*(const UnitQuaternion& rhs) const {
    return UnitQuaternion(q_ * rhs.q_);
  }
  UnitQuaternion operator-() const {
    return UnitQuaternion(-w(), -x(), -y(), -z());
  }

 private:
  Eigen::Quaterniond q_;
};

struct Pose {
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation;
};

/// Maps points from a source frame into a target frame: p' = R p + t.
struct RigidTransform {
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform Identity() { return {}; }
  Vec3 Apply(const Vec3& p) const { return rotation.Rotate(p) + translation; }
  RigidTransform Inverse() const;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Returns the transform that applies `b` first and then `a`.
RigidTransform Compose(const RigidTransform& a, const RigidTransform& b);

/// Moves a pose by a rigid transform: position R p + t, orientation R * q.
Pose ApplyTransform(const RigidTransform& t, const Pose& p);

/// Geodesic angle 2 acos(|<a, b>|) in [0, pi]; blind to the quaternion sign.
double QuatDistance(const UnitQuaternion& a, const UnitQuaternion& b);

/// Pinhole projection of a camera-frame point. Throws NonPositiveDepth.
PixelPoint Project(const CameraIntrinsics& k, const Vec3& point);

/// Inverse of Project at a given depth (z). Throws NonPositiveDepth.
Vec3 Lift(const CameraIntrinsics& k, const PixelPoint& px, double depth);

/// atan2(R(1,0), R(0,0)) of the rotation matrix, in (-pi, pi].
double YawOf(const UnitQuaternion& r);

/// Wraps an angle into (-pi, pi].
double WrapAngle(double angle);

Mat3 Skew(const Vec3& v);

// Poses travel through every file format as (px, py, pz, qw, qx, qy, qz).
std::array<double, 7> PoseToArray(const Pose& p);
Pose PoseFromArray(std::span<const double, 7> values);

}  // namespace h2r

#endif  // H2R_GEOMETRY_H_
