// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "mvpose/errors.hpp"

namespace mvpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One body joint in view frustum space: image-plane position in pixels and
/// metric depth along the optical axis in millimeters.
struct FrustumJoint {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

/// A person observed by one camera: J frustum-space joints.
struct FrustumPose {
  std::vector<FrustumJoint> joints;

  std::size_t size() const { return joints.size(); }
};

/// A person in a camera coordinate frame: J points in millimeters.
struct AbsolutePose {
  std::vector<Vec3> joints;

  std::size_t size() const { return joints.size(); }
};

/// Pinhole intrinsics: focal lengths and principal point, all in pixels.
/// Zero skew and zero distortion by construction.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws InvalidInputError unless fx > 0 and fy > 0.
  void validate() const;
};

/// Rigid transform between two camera frames. A point x in the source frame
/// maps to rotation * (x - translation) in the destination frame.
struct CameraExtrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static CameraExtrinsics identity() { return {}; }

  /// Throws InvalidExtrinsicsError unless rotation is in SO(3):
  /// R^T R = I within 1e-9 per entry and det(R) = +1 within 1e-9.
  void validate() const;
};

/// Tolerance used by CameraExtrinsics::validate and the file loaders.
inline constexpr double kRotationTolerance = 1e-9;

/// Inverse pinhole projection of one joint: lifts (u, v, z) to camera
/// coordinates x = (u - cx) / fx * z, y = (v - cy) / fy * z.
Vec3 inverse_project(const FrustumJoint& p, const CameraIntrinsics& k);

/// Pinhole projection of one camera-frame point back to (u, v, z).
/// Exact inverse of inverse_project; requires z > 0.
FrustumJoint project(const Vec3& x, const CameraIntrinsics& k);

AbsolutePose inverse_project(const FrustumPose& p, const CameraIntrinsics& k);
FrustumPose project(const AbsolutePose& x, const CameraIntrinsics& k);

Vec3 transform_point(const Vec3& x, const CameraExtrinsics& e);

/// Maps every joint to rotation * (x - translation). Validates e.
AbsolutePose transform_pose(const AbsolutePose& x, const CameraExtrinsics& e);

/// Inverse rigid transform: (R, T) -> (R^T, -R T), so that transforming a
/// point by e and then by invert_extrinsics(e) is the identity.
CameraExtrinsics invert_extrinsics(const CameraExtrinsics& e);

/// Angle in radians between two rotations (geodesic distance on SO(3)).
double rotation_geodesic_error(const Mat3& a, const Mat3& b);

}  // namespace mvpose
