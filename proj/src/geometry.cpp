// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "mvpose/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mvpose {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidInputError("camera intrinsics require fx > 0 and fy > 0");
  }
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw InvalidInputError("camera intrinsics must be finite");
  }
}

void CameraExtrinsics::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidExtrinsicsError("extrinsics must be finite");
  }
  const Mat3 gram = rotation.transpose() * rotation;
  const double orthogonality = (gram - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orthogonality > kRotationTolerance) {
    throw InvalidExtrinsicsError("rotation is not orthogonal");
  }
  if (std::abs(rotation.determinant() - 1.0) > kRotationTolerance) {
    throw InvalidExtrinsicsError("rotation determinant is not +1");
  }
}

Vec3 inverse_project(const FrustumJoint& p, const CameraIntrinsics& k) {
  k.validate();
  if (!(p.z > 0.0)) {
    throw InvalidInputError("inverse projection requires depth z > 0");
  }
  return {(p.u - k.cx) / k.fx * p.z, (p.v - k.cy) / k.fy * p.z, p.z};
}

FrustumJoint project(const Vec3& x, const CameraIntrinsics& k) {
  k.validate();
  if (!(x.z() > 0.0)) {
    throw InvalidInputError("projection requires a point with z > 0");
  }
  return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy, x.z()};
}

AbsolutePose inverse_project(const FrustumPose& p, const CameraIntrinsics& k) {
  AbsolutePose out;
  out.joints.reserve(p.joints.size());
  for (const FrustumJoint& joint : p.joints) {
    out.joints.push_back(inverse_project(joint, k));
  }
  return out;
}

FrustumPose project(const AbsolutePose& x, const CameraIntrinsics& k) {
  FrustumPose out;
  out.joints.reserve(x.joints.size());
  for (const Vec3& joint : x.joints) {
    out.joints.push_back(project(joint, k));
  }
  return out;
}

Vec3 transform_point(const Vec3& x, const CameraExtrinsics& e) {
  return e.rotation * (x - e.translation);
}

AbsolutePose transform_pose(const AbsolutePose& x, const CameraExtrinsics& e) {
  e.validate();
  AbsolutePose out;
  out.joints.reserve(x.joints.size());
  for (const Vec3& joint : x.joints) {
    out.joints.push_back(transform_point(joint, e));
  }
  return out;
}

CameraExtrinsics invert_extrinsics(const CameraExtrinsics& e) {
  e.validate();
  CameraExtrinsics inv;
  inv.rotation = e.rotation.transpose();
  inv.translation = -(e.rotation * e.translation);
  return inv;
}

double rotation_geodesic_error(const Mat3& a, const Mat3& b) {
  const double cos_angle = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(cos_angle, -1.0, 1.0));
}

}  // namespace mvpose
