// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "mvpose/consensus.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

namespace mvpose {

namespace {

double weight_at(std::span<const double> weights, std::size_t i) {
  return weights.empty() ? 1.0 : weights[i];
}

void check_matched_sizes(std::size_t a, std::size_t b,
                         std::span<const double> weights) {
  if (a != b || (!weights.empty() && weights.size() != a)) {
    throw InvalidInputError("matched point sets have different lengths");
  }
}

}  // namespace

const CameraCalibration& CalibrationSet::find(
    const std::string& camera_id) const {
  for (const CameraCalibration& cam : cameras) {
    if (cam.camera_id == camera_id) {
      return cam;
    }
  }
  throw InvalidInputError("calibration set has no camera '" + camera_id + "'");
}

void OptimizerConfig::validate() const {
  if (max_iter < 0) {
    throw InvalidInputError("optimizer config requires max_iter >= 0");
  }
  if (!(conf_threshold >= 0.0) || !(conf_threshold <= 1.0)) {
    throw InvalidInputError("conf_threshold must lie in [0, 1]");
  }
  if (!(rel_tol >= 0.0)) {
    throw InvalidInputError("rel_tol must be non-negative");
  }
}

double objective(std::span<const Vec3> points_a, std::span<const Vec3> points_b,
                 const CameraExtrinsics& e, std::span<const double> weights) {
  check_matched_sizes(points_a.size(), points_b.size(), weights);
  if (points_a.empty()) {
    throw InvalidInputError("objective requires a non-empty point set");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points_a.size(); ++i) {
    const Vec3 residual =
        points_a[i] - e.rotation * (points_b[i] - e.translation);
    total += weight_at(weights, i) * residual.squaredNorm();
  }
  return total;
}

Vec3 optimal_translation(std::span<const Vec3> points_a,
                         std::span<const Vec3> points_b, const Mat3& rotation,
                         std::span<const double> weights) {
  check_matched_sizes(points_a.size(), points_b.size(), weights);
  if (points_a.empty()) {
    throw InvalidInputError("optimal_translation requires at least one point");
  }
  Vec3 sum = Vec3::Zero();
  double total_weight = 0.0;
  for (std::size_t i = 0; i < points_a.size(); ++i) {
    const double w = weight_at(weights, i);
    sum += w * (points_b[i] - rotation.transpose() * points_a[i]);
    total_weight += w;
  }
  if (!(total_weight > 0.0)) {
    throw InvalidInputError("optimal_translation requires positive weights");
  }
  return sum / total_weight;
}

Mat3 procrustes_rotation(std::span<const Vec3> points_a,
                         std::span<const Vec3> points_b,
                         std::span<const double> weights) {
  check_matched_sizes(points_a.size(), points_b.size(), weights);
  if (points_a.size() < 3) {
    throw InvalidInputError("procrustes_rotation requires at least 3 points");
  }
  // Cross-covariance of the (pre-centered) clouds; maximizing tr(R H)
  // minimizes the squared alignment error.
  Mat3 cross = Mat3::Zero();
  for (std::size_t i = 0; i < points_a.size(); ++i) {
    cross += weight_at(weights, i) * points_b[i] * points_a[i].transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 singular = svd.singularValues();
  if (!(singular(1) > 1e-9 * singular(0)) || !(singular(0) > 0.0)) {
    throw DegenerateGeometryError(
        "procrustes cross-covariance has rank < 2 (collinear points)");
  }
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Vec3 correction(1.0, 1.0, (v * u.transpose()).determinant());
  return v * correction.asDiagonal() * u.transpose();
}

double optimal_focal(std::span<const double> u, std::span<const double> z,
                     double center, std::span<const double> target,
                     std::span<const double> weights) {
  check_matched_sizes(u.size(), z.size(), weights);
  check_matched_sizes(u.size(), target.size(), weights);
  double numerator = 0.0;    // target . A
  double denominator = 0.0;  // A . A
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = (u[i] - center) * z[i];
    const double w = weight_at(weights, i);
    numerator += w * target[i] * a;
    denominator += w * a * a;
  }
  if (!(denominator > 0.0)) {
    throw DegenerateGeometryError("focal update: (u - C) z vanishes");
  }
  const double inverse_focal = numerator / denominator;
  if (inverse_focal == 0.0) {
    throw DegenerateGeometryError("focal update: target orthogonal to basis");
  }
  return 1.0 / inverse_focal;
}

double optimal_center(std::span<const double> u, std::span<const double> z,
                      double focal, std::span<const double> target,
                      std::span<const double> weights) {
  check_matched_sizes(u.size(), z.size(), weights);
  check_matched_sizes(u.size(), target.size(), weights);
  if (!(focal > 0.0)) {
    throw InvalidInputError("center update requires focal > 0");
  }
  double numerator = 0.0;    // (u B - target) . B
  double denominator = 0.0;  // B . B
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double b = z[i] / focal;
    const double w = weight_at(weights, i);
    numerator += w * (u[i] * b - target[i]) * b;
    denominator += w * b * b;
  }
  if (!(denominator > 0.0)) {
    throw DegenerateGeometryError("center update: z / f vanishes");
  }
  return numerator / denominator;
}

CorrespondenceSet build_correspondences(const CameraObservations& cam_a,
                                        const CameraObservations& cam_b,
                                        double conf_threshold,
                                        bool use_weights) {
  if (cam_a.n_frames() != cam_b.n_frames()) {
    throw InvalidInputError("camera sequences have different frame counts");
  }
  CorrespondenceSet out;
  for (std::size_t f = 0; f < cam_a.n_frames(); ++f) {
    const FrustumPose& pose_a = cam_a.frames[f];
    const FrustumPose& pose_b = cam_b.frames[f];
    if (pose_a.size() != pose_b.size()) {
      throw InvalidInputError("frame " + std::to_string(f) +
                              ": joint counts differ between cameras");
    }
    for (std::size_t j = 0; j < pose_a.size(); ++j) {
      const double conf_a =
          cam_a.confidences.empty() ? 1.0 : cam_a.confidences[f][j];
      const double conf_b =
          cam_b.confidences.empty() ? 1.0 : cam_b.confidences[f][j];
      if (conf_a < conf_threshold || conf_b < conf_threshold) {
        continue;
      }
      out.frustum_a.push_back(pose_a.joints[j]);
      out.frustum_b.push_back(pose_b.joints[j]);
      out.weights.push_back(use_weights ? conf_a * conf_b : 1.0);
    }
  }
  return out;
}

CameraIntrinsics derive_initial_intrinsics(const CameraObservations& cam) {
  double sum_u = 0.0;
  double sum_v = 0.0;
  std::size_t count = 0;
  for (const FrustumPose& pose : cam.frames) {
    for (const FrustumJoint& joint : pose.joints) {
      sum_u += joint.u;
      sum_v += joint.v;
      ++count;
    }
  }
  if (count == 0) {
    throw InvalidInputError("cannot derive intrinsics from empty sequence");
  }
  CameraIntrinsics k;
  k.cx = sum_u / static_cast<double>(count);
  k.cy = sum_v / static_cast<double>(count);
  // Observations cluster around the principal point, so twice the mean
  // approximates the image extent; the focal prior is that extent.
  k.fx = k.fy = std::max(2.0 * std::max(k.cx, k.cy), 1.0);
  return k;
}

namespace {

struct PairState {
  std::vector<double> u_a, v_a, z_a;
  std::vector<double> u_b, v_b, z_b;
  std::vector<double> weights;
  std::vector<Vec3> x_a, x_b;

  std::size_t size() const { return u_a.size(); }

  void rebuild(std::vector<Vec3>& cloud, const std::vector<double>& u,
               const std::vector<double>& v, const std::vector<double>& z,
               const CameraIntrinsics& k) {
    cloud.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      cloud[i] = inverse_project(FrustumJoint{u[i], v[i], z[i]}, k);
    }
  }
};

CameraIntrinsics resolve_initial_intrinsics(
    const CameraObservations& cam, const OptimizerConfig& cfg,
    const std::optional<CameraIntrinsics>& explicit_init) {
  if (explicit_init) {
    explicit_init->validate();
    return *explicit_init;
  }
  CameraIntrinsics k = derive_initial_intrinsics(cam);
  if (cfg.init_focal_px > 0.0) {
    k.fx = k.fy = cfg.init_focal_px;
  }
  if (cfg.init_center_px.x() >= 0.0 && cfg.init_center_px.y() >= 0.0) {
    k.cx = cfg.init_center_px.x();
    k.cy = cfg.init_center_px.y();
  }
  k.validate();
  return k;
}

/// Extracts one coordinate of R (x_b - T) per correspondence: the target the
/// camera-a intrinsic updates fit against.
std::vector<double> forward_target(const PairState& s,
                                   const CameraExtrinsics& e, int axis) {
  std::vector<double> target(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    target[i] = (e.rotation * (s.x_b[i] - e.translation))(axis);
  }
  return target;
}

/// Extracts one coordinate of R^T x_a + T: the reverse projection targeted
/// by the camera-b intrinsic updates. Equals the forward form in objective
/// value because rotations preserve norms.
std::vector<double> reverse_target(const PairState& s,
                                   const CameraExtrinsics& e, int axis) {
  std::vector<double> target(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    target[i] = (e.rotation.transpose() * s.x_a[i] + e.translation)(axis);
  }
  return target;
}

bool accept_focal(double f) { return std::isfinite(f) && f > 0.0; }

bool accept_center(double c, const CameraIntrinsics& init) {
  const double image_extent = 2.0 * std::max(init.cx, init.cy);
  const double bound = 4.0 * std::max(image_extent, 1.0);
  return std::isfinite(c) && std::abs(c - init.cx) <= bound + std::abs(init.cx) &&
         std::abs(c) <= std::abs(init.cx) + std::abs(init.cy) + bound;
}

}  // namespace

PairCalibration calibrate_pair(const CameraObservations& cam_a,
                               const CameraObservations& cam_b,
                               const OptimizerConfig& cfg,
                               const std::optional<CameraIntrinsics>& init_a,
                               const std::optional<CameraIntrinsics>& init_b) {
  cfg.validate();
  const CorrespondenceSet corr = build_correspondences(
      cam_a, cam_b, cfg.conf_threshold, cfg.weighted_objective);
  if (corr.size() < 3) {
    throw DegenerateGeometryError(
        "fewer than 3 correspondences after confidence filtering");
  }

  PairState s;
  s.weights = corr.weights;
  s.u_a.reserve(corr.size());
  for (std::size_t i = 0; i < corr.size(); ++i) {
    s.u_a.push_back(corr.frustum_a[i].u);
    s.v_a.push_back(corr.frustum_a[i].v);
    s.z_a.push_back(corr.frustum_a[i].z);
    s.u_b.push_back(corr.frustum_b[i].u);
    s.v_b.push_back(corr.frustum_b[i].v);
    s.z_b.push_back(corr.frustum_b[i].z);
  }

  PairCalibration result;
  result.intrinsics_a = resolve_initial_intrinsics(cam_a, cfg, init_a);
  result.intrinsics_b = resolve_initial_intrinsics(cam_b, cfg, init_b);
  const CameraIntrinsics init_ka = result.intrinsics_a;
  const CameraIntrinsics init_kb = result.intrinsics_b;

  s.rebuild(s.x_a, s.u_a, s.v_a, s.z_a, result.intrinsics_a);
  s.rebuild(s.x_b, s.u_b, s.v_b, s.z_b, result.intrinsics_b);

  CameraExtrinsics e;
  e.translation = optimal_translation(s.x_a, s.x_b, e.rotation, s.weights);

  const auto current_objective = [&]() {
    return objective(s.x_a, s.x_b, e, s.weights);
  };
  const auto log_row = [&](int iteration, std::string substep) {
    result.trace.push_back({iteration, std::move(substep), current_objective()});
  };
  log_row(0, "init");

  const double total_weight =
      std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
  double previous = result.trace.back().objective;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    // Rigid substep: Procrustes rotation on weighted-centered clouds plus
    // the mean translation. Together they are the exact joint minimizer of
    // the objective over (R, T) for the current point clouds.
    Vec3 mean_a = Vec3::Zero();
    Vec3 mean_b = Vec3::Zero();
    for (std::size_t i = 0; i < s.size(); ++i) {
      mean_a += s.weights[i] * s.x_a[i];
      mean_b += s.weights[i] * s.x_b[i];
    }
    mean_a /= total_weight;
    mean_b /= total_weight;
    std::vector<Vec3> centered_a(s.size()), centered_b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      centered_a[i] = s.x_a[i] - mean_a;
      centered_b[i] = s.x_b[i] - mean_b;
    }
    e.rotation = procrustes_rotation(centered_a, centered_b, s.weights);
    e.translation = optimal_translation(s.x_a, s.x_b, e.rotation, s.weights);
    log_row(iter + 1, "rigid");

    if (!cfg.freeze_intrinsics) {
      CameraIntrinsics& ka = result.intrinsics_a;
      CameraIntrinsics& kb = result.intrinsics_b;
      int rejected = 0;
      std::string substep;
      switch (iter % 4) {
        case 0: {
          substep = "focal_a";
          const double fx = optimal_focal(s.u_a, s.z_a, ka.cx,
                                          forward_target(s, e, 0), s.weights);
          const double fy = optimal_focal(s.v_a, s.z_a, ka.cy,
                                          forward_target(s, e, 1), s.weights);
          accept_focal(fx) ? void(ka.fx = fx) : void(++rejected);
          accept_focal(fy) ? void(ka.fy = fy) : void(++rejected);
          s.rebuild(s.x_a, s.u_a, s.v_a, s.z_a, ka);
          break;
        }
        case 1: {
          substep = "focal_b";
          const double fx = optimal_focal(s.u_b, s.z_b, kb.cx,
                                          reverse_target(s, e, 0), s.weights);
          const double fy = optimal_focal(s.v_b, s.z_b, kb.cy,
                                          reverse_target(s, e, 1), s.weights);
          accept_focal(fx) ? void(kb.fx = fx) : void(++rejected);
          accept_focal(fy) ? void(kb.fy = fy) : void(++rejected);
          s.rebuild(s.x_b, s.u_b, s.v_b, s.z_b, kb);
          break;
        }
        case 2: {
          substep = "center_a";
          const double cx = optimal_center(s.u_a, s.z_a, ka.fx,
                                           forward_target(s, e, 0), s.weights);
          const double cy = optimal_center(s.v_a, s.z_a, ka.fy,
                                           forward_target(s, e, 1), s.weights);
          accept_center(cx, init_ka) ? void(ka.cx = cx) : void(++rejected);
          accept_center(cy, init_ka) ? void(ka.cy = cy) : void(++rejected);
          s.rebuild(s.x_a, s.u_a, s.v_a, s.z_a, ka);
          break;
        }
        case 3: {
          substep = "center_b";
          const double cx = optimal_center(s.u_b, s.z_b, kb.fx,
                                           reverse_target(s, e, 0), s.weights);
          const double cy = optimal_center(s.v_b, s.z_b, kb.fy,
                                           reverse_target(s, e, 1), s.weights);
          accept_center(cx, init_kb) ? void(kb.cx = cx) : void(++rejected);
          accept_center(cy, init_kb) ? void(kb.cy = cy) : void(++rejected);
          s.rebuild(s.x_b, s.u_b, s.v_b, s.z_b, kb);
          break;
        }
      }
      result.rejected_updates += rejected;
      log_row(iter + 1, rejected > 0 ? substep + "_rejected" : substep);
    }

    const double current = result.trace.back().objective;
    if (!std::isfinite(current) || !e.rotation.allFinite() ||
        !e.translation.allFinite()) {
      throw NumericalFailureError("non-finite value at iteration " +
                                  std::to_string(iter));
    }
    const double improvement =
        (previous - current) / std::max(previous, 1e-300);
    if (improvement < cfg.rel_tol) {
      break;
    }
    previous = current;
  }

  result.extrinsics_b_to_a = e;
  result.rms_residual_mm =
      std::sqrt(result.trace.back().objective / total_weight);
  return result;
}

CalibrationSet calibrate_rig(
    const std::vector<CameraView>& views, const std::string& reference_id,
    const OptimizerConfig& cfg,
    const std::map<std::string, CameraIntrinsics>& init_overrides,
    std::map<std::string, PairCalibration>* pair_results) {
  if (views.size() < 2) {
    throw InvalidInputError("rig calibration requires at least 2 cameras");
  }
  const CameraView* reference = nullptr;
  for (const CameraView& view : views) {
    if (view.camera_id == reference_id) {
      reference = &view;
    }
  }
  if (reference == nullptr) {
    throw InvalidInputError("reference camera '" + reference_id +
                            "' not found in inputs");
  }

  const auto override_for =
      [&](const std::string& id) -> std::optional<CameraIntrinsics> {
    const auto it = init_overrides.find(id);
    return it == init_overrides.end() ? std::nullopt
                                      : std::optional(it->second);
  };

  CalibrationSet out;
  out.reference_camera = reference_id;
  double ref_fx = 0.0, ref_fy = 0.0, ref_cx = 0.0, ref_cy = 0.0;
  int n_pairs = 0;

  for (const CameraView& view : views) {
    if (view.camera_id == reference_id) {
      continue;
    }
    PairCalibration pair;
    try {
      pair = calibrate_pair(reference->observations, view.observations, cfg,
                            override_for(reference_id),
                            override_for(view.camera_id));
    } catch (const Error& err) {
      throw DegenerateGeometryError("camera '" + view.camera_id +
                                    "': " + err.what());
    }
    ref_fx += pair.intrinsics_a.fx;
    ref_fy += pair.intrinsics_a.fy;
    ref_cx += pair.intrinsics_a.cx;
    ref_cy += pair.intrinsics_a.cy;
    ++n_pairs;
    out.cameras.push_back(
        {view.camera_id, pair.intrinsics_b, pair.extrinsics_b_to_a});
    if (pair_results != nullptr) {
      (*pair_results)[view.camera_id] = std::move(pair);
    }
  }

  CameraCalibration ref_calib;
  ref_calib.camera_id = reference_id;
  ref_calib.intrinsics = {ref_fx / n_pairs, ref_fy / n_pairs, ref_cx / n_pairs,
                          ref_cy / n_pairs};
  ref_calib.extrinsics = CameraExtrinsics::identity();
  out.cameras.insert(out.cameras.begin(), std::move(ref_calib));
  return out;
}

}  // namespace mvpose
