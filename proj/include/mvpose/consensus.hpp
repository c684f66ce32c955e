// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvpose/geometry.hpp"

namespace mvpose {

/// One camera's prediction sequence: per-frame frustum poses plus per-joint
/// confidence scores in [0, 1]. Confidences may be empty (treated as 1).
struct CameraObservations {
  std::vector<FrustumPose> frames;
  std::vector<std::vector<double>> confidences;

  std::size_t n_frames() const { return frames.size(); }
};

/// Matched point material for one camera pair, aggregated over frames and
/// joints. Parallel arrays; built after confidence filtering.
struct CorrespondenceSet {
  std::vector<FrustumJoint> frustum_a;
  std::vector<FrustumJoint> frustum_b;
  std::vector<double> weights;

  std::size_t size() const { return frustum_a.size(); }
};

/// Intrinsics plus the rigid transform into the reference camera frame.
struct CameraCalibration {
  std::string camera_id;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

/// Full rig calibration. The reference camera carries identity extrinsics;
/// every other camera's extrinsics map its frame into the reference frame.
struct CalibrationSet {
  std::string reference_camera;
  std::vector<CameraCalibration> cameras;

  const CameraCalibration& find(const std::string& camera_id) const;
};

struct OptimizerConfig {
  int max_iter = 200;
  /// Early exit when the end-of-iteration objective improves by less than
  /// this relative amount. The trace still records every executed iteration.
  double rel_tol = 1e-10;
  /// Joints whose confidence falls below this in either view are dropped
  /// from the correspondence set.
  double conf_threshold = 0.5;
  /// Initial focal length in pixels for both axes; <= 0 derives it from the
  /// observed pixel spread (focal = inferred image extent).
  double init_focal_px = 0.0;
  /// Initial principal point; negative entries derive it from observations.
  Vec2 init_center_px = {-1.0, -1.0};
  /// Skip all intrinsic updates, calibrating extrinsics only.
  bool freeze_intrinsics = false;
  /// Multiply each correspondence's squared residual by the product of the
  /// two views' confidences instead of using unit weights.
  bool weighted_objective = false;

  void validate() const;
};

/// One residual-trace row: the cross-view objective value right after the
/// named substep of the named iteration.
struct TraceRow {
  int iteration = 0;
  std::string substep;
  double objective = 0.0;
};

struct PairCalibration {
  CameraIntrinsics intrinsics_a;
  CameraIntrinsics intrinsics_b;
  /// Transform from camera b's frame into camera a's frame.
  CameraExtrinsics extrinsics_b_to_a;
  std::vector<TraceRow> trace;
  /// Number of intrinsic updates rejected as non-physical (also marked by a
  /// "_rejected" suffix on the trace substep).
  int rejected_updates = 0;

  double final_objective() const { return trace.back().objective; }
  /// Root-mean-square residual per correspondence at the final iterate.
  double rms_residual_mm = 0.0;
};

/// Named input for rig calibration.
struct CameraView {
  std::string camera_id;
  CameraObservations observations;
};

/// Squared-Frobenius cross-view projection error
/// sum_i w_i * ||a_i - R (b_i - T)||^2. Unit weights when empty.
double objective(std::span<const Vec3> points_a, std::span<const Vec3> points_b,
                 const CameraExtrinsics& e,
                 std::span<const double> weights = {});

/// Closed-form translation minimizing the objective for fixed rotation:
/// the (weighted) mean of b_i - R^T a_i.
Vec3 optimal_translation(std::span<const Vec3> points_a,
                         std::span<const Vec3> points_b, const Mat3& rotation,
                         std::span<const double> weights = {});

/// Orthogonal Procrustes with determinant correction: the rotation
/// minimizing sum_i w_i * ||a_i - R b_i||^2 over SO(3). Callers pass
/// pre-centered (or otherwise aligned) point sets; no centering happens
/// here. Throws DegenerateGeometryError when the cross-covariance has
/// rank < 2.
Mat3 procrustes_rotation(std::span<const Vec3> points_a,
                         std::span<const Vec3> points_b,
                         std::span<const double> weights = {});

/// Closed-form focal length: with A_i = (u_i - center) * z_i, minimizes
/// ||f' A - target||^2 over f' = 1/f and returns f = 1/f'. Throws
/// DegenerateGeometryError when A vanishes; returns an unphysical f <= 0
/// unchanged for the caller to reject.
double optimal_focal(std::span<const double> u, std::span<const double> z,
                     double center, std::span<const double> target,
                     std::span<const double> weights = {});

/// Closed-form principal point: with B_i = z_i / f, minimizes
/// ||(u - C) B - target||^2 over C.
double optimal_center(std::span<const double> u, std::span<const double> z,
                      double focal, std::span<const double> target,
                      std::span<const double> weights = {});

/// Filters matched joints by confidence and flattens frames into one
/// correspondence set. Weights are confidence products when use_weights is
/// set, else 1.
CorrespondenceSet build_correspondences(const CameraObservations& cam_a,
                                        const CameraObservations& cam_b,
                                        double conf_threshold,
                                        bool use_weights);

/// Derives starter intrinsics from the pixel spread of a sequence: principal
/// point at the mean observed (u, v), focal at the implied image extent.
CameraIntrinsics derive_initial_intrinsics(const CameraObservations& cam);

/// Alternating closed-form calibration of one camera pair: rigid alignment
/// (Procrustes rotation + mean translation) every iteration, one intrinsic
/// family per iteration in the round-robin order f_a, f_b, C_a, C_b. The
/// objective is non-increasing after every traced substep.
PairCalibration calibrate_pair(
    const CameraObservations& cam_a, const CameraObservations& cam_b,
    const OptimizerConfig& cfg,
    const std::optional<CameraIntrinsics>& init_a = std::nullopt,
    const std::optional<CameraIntrinsics>& init_b = std::nullopt);

/// Star-topology rig calibration: every non-reference camera is calibrated
/// pairwise against the reference. The reference camera's intrinsics are
/// estimated once per pair and reconciled by arithmetic mean. Per-pair
/// traces are returned through `traces` when non-null (keyed by camera id).
CalibrationSet calibrate_rig(
    const std::vector<CameraView>& views, const std::string& reference_id,
    const OptimizerConfig& cfg,
    const std::map<std::string, CameraIntrinsics>& init_overrides = {},
    std::map<std::string, PairCalibration>* pair_results = nullptr);

}  // namespace mvpose
