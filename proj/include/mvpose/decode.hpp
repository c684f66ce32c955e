// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "mvpose/errors.hpp"
#include "mvpose/geometry.hpp"

namespace mvpose {

/// Dense per-joint grid, row-major. Pixel (x, y) indexes column x of row y.
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  bool shape_matches(const GridMap& other) const {
    return width == other.width && height == other.height;
  }
};

/// Probability distribution over pixel locations for one body joint:
/// entries are non-negative and sum to 1 within kHeatmapSumTolerance.
struct JointHeatmap : GridMap {};

/// Normalized relative-depth grid for one joint; entries lie in [0, 1] and
/// span a fixed metric interval around the person (see DecodeConfig).
struct DepthMap : GridMap {};

inline constexpr double kHeatmapSumTolerance = 1e-6;

/// Constants of the depth decoding stage.
struct DecodeConfig {
  /// Maximum absolute depth in millimeters (sigmoid ceiling).
  double rho_mm = 10000.0;
  /// Smoothing factor of the absolute-depth sigmoid.
  double beta = 0.5;
  /// Metric span of the normalized relative-depth maps; a map value of 0.5
  /// decodes to 0 mm, so the interval is centered on the person.
  double depth_range_mm = 2000.0;

  void validate() const;
};

/// Mean and standard deviation of the joint position error distribution,
/// both in millimeters. Parameterizes the confidence target.
struct ConfidenceStats {
  double mean_error_mm = 0.0;
  double std_error_mm = 1.0;
};

/// Expectation of pixel coordinates under a joint probability heatmap.
/// Result always lies inside [0, width-1] x [0, height-1].
Vec2 soft_argmax_2d(const JointHeatmap& h);

/// Heatmap-weighted pooling of the relative-depth map, mapped to
/// millimeters in [-depth_range/2, +depth_range/2].
double pool_relative_depth(const DepthMap& d, const JointHeatmap& h,
                           const DecodeConfig& cfg);

/// Absolute depth of the person's root from the raw network activation:
/// rho / (1 + exp(beta * alpha_z)). Strictly decreasing, bounded in (0, rho).
double absolute_depth(double alpha_z, const DecodeConfig& cfg);

/// Per-joint absolute depth: relative offset plus the person's root depth.
/// Throws if the composed depth is not positive.
double compose_depth(double relative_depth_mm, double absolute_depth_mm);

/// Training target for the joint confidence score:
/// 1 / (1 + exp((error - mean) / std)). Errors above the mean map below 0.5,
/// so thresholding at 0.5 discards above-average-error joints.
double confidence_ground_truth(double error_mm, const ConfidenceStats& stats);

}  // namespace mvpose
