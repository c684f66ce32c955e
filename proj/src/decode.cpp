// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "mvpose/decode.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace mvpose {

namespace {

void check_grid(const GridMap& g, const char* what) {
  if (g.width < 1 || g.height < 1 ||
      g.values.size() !=
          static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height)) {
    throw InvalidInputError(std::string(what) + " has inconsistent dimensions");
  }
}

void check_heatmap(const JointHeatmap& h) {
  check_grid(h, "heatmap");
  double sum = 0.0;
  for (double v : h.values) {
    if (!(v >= 0.0)) {
      throw InvalidInputError("heatmap entries must be non-negative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kHeatmapSumTolerance) {
    throw InvalidInputError("heatmap is not normalized to unit sum");
  }
}

void check_depth_map(const DepthMap& d) {
  check_grid(d, "depth map");
  for (double v : d.values) {
    if (!(v >= 0.0) || !(v <= 1.0)) {
      throw InvalidInputError("depth map entries must lie in [0, 1]");
    }
  }
}

}  // namespace

void DecodeConfig::validate() const {
  if (!(rho_mm > 0.0) || !(beta > 0.0) || !(depth_range_mm > 0.0)) {
    throw InvalidInputError("decode config requires rho, beta, depth_range > 0");
  }
}

Vec2 soft_argmax_2d(const JointHeatmap& h) {
  check_heatmap(h);
  double u = 0.0;
  double v = 0.0;
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      const double w = h.at(x, y);
      u += w * x;
      v += w * y;
    }
  }
  return {u, v};
}

double pool_relative_depth(const DepthMap& d, const JointHeatmap& h,
                           const DecodeConfig& cfg) {
  cfg.validate();
  check_heatmap(h);
  check_depth_map(d);
  if (!d.shape_matches(h)) {
    throw InvalidInputError("depth map and heatmap shapes differ");
  }
  double pooled = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    pooled += d.values[i] * h.values[i];
  }
  // Affine map [0, 1] -> [-range/2, +range/2] mm.
  return (pooled - 0.5) * cfg.depth_range_mm;
}

double absolute_depth(double alpha_z, const DecodeConfig& cfg) {
  cfg.validate();
  return cfg.rho_mm / (1.0 + std::exp(cfg.beta * alpha_z));
}

double compose_depth(double relative_depth_mm, double absolute_depth_mm) {
  const double z = relative_depth_mm + absolute_depth_mm;
  if (!(z > 0.0)) {
    throw InvalidInputError("composed joint depth must be positive");
  }
  return z;
}

double confidence_ground_truth(double error_mm, const ConfidenceStats& stats) {
  if (!(stats.std_error_mm > 0.0)) {
    throw InvalidInputError("confidence stats require std_error_mm > 0");
  }
  if (!(error_mm >= 0.0)) {
    throw InvalidInputError("confidence target requires error_mm >= 0");
  }
  return 1.0 / (1.0 + std::exp((error_mm - stats.mean_error_mm) / stats.std_error_mm));
}

}  // namespace mvpose
