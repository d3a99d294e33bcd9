#ifndef V2XNOISE_CFAS_HPP
#define V2XNOISE_CFAS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "v2xnoise/errors.hpp"
#include "v2xnoise/geometry.hpp"

namespace v2xnoise {

/// H x W depth raster in meters with an explicit validity mask. The mask is
/// authoritative; invalid pixels carry depth 0 only as a serialization
/// convenience. Pixel (i, j) = (row, column) = (v, u).
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depth;         // height * width, row-major
  std::vector<std::uint8_t> valid;  // same layout, 0 or 1

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h) {
    if (w <= 0 || h <= 0) {
      throw std::invalid_argument("DepthMap: non-positive dimensions");
    }
    depth.assign(static_cast<std::size_t>(w) * h, 0.0f);
    valid.assign(static_cast<std::size_t>(w) * h, 0);
  }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * width + j;
  }
  float at(int i, int j) const { return depth[index(i, j)]; }
  bool is_valid(int i, int j) const { return valid[index(i, j)] != 0; }
  void set(int i, int j, float d) {
    depth[index(i, j)] = d;
    valid[index(i, j)] = 1;
  }
};

using SparseDepthMap = DepthMap;
using DepthAggregationMap = DepthMap;

/// Densified depth plus the four directional difference channels.
/// Channel order: D', up, down, left, right.
struct DepthVariationMap {
  static constexpr int kChannels = 5;

  int width = 0;
  int height = 0;
  std::vector<DepthMap> channels;  // each with its own validity mask

  /// Largest |gradient| per direction channel (up, down, left, right) over
  /// valid pixels; diagnostic summary of the variation map.
  std::array<float, 4> max_abs_gradient{};
};

/// Rasterizes a projected cloud: (u, v) rounds to the nearest pixel and the
/// smallest depth wins when several points collide (nearest surface).
inline SparseDepthMap render_sparse_depth(const PointCloud& cloud,
                                          const CameraModel& cam,
                                          const RigidTransform& t_lidar2img) {
  SparseDepthMap map(cam.width, cam.height);
  ProjectionResult proj = project_points(cam, t_lidar2img, cloud);
  for (const ProjectedPoint& p : proj.points) {
    int j = static_cast<int>(std::lround(p.u));
    int i = static_cast<int>(std::lround(p.v));
    if (j < 0 || j >= map.width || i < 0 || i >= map.height) continue;
    float d = static_cast<float>(p.depth);
    if (!map.is_valid(i, j) || d < map.at(i, j)) {
      map.set(i, j, d);
    }
  }
  return map;
}

namespace detail {

/// 1-D sliding max over one row/column of (value, valid) pairs.
/// Brute per-window scan; window sizes here are tiny (7 by default).
inline void sliding_max_1d(const float* vals, const std::uint8_t* mask,
                           int n, int stride, int radius, float* out_vals,
                           std::uint8_t* out_mask) {
  for (int i = 0; i < n; ++i) {
    float best = -std::numeric_limits<float>::infinity();
    bool any = false;
    int lo = std::max(0, i - radius);
    int hi = std::min(n - 1, i + radius);
    for (int k = lo; k <= hi; ++k) {
      if (mask[k * stride]) {
        best = std::max(best, vals[k * stride]);
        any = true;
      }
    }
    out_vals[i * stride] = any ? best : 0.0f;
    out_mask[i * stride] = any ? 1 : 0;
  }
}

}  // namespace detail

/// Windowed max-pool densification. Each output pixel takes the maximum
/// valid depth in the window x window neighborhood (clipped at the image
/// border); it is invalid iff the neighborhood holds no valid pixel.
/// Computed separably (rows then columns), which is exact for max.
inline DepthAggregationMap densify_depth_max(const SparseDepthMap& src,
                                             int window = 7) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("densify_depth_max: window must be odd, >= 1");
  }
  int radius = window / 2;
  DepthMap rows(src.width, src.height);
  for (int i = 0; i < src.height; ++i) {
    detail::sliding_max_1d(src.depth.data() + src.index(i, 0),
                           src.valid.data() + src.index(i, 0), src.width, 1,
                           radius, rows.depth.data() + rows.index(i, 0),
                           rows.valid.data() + rows.index(i, 0));
  }
  DepthAggregationMap out(src.width, src.height);
  for (int j = 0; j < src.width; ++j) {
    detail::sliding_max_1d(rows.depth.data() + j, rows.valid.data() + j,
                           src.height, src.width, radius, out.depth.data() + j,
                           out.valid.data() + j);
  }
  return out;
}

/// Four-direction unit-pixel depth differences on the aggregation map:
/// g^t(i, j) = d'(i + si, j + sj) - d'(i, j) for
/// (si, sj) in {(-1,0) up, (1,0) down, (0,-1) left, (0,1) right}.
/// A gradient pixel is valid only where both operands are valid.
inline DepthVariationMap depth_gradients(const DepthAggregationMap& aggr) {
  static constexpr int kShift[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};

  DepthVariationMap out;
  out.width = aggr.width;
  out.height = aggr.height;
  out.channels.reserve(DepthVariationMap::kChannels);
  out.channels.push_back(aggr);
  for (int t = 0; t < 4; ++t) {
    DepthMap g(aggr.width, aggr.height);
    float max_abs = 0.0f;
    for (int i = 0; i < aggr.height; ++i) {
      for (int j = 0; j < aggr.width; ++j) {
        int si = i + kShift[t][0];
        int sj = j + kShift[t][1];
        if (si < 0 || si >= aggr.height || sj < 0 || sj >= aggr.width) {
          continue;
        }
        if (!aggr.is_valid(i, j) || !aggr.is_valid(si, sj)) continue;
        float d = aggr.at(si, sj) - aggr.at(i, j);
        g.set(i, j, d);
        max_abs = std::max(max_abs, std::abs(d));
      }
    }
    out.max_abs_gradient[t] = max_abs;
    out.channels.push_back(std::move(g));
  }
  return out;
}

struct MisalignmentStats {
  double mean_px = 0.0;
  double p95_px = 0.0;
  std::size_t matched = 0;
};

/// Mean / 95th-percentile pixel displacement between projections of the same
/// cloud under a clean and a perturbed lidar->image transform, over points
/// retained by both.
inline MisalignmentStats misalignment_metric(const PointCloud& cloud,
                                             const CameraModel& cam,
                                             const RigidTransform& t_clean,
                                             const RigidTransform& t_noisy) {
  t_clean.validate(1e-6);
  t_noisy.validate(1e-6);
  ProjectionResult a = project_points(cam, t_clean, cloud);
  ProjectionResult b = project_points(cam, t_noisy, cloud);

  std::vector<double> disp;
  disp.reserve(std::min(a.points.size(), b.points.size()));
  // Both lists are sorted by point_index.
  std::size_t ia = 0, ib = 0;
  while (ia < a.points.size() && ib < b.points.size()) {
    if (a.points[ia].point_index < b.points[ib].point_index) {
      ++ia;
    } else if (b.points[ib].point_index < a.points[ia].point_index) {
      ++ib;
    } else {
      double du = a.points[ia].u - b.points[ib].u;
      double dv = a.points[ia].v - b.points[ib].v;
      disp.push_back(std::hypot(du, dv));
      ++ia;
      ++ib;
    }
  }
  if (disp.empty()) {
    throw EmptyOverlapError(
        "misalignment_metric: no point retained under both transforms");
  }

  MisalignmentStats stats;
  stats.matched = disp.size();
  double sum = 0.0;
  for (double d : disp) sum += d;
  stats.mean_px = sum / static_cast<double>(disp.size());
  std::sort(disp.begin(), disp.end());
  // Nearest-rank 95th percentile.
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(disp.size())));
  stats.p95_px = disp[std::max<std::size_t>(rank, 1) - 1];
  return stats;
}

}  // namespace v2xnoise

#endif  // V2XNOISE_CFAS_HPP
