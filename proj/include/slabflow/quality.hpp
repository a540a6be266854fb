#pragma once

#include "slabflow/mesh.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace slabflow {

/// Size-conformity factor F(x) = (min(x,1/x) (2 - min(x,1/x)))^3.
double size_factor(double mean_edge_length);

/// Vassilevski-type element quality in [0, 1]: metric-space shape
/// regularity times the size factor of the mean metric edge length. The
/// metric is the average of the four vertex tensors. Degenerate or
/// inverted elements score 0; a regular unit-edge element scores 1.
double element_quality(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Mat3& metric);
double element_quality(const SimplexMesh& mesh, int tet, std::span<const Mat3> metric);

/// Edge-length distribution and element qualities of a mesh under a metric.
struct QualityReport {
  std::vector<double> quality;  // per tet
  double min_quality = 0.0;
  double mean_quality = 0.0;
  std::size_t edge_count = 0;
  /// Histogram of metric edge lengths; bin i spans [edges[i], edges[i+1]).
  std::vector<double> bin_edges;
  std::vector<std::size_t> histogram;
  /// Fraction of edges whose metric length is in [band_low, band_high].
  double band_low = 0.0, band_high = 0.0;
  double fraction_in_band = 0.0;
};

QualityReport quality_report(const SimplexMesh& mesh, std::span<const Mat3> metric, double band_low,
                             double band_high);

/// Unique edges of the tet set as (lo, hi) pairs in ascending order.
std::vector<std::array<int, 2>> mesh_edges(const SimplexMesh& mesh);

}  // namespace slabflow
