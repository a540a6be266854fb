#include "slabflow/quality.hpp"

#include "slabflow/kernels.hpp"
#include "slabflow/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slabflow {

namespace {

// 6 sqrt(2): volume-to-rms-edge ratio normaliser of the regular tet.
const double kShapeNormaliser = 6.0 * std::sqrt(2.0);

}  // namespace

double size_factor(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return 0.0;
  const double m = std::min(x, 1.0 / x);
  const double f = m * (2.0 - m);
  return f * f * f;
}

double element_quality(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Mat3& metric) {
  const double vol = tet_volume(a, b, c, d);
  if (!(vol > 0.0)) return 0.0;
  const double det = metric.determinant();
  if (!(det > 0.0)) return 0.0;
  const std::array<Vec3, 6> edges{b - a, c - a, d - a, c - b, d - b, d - c};
  double sum_sq = 0.0, sum = 0.0;
  for (const Vec3& e : edges) {
    const double l2 = e.dot(metric * e);
    sum_sq += l2;
    sum += std::sqrt(l2);
  }
  const double rms = std::sqrt(sum_sq / 6.0);
  const double shape = kShapeNormaliser * vol * std::sqrt(det) / (rms * rms * rms);
  return std::clamp(shape, 0.0, 1.0) * size_factor(sum / 6.0);
}

double element_quality(const SimplexMesh& mesh, int tet, std::span<const Mat3> metric) {
  const Tet& t = mesh.tets[tet];
  const Mat3 m = 0.25 * (metric[t[0]] + metric[t[1]] + metric[t[2]] + metric[t[3]]);
  return element_quality(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]], m);
}

std::vector<std::array<int, 2>> mesh_edges(const SimplexMesh& mesh) {
  std::vector<std::array<int, 2>> edges;
  edges.reserve(mesh.tets.size() * 6);
  for (const Tet& t : mesh.tets) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) edges.push_back({std::min(t[i], t[j]), std::max(t[i], t[j])});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

QualityReport quality_report(const SimplexMesh& mesh, std::span<const Mat3> metric, double band_low,
                             double band_high) {
  QualityReport r;
  r.quality.resize(mesh.tets.size());
  kernels::element_qualities(mesh, metric, r.quality);
  r.min_quality = r.quality.empty() ? 0.0 : *std::min_element(r.quality.begin(), r.quality.end());
  double sum = 0.0;
  for (double q : r.quality) sum += q;
  r.mean_quality = r.quality.empty() ? 0.0 : sum / static_cast<double>(r.quality.size());

  r.bin_edges = {0.0, 0.5, 1.0 / std::sqrt(2.0), 1.0, std::sqrt(2.0), 2.0,
                 std::numeric_limits<double>::infinity()};
  r.histogram.assign(r.bin_edges.size() - 1, 0);
  r.band_low = band_low;
  r.band_high = band_high;
  const auto edges = mesh_edges(mesh);
  r.edge_count = edges.size();
  std::size_t in_band = 0;
  for (const auto& [a, b] : edges) {
    const double l = metric_edge_length(mesh.nodes[a], mesh.nodes[b], metric[a], metric[b]);
    if (l >= band_low && l <= band_high) ++in_band;
    const auto it = std::upper_bound(r.bin_edges.begin(), r.bin_edges.end(), l);
    const auto bin = std::clamp<std::ptrdiff_t>(it - r.bin_edges.begin() - 1, 0,
                                                static_cast<std::ptrdiff_t>(r.histogram.size()) - 1);
    ++r.histogram[bin];
  }
  r.fraction_in_band = edges.empty() ? 0.0 : static_cast<double>(in_band) / static_cast<double>(edges.size());
  return r;
}

}  // namespace slabflow
