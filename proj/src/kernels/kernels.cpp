#include "slabflow/kernels.hpp"

#include "slabflow/metric.hpp"
#include "slabflow/quality.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace slabflow::kernels {

namespace {

int g_threads = 1;

inline TetGeometry one_tet_geometry(const SimplexMesh& mesh, const Tet& t) {
  const Vec3& x0 = mesh.nodes[t[0]];
  Mat3 j;
  j.col(0) = mesh.nodes[t[1]] - x0;
  j.col(1) = mesh.nodes[t[2]] - x0;
  j.col(2) = mesh.nodes[t[3]] - x0;
  const double det = j.determinant();
  TetGeometry g;
  g.volume = det / 6.0;
  // Rows of J^{-1} are the gradients of barycentrics 1..3.
  const Mat3 inv = j.inverse();
  g.grad[1] = inv.row(0).transpose();
  g.grad[2] = inv.row(1).transpose();
  g.grad[3] = inv.row(2).transpose();
  g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
  return g;
}

inline double row_dot(const CsrView& a, std::span<const double> x, int r) {
  double s = 0.0;
  for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) s += a.values[k] * x[a.inner[k]];
  return s;
}

inline double one_squared_difference(const TetGeometry& g, const Tet& t, std::span<const double> a,
                                     std::span<const double> b) {
  double sum = 0.0, sum_sq = 0.0;
  for (int v : t) {
    const double d = a[v] - b[v];
    sum += d;
    sum_sq += d * d;
  }
  return g.volume / 20.0 * (sum_sq + sum * sum);
}

}  // namespace

void set_threads(int n) {
  g_threads = std::max(1, n);
#ifdef _OPENMP
  omp_set_num_threads(g_threads);
#endif
}

int threads() { return g_threads; }

namespace serial {

void tet_geometry(const SimplexMesh& mesh, std::span<TetGeometry> out) {
  for (std::size_t i = 0; i < mesh.tets.size(); ++i) out[i] = one_tet_geometry(mesh, mesh.tets[i]);
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  for (int r = 0; r < a.rows; ++r) y[r] = row_dot(a, x, r);
}

void metric_field(std::span<const Mat3> hessians, const MetricParams& params, std::span<Mat3> out) {
  for (std::size_t i = 0; i < hessians.size(); ++i) out[i] = metric_from_hessian(hessians[i], params);
}

void element_qualities(const SimplexMesh& mesh, std::span<const Mat3> metric, std::span<double> out) {
  for (std::size_t i = 0; i < mesh.tets.size(); ++i) out[i] = element_quality(mesh, static_cast<int>(i), metric);
}

void squared_difference(std::span<const TetGeometry> geom, const SimplexMesh& mesh, std::span<const double> a,
                        std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < mesh.tets.size(); ++i) out[i] = one_squared_difference(geom[i], mesh.tets[i], a, b);
}

}  // namespace serial

namespace omp {

void tet_geometry(const SimplexMesh& mesh, std::span<TetGeometry> out) {
  const long n = static_cast<long>(mesh.tets.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = one_tet_geometry(mesh, mesh.tets[i]);
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < a.rows; ++r) y[r] = row_dot(a, x, r);
}

void metric_field(std::span<const Mat3> hessians, const MetricParams& params, std::span<Mat3> out) {
  const long n = static_cast<long>(hessians.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = metric_from_hessian(hessians[i], params);
}

void element_qualities(const SimplexMesh& mesh, std::span<const Mat3> metric, std::span<double> out) {
  const long n = static_cast<long>(mesh.tets.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = element_quality(mesh, static_cast<int>(i), metric);
}

void squared_difference(std::span<const TetGeometry> geom, const SimplexMesh& mesh, std::span<const double> a,
                        std::span<const double> b, std::span<double> out) {
  const long n = static_cast<long>(mesh.tets.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = one_squared_difference(geom[i], mesh.tets[i], a, b);
}

}  // namespace omp

void tet_geometry(const SimplexMesh& mesh, std::span<TetGeometry> out) {
  g_threads > 1 ? omp::tet_geometry(mesh, out) : serial::tet_geometry(mesh, out);
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  g_threads > 1 ? omp::spmv(a, x, y) : serial::spmv(a, x, y);
}

void metric_field(std::span<const Mat3> hessians, const MetricParams& params, std::span<Mat3> out) {
  g_threads > 1 ? omp::metric_field(hessians, params, out) : serial::metric_field(hessians, params, out);
}

void element_qualities(const SimplexMesh& mesh, std::span<const Mat3> metric, std::span<double> out) {
  g_threads > 1 ? omp::element_qualities(mesh, metric, out) : serial::element_qualities(mesh, metric, out);
}

void squared_difference(std::span<const TetGeometry> geom, const SimplexMesh& mesh, std::span<const double> a,
                        std::span<const double> b, std::span<double> out) {
  g_threads > 1 ? omp::squared_difference(geom, mesh, a, b, out) : serial::squared_difference(geom, mesh, a, b, out);
}

}  // namespace slabflow::kernels
