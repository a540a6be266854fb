#pragma once

// Data-parallel loops of the simulator. Every kernel has a serial reference
// in `serial::` and an OpenMP version in `omp::` that performs the same
// per-item arithmetic, so both produce bit-identical output; reductions are
// always summed serially in item order. The unqualified entry points
// dispatch on the configured thread count (default 1).

#include "slabflow/mesh.hpp"

#include <array>
#include <span>

namespace slabflow {
struct MetricParams;
}

namespace slabflow::kernels {

void set_threads(int n);
int threads();

/// Volume and gradients of the four barycentric basis functions of a tet.
struct TetGeometry {
  double volume = 0.0;
  std::array<Vec3, 4> grad{};
};

/// Read-only view of a compressed-row sparse matrix.
struct CsrView {
  int rows = 0;
  const int* outer = nullptr;
  const int* inner = nullptr;
  const double* values = nullptr;
};

namespace serial {
void tet_geometry(const SimplexMesh& mesh, std::span<TetGeometry> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void metric_field(std::span<const Mat3> hessians, const MetricParams& params, std::span<Mat3> out);
void element_qualities(const SimplexMesh& mesh, std::span<const Mat3> metric, std::span<double> out);
void squared_difference(std::span<const TetGeometry> geom, const SimplexMesh& mesh, std::span<const double> a,
                        std::span<const double> b, std::span<double> out);
}  // namespace serial

namespace omp {
void tet_geometry(const SimplexMesh& mesh, std::span<TetGeometry> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void metric_field(std::span<const Mat3> hessians, const MetricParams& params, std::span<Mat3> out);
void element_qualities(const SimplexMesh& mesh, std::span<const Mat3> metric, std::span<double> out);
void squared_difference(std::span<const TetGeometry> geom, const SimplexMesh& mesh, std::span<const double> a,
                        std::span<const double> b, std::span<double> out);
}  // namespace omp

void tet_geometry(const SimplexMesh& mesh, std::span<TetGeometry> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void metric_field(std::span<const Mat3> hessians, const MetricParams& params, std::span<Mat3> out);
void element_qualities(const SimplexMesh& mesh, std::span<const Mat3> metric, std::span<double> out);
/// Per-tet exact integral of (a - b)^2 for P1 fields.
void squared_difference(std::span<const TetGeometry> geom, const SimplexMesh& mesh, std::span<const double> a,
                        std::span<const double> b, std::span<double> out);

}  // namespace slabflow::kernels
