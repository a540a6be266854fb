#pragma once

#include "slabflow/mesh.hpp"

#include <array>
#include <span>
#include <vector>

namespace slabflow {

using ScalarField = std::vector<double>;
using TensorField = std::vector<Mat3>;

/// Parameters of the interpolation-error metric
///   M = (1/sigma) det(|H|)^(-1/(2q+d)) |H|,  d = 3,
/// with eigenvalues clamped to [1/h_max^2, 1/h_min^2].
struct MetricParams {
  double sigma = 0.01;
  double q = 2.0;
  double h_min = 1e-3;
  double h_max = 2.0;
};

/// Relative floor applied to |H| eigenvalues and interpolated metrics.
inline constexpr double kEigenFloor = 1e-10;

/// Galerkin projection of the element-wise gradient onto P1 (consistent
/// mass matrix, conjugate-gradient solve to relative residual `rtol`).
std::array<ScalarField, 3> recover_gradient(const SimplexMesh& mesh, std::span<const double> field,
                                            double rtol = 1e-10);

/// Two successive gradient projections, symmetrised.
TensorField recover_hessian(const SimplexMesh& mesh, std::span<const double> field, double rtol = 1e-10);

Mat3 metric_from_hessian(const Mat3& hessian, const MetricParams& params);
TensorField metric_from_hessian(std::span<const Mat3> hessians, const MetricParams& params);

/// Largest ellipsoid contained in both metric unit balls (simultaneous
/// reduction). Throws PreconditionError on non-SPD input.
Mat3 intersect_metrics(const Mat3& m1, const Mat3& m2);
TensorField intersect_metrics(std::span<const Mat3> m1, std::span<const Mat3> m2);

/// sqrt(e^T M e) with M the arithmetic mean of the endpoint tensors.
double metric_edge_length(const Vec3& a, const Vec3& b, const Mat3& ma, const Mat3& mb);

/// Symmetrises and floors eigenvalues at kEigenFloor times the largest.
Mat3 spd_floor(const Mat3& m);

}  // namespace slabflow
