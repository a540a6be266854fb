#include "slabflow/metric.hpp"

#include "slabflow/error.hpp"
#include "slabflow/fem.hpp"
#include "slabflow/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace slabflow {

namespace {

std::array<ScalarField, 3> project_gradient(const SimplexMesh& mesh, std::span<const kernels::TetGeometry> geom,
                                            LinearSystem& mass, std::span<const double> field, double rtol) {
  const int n = static_cast<int>(mesh.nodes.size());
  std::array<Eigen::VectorXd, 3> rhs;
  for (auto& r : rhs) r = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
    const Tet& t = mesh.tets[k];
    Vec3 g = Vec3::Zero();
    for (int i = 0; i < 4; ++i) g += field[t[i]] * geom[k].grad[i];
    const double w = 0.25 * geom[k].volume;
    for (int i = 0; i < 4; ++i) {
      for (int c = 0; c < 3; ++c) rhs[c][t[i]] += w * g[c];
    }
  }
  std::array<ScalarField, 3> out;
  for (int c = 0; c < 3; ++c) {
    mass.rhs = rhs[c];
    out[c] = solve_iterative(mass, rtol);
  }
  return out;
}

void check_spd(const Mat3& m, const char* what) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw PreconditionError(std::string(what) + ": metric is not symmetric");
  }
  Eigen::LLT<Mat3> llt(m);
  if (llt.info() != Eigen::Success) throw PreconditionError(std::string(what) + ": metric is not positive definite");
}

}  // namespace

std::array<ScalarField, 3> recover_gradient(const SimplexMesh& mesh, std::span<const double> field, double rtol) {
  if (field.size() != mesh.nodes.size()) throw PreconditionError("recover_gradient: field size mismatch");
  const auto geom = tet_geometry(mesh);
  LinearSystem mass = assemble_mass(mesh, geom);
  return project_gradient(mesh, geom, mass, field, rtol);
}

TensorField recover_hessian(const SimplexMesh& mesh, std::span<const double> field, double rtol) {
  if (field.size() != mesh.nodes.size()) throw PreconditionError("recover_hessian: field size mismatch");
  const auto geom = tet_geometry(mesh);
  LinearSystem mass = assemble_mass(mesh, geom);
  const auto grad = project_gradient(mesh, geom, mass, field, rtol);
  TensorField h(mesh.nodes.size(), Mat3::Zero());
  for (int c = 0; c < 3; ++c) {
    const auto second = project_gradient(mesh, geom, mass, grad[c], rtol);
    for (std::size_t i = 0; i < h.size(); ++i) {
      for (int d = 0; d < 3; ++d) h[i](c, d) = second[d][i];
    }
  }
  for (Mat3& m : h) m = 0.5 * (m + m.transpose()).eval();
  return h;
}

Mat3 metric_from_hessian(const Mat3& hessian, const MetricParams& params) {
  if (!(params.sigma > 0.0) || !(params.q >= 1.0) || !(params.h_min > 0.0) || !(params.h_max >= params.h_min)) {
    throw PreconditionError("metric_from_hessian: invalid parameters");
  }
  const Mat3 sym = 0.5 * (hessian + hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(sym);
  Vec3 mu = es.eigenvalues().cwiseAbs();
  const double largest = mu.maxCoeff();
  const double floor = kEigenFloor * (largest > 0.0 ? largest : 1.0);
  mu = mu.cwiseMax(floor);
  const double scale = std::pow(mu.prod(), -1.0 / (2.0 * params.q + 3.0));
  const Vec3 unscaled = scale * mu;
  const Mat3& v = es.eigenvectors();

  const double lo = 1.0 / (params.h_max * params.h_max);
  const double hi = 1.0 / (params.h_min * params.h_min);
  const double inv_sigma = 1.0 / params.sigma;
  const Vec3 scaled = unscaled * inv_sigma;
  if (scaled.minCoeff() >= lo && scaled.maxCoeff() <= hi) {
    // Unclamped: sigma enters only as a prefactor.
    const Mat3 base = v * unscaled.asDiagonal() * v.transpose();
    return base * inv_sigma;
  }
  const Vec3 clamped = scaled.cwiseMax(lo).cwiseMin(hi);
  return v * clamped.asDiagonal() * v.transpose();
}

TensorField metric_from_hessian(std::span<const Mat3> hessians, const MetricParams& params) {
  TensorField out(hessians.size());
  kernels::metric_field(hessians, params, out);
  return out;
}

Mat3 intersect_metrics(const Mat3& m1, const Mat3& m2) {
  check_spd(m1, "intersect_metrics");
  check_spd(m2, "intersect_metrics");
  const Mat3 a = 0.5 * (m1 + m1.transpose());
  const Mat3 b = 0.5 * (m2 + m2.transpose());
  // b v = lambda a v with P^T a P = I, P^T b P = diag(lambda).
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat3> ges(b, a);
  if (ges.info() != Eigen::Success) throw PreconditionError("intersect_metrics: reduction failed");
  const Mat3& p = ges.eigenvectors();
  const Vec3 lambda = ges.eigenvalues().cwiseMax(1.0);
  const Mat3 pinv = p.inverse();
  const Mat3 r = pinv.transpose() * lambda.asDiagonal() * pinv;
  return 0.5 * (r + r.transpose());
}

TensorField intersect_metrics(std::span<const Mat3> m1, std::span<const Mat3> m2) {
  if (m1.size() != m2.size()) throw PreconditionError("intersect_metrics: field size mismatch");
  TensorField out(m1.size());
  for (std::size_t i = 0; i < m1.size(); ++i) out[i] = intersect_metrics(m1[i], m2[i]);
  return out;
}

double metric_edge_length(const Vec3& a, const Vec3& b, const Mat3& ma, const Mat3& mb) {
  const Vec3 e = b - a;
  return std::sqrt(0.5 * e.dot((ma + mb) * e));
}

Mat3 spd_floor(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(sym);
  Vec3 ev = es.eigenvalues();
  const double largest = ev.maxCoeff();
  const double floor = kEigenFloor * (largest > 0.0 ? largest : 1.0);
  ev = ev.cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace slabflow
