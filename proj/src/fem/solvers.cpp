#include "slabflow/solvers.hpp"

#include "slabflow/error.hpp"
#include "slabflow/kernels.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace slabflow {

ConstrainedSystem apply_constraints(const LinearSystem& sys) {
  const int n = static_cast<int>(sys.matrix.rows());
  if (sys.matrix.cols() != n || sys.rhs.size() != n) throw PreconditionError("linear system is not square");
  std::vector<double> fixed(n, 0.0);
  std::vector<std::uint8_t> is_fixed(n, 0);
  for (const auto& [node, value] : sys.dirichlet) {
    if (node < 0 || node >= n) throw PreconditionError("Dirichlet node out of range");
    is_fixed[node] = 1;
    fixed[node] = value;
  }

  ConstrainedSystem out;
  out.rhs = sys.rhs;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sys.matrix.nonZeros());
  for (int r = 0; r < n; ++r) {
    if (is_fixed[r]) {
      triplets.emplace_back(r, r, 1.0);
      out.rhs[r] = fixed[r];
      continue;
    }
    for (SparseMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (sys.symmetric && is_fixed[c]) {
        out.rhs[r] -= it.value() * fixed[c];
      } else {
        triplets.emplace_back(r, c, it.value());
      }
    }
  }
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  return out;
}

std::vector<double> solve_direct(const LinearSystem& sys) {
  const ConstrainedSystem cs = apply_constraints(sys);
  const Eigen::SparseMatrix<double> a = cs.matrix;  // column-major copy for SparseLU
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse LU factorisation failed: " + lu.lastErrorMessage());
  }
  Eigen::VectorXd x = lu.solve(cs.rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("sparse LU solve failed");
  const double bnorm = cs.rhs.norm();
  const double res = (cs.matrix * x - cs.rhs).norm();
  if (bnorm > 0.0 && res > 1e-9 * bnorm) {
    std::ostringstream os;
    os << "direct solve residual " << res / bnorm << " exceeds 1e-9";
    throw SolverError(os.str());
  }
  for (const auto& [node, value] : sys.dirichlet) x[node] = value;
  return {x.data(), x.data() + x.size()};
}

IterativeResult solve_iterative_detailed(const LinearSystem& sys, double rtol,
                                         const std::vector<double>* initial_guess) {
  if (!sys.symmetric) throw PreconditionError("solve_iterative requires a symmetric system");
  const ConstrainedSystem cs = apply_constraints(sys);
  const int n = static_cast<int>(cs.matrix.rows());
  const kernels::CsrView view{n, cs.matrix.outerIndexPtr(), cs.matrix.innerIndexPtr(), cs.matrix.valuePtr()};

  std::vector<double> inv_diag(n, 1.0);
  for (int r = 0; r < n; ++r) {
    const double d = cs.matrix.coeff(r, r);
    if (!(d > 0.0)) throw SolverError("solve_iterative: non-positive diagonal, matrix is not SPD");
    inv_diag[r] = 1.0 / d;
  }
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };

  IterativeResult res;
  res.x.assign(n, 0.0);
  if (initial_guess && static_cast<int>(initial_guess->size()) == n) res.x = *initial_guess;
  for (const auto& [node, value] : sys.dirichlet) res.x[node] = value;

  std::vector<double> b(cs.rhs.data(), cs.rhs.data() + n);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    res.x.assign(n, 0.0);
    return res;
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  kernels::spmv(view, res.x, q);
  for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rnorm = std::sqrt(dot(r, r));
  const int cap = std::max(10 * n, 10);
  int it = 0;
  while (rnorm > rtol * bnorm) {
    if (it >= cap) {
      std::ostringstream os;
      os << "conjugate gradients did not converge in " << cap << " iterations (relative residual "
         << rnorm / bnorm << ")";
      throw SolverError(os.str());
    }
    kernels::spmv(view, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("conjugate gradients broke down: matrix is not SPD");
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = std::sqrt(dot(r, r));
    ++it;
  }
  res.iterations = it;
  res.relative_residual = rnorm / bnorm;
  return res;
}

std::vector<double> solve_iterative(const LinearSystem& sys, double rtol) {
  return solve_iterative_detailed(sys, rtol).x;
}

}  // namespace slabflow
