#pragma once

#include <Eigen/Sparse>

#include <map>
#include <vector>

namespace slabflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Assembled system with Dirichlet constraints kept separate until solve.
struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::map<int, double> dirichlet;  // node -> prescribed value
  bool symmetric = false;
};

/// The matrix and right-hand side with constraints applied. Symmetric
/// systems use symmetric elimination (constrained rows and columns replaced
/// by identity, values moved to the rhs); others use row replacement.
struct ConstrainedSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

ConstrainedSystem apply_constraints(const LinearSystem& sys);

/// Sparse LU factorisation and solve. Throws SolverError on a singular
/// matrix or when the relative residual exceeds 1e-9.
std::vector<double> solve_direct(const LinearSystem& sys);

struct IterativeResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients on the constrained system.
/// Requires `sys.symmetric`; iteration cap 10 n. Throws SolverError on
/// non-convergence.
IterativeResult solve_iterative_detailed(const LinearSystem& sys, double rtol = 1e-10,
                                         const std::vector<double>* initial_guess = nullptr);
std::vector<double> solve_iterative(const LinearSystem& sys, double rtol = 1e-10);

}  // namespace slabflow
