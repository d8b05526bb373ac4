#pragma once

#include "tracefem/sparse.hpp"

#include <span>
#include <vector>

namespace tracefem {

struct TraceSystem;

struct SolverOptions {
  double rel_tol = 1e-10;
  int max_iter = 20000;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;  // recomputed from the returned iterate
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients. `x` holds the initial guess.
/// Throws SolverError on non-positive curvature or a non-positive diagonal.
SolveReport pcg(const CsrMatrix& a, std::span<const double> b, std::span<double> x, const SolverOptions& options);

struct Solution {
  std::vector<double> values;  // every dof, constrained ones filled from their masters
  SolveReport report;
};

/// `initial`, if given, is a full dof vector whose unconstrained entries start CG.
Solution solve(const TraceSystem& system, const SolverOptions& options, std::span<const double> initial = {});

}  // namespace tracefem
