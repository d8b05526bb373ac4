#include "tracefem/solver.hpp"

#include "tracefem/assembly.hpp"

#include <cmath>
#include <numeric>

namespace tracefem {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double residual_norm(const CsrMatrix& a, std::span<const double> b, std::span<const double> x, std::vector<double>& r) {
  a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return std::sqrt(dot(r, r));
}

// Upper triangle plus diagonal of a symmetric matrix; halves the memory
// traffic of a product.
struct UpperTriangle {
  std::vector<int> row_ptr{0};
  std::vector<int> cols;
  std::vector<double> values;
  std::vector<double> diag;

  explicit UpperTriangle(const CsrMatrix& a) : diag(a.rows(), 0.0) {
    const auto rp = a.row_ptr();
    const auto c = a.cols();
    const auto v = a.values();
    row_ptr.reserve(a.rows() + 1);
    cols.reserve(a.nnz() / 2 + 1);
    values.reserve(a.nnz() / 2 + 1);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (int p = rp[r]; p < rp[r + 1]; ++p) {
        if (c[p] == static_cast<int>(r)) {
          diag[r] = v[p];
        } else if (c[p] > static_cast<int>(r)) {
          cols.push_back(c[p]);
          values.push_back(v[p]);
        }
      }
      row_ptr.push_back(static_cast<int>(cols.size()));
    }
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = diag.size();
    for (std::size_t r = 0; r < n; ++r) y[r] = diag[r] * x[r];
    for (std::size_t r = 0; r < n; ++r) {
      const double xr = x[r];
      double s = 0.0;
      for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
        s += values[p] * x[cols[p]];
        y[cols[p]] += values[p] * xr;
      }
      y[r] += s;
    }
  }
};

}  // namespace

SolveReport pcg(const CsrMatrix& a, std::span<const double> b, std::span<double> x, const SolverOptions& options) {
  const std::size_t n = a.rows();
  if (b.size() != n || x.size() != n) throw std::invalid_argument("pcg: size mismatch");
  SolveReport rep;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("pcg: non-positive diagonal entry");
    d = 1.0 / d;
  }
  const UpperTriangle upper(a);
  std::vector<double> r(n), z(n), p(n), q(n);
  double rnorm = residual_norm(a, b, x, r);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  const double target = options.rel_tol * bnorm;

  int it = 0;
  int restarts = 0;
  while (rnorm > target && it < options.max_iter) {
    upper.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("pcg: non-positive curvature, matrix is not positive definite");
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++it;
    rnorm = std::sqrt(dot(r, r));
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    if (rnorm <= target) {
      // the recursive residual drifts from b - Ax on hard problems; restart
      // from the current iterate until the true residual is small enough
      rnorm = residual_norm(a, b, x, r);
      if (rnorm <= target || ++restarts > 50) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      p = z;
      rz = dot(r, z);
      continue;
    }
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  rep.iterations = it;
  rep.relative_residual = residual_norm(a, b, x, r) / bnorm;
  rep.converged = rep.relative_residual <= options.rel_tol;
  return rep;
}

Solution solve(const TraceSystem& system, const SolverOptions& options, std::span<const double> initial) {
  if (!system.space) throw std::invalid_argument("solve: system has no discretization");
  const auto& cons = system.space->constraints();
  std::vector<double> x(system.rhs.size(), 0.0);
  if (!initial.empty()) {
    if (initial.size() != cons.n_dofs()) throw std::invalid_argument("solve: initial guess has the wrong size");
    for (std::size_t d = 0; d < initial.size(); ++d)
      if (const int f = cons.free_index(static_cast<int>(d)); f >= 0) x[f] = initial[d];
  }
  Solution sol;
  sol.report = pcg(system.matrix, system.rhs, x, options);
  sol.values = cons.expand(x);
  return sol;
}

}  // namespace tracefem
