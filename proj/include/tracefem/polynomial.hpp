#pragma once

#include "tracefem/common.hpp"

#include <span>
#include <vector>

namespace tracefem {

inline constexpr int kMaxDegree = 2;
inline constexpr int kMaxNodes = (kMaxDegree + 1) * (kMaxDegree + 1) * (kMaxDegree + 1);

inline int nodes_per_cell(int degree) { return (degree + 1) * (degree + 1) * (degree + 1); }

/// Equispaced 1D Lagrange basis of degree k on [0,1] with first and second
/// derivatives.
struct Basis1D {
  std::array<double, kMaxDegree + 1> v{};
  std::array<double, kMaxDegree + 1> d1{};
  std::array<double, kMaxDegree + 1> d2{};
};
Basis1D lagrange_1d(int degree, double t);

/// Gauss-Legendre rule with n points on [0,1].
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};
const GaussRule1D& gauss_legendre(int n);

/// Real roots of the degree <= 2 polynomial through the Lagrange values
/// `nodal` (nodes 0, 1/k, .., 1) that lie strictly inside (lo, hi).
std::vector<double> roots_in_interval(int degree, std::span<const double> nodal, double lo, double hi);

/// Bernstein coefficients of a tensor polynomial over a (possibly flat) box.
/// Axes with a single node are restrictions to a coordinate plane.
struct BernsteinBox {
  std::array<int, 3> n{1, 1, 1};
  std::array<double, kMaxNodes> b{};

  double& at(int i, int j, int l) { return b[i + n[0] * (j + n[1] * l)]; }
  double at(int i, int j, int l) const { return b[i + n[0] * (j + n[1] * l)]; }
  int size() const { return n[0] * n[1] * n[2]; }
  /// +1 if all coefficients > 0, -1 if all < 0, 0 otherwise.
  int strict_sign() const;
  /// True if some coefficients are negative and others positive.
  bool mixed_sign() const;
  /// +1/-1 if the derivative along `axis` has a strict sign on the box.
  int derivative_sign(int axis) const;
};

/// Q_k polynomial on an axis-aligned cube given by its values at the
/// equispaced Lagrange nodes, local index i + (k+1)(j + (k+1) l).
class CellPolynomial {
 public:
  CellPolynomial() = default;
  CellPolynomial(int degree, const Vec3& lower, double size, std::span<const double> nodal);

  int degree() const { return k_; }
  const Vec3& lower() const { return lower_; }
  double size() const { return size_; }
  std::span<const double> nodal() const { return {c_.data(), static_cast<std::size_t>(nodes_per_cell(k_))}; }

  Vec3 to_reference(const Vec3& x) const { return (x - lower_) / size_; }
  Vec3 to_physical(const Vec3& t) const { return lower_ + size_ * t; }

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  /// Physical value, gradient and Hessian (any pointer may be null).
  void evaluate(const Vec3& x, double* value, Vec3* grad, Mat3* hess) const;

  /// Values at the k+1 Lagrange nodes of the line through reference point `t`
  /// along `axis` (the coordinate t[axis] is ignored).
  std::array<double, kMaxDegree + 1> line_nodal(int axis, const Vec3& t) const;

  /// Bernstein form over the reference sub-box [lo, hi]; an axis with
  /// lo == hi is restricted to that plane.
  BernsteinBox bernstein(const Vec3& lo, const Vec3& hi) const;

  double value_reference(const Vec3& t) const;

 private:
  int k_ = 1;
  Vec3 lower_ = Vec3::Zero();
  double size_ = 1.0;
  std::array<double, kMaxNodes> c_{};
};

}  // namespace tracefem
