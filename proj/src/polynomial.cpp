#include "tracefem/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tracefem {

Basis1D lagrange_1d(int degree, double t) {
  Basis1D b;
  if (degree == 1) {
    b.v = {1.0 - t, t, 0.0};
    b.d1 = {-1.0, 1.0, 0.0};
  } else if (degree == 2) {
    b.v = {(2.0 * t - 3.0) * t + 1.0, 4.0 * t * (1.0 - t), (2.0 * t - 1.0) * t};
    b.d1 = {4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0};
    b.d2 = {4.0, -8.0, 4.0};
  } else {
    throw std::invalid_argument("lagrange_1d: degree must be 1 or 2");
  }
  return b;
}

namespace {

GaussRule1D make_gauss(int n) {
  GaussRule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int m = 2; m <= n; ++m) {
      const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.points[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule1D& gauss_legendre(int n) {
  static const std::vector<GaussRule1D> rules = [] {
    std::vector<GaussRule1D> v(17);
    for (int m = 1; m <= 16; ++m) v[m] = make_gauss(m);
    return v;
  }();
  if (n < 1 || n > 16) throw std::invalid_argument("gauss_legendre: 1 <= n <= 16 required");
  return rules[n];
}

std::vector<double> roots_in_interval(int degree, std::span<const double> nodal, double lo, double hi) {
  double A = 0.0, B = 0.0, C = nodal[0];
  if (degree == 1) {
    B = nodal[1] - nodal[0];
  } else {
    A = 2.0 * nodal[0] - 4.0 * nodal[1] + 2.0 * nodal[2];
    B = -3.0 * nodal[0] + 4.0 * nodal[1] - nodal[2];
  }
  std::vector<double> roots;
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (scale == 0.0) return roots;
  if (std::abs(A) <= 1e-13 * scale) {
    if (std::abs(B) <= 1e-13 * scale) return roots;
    roots.push_back(-C / B);
  } else {
    double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) {
      if (disc < -1e-13 * B * B) return roots;
      disc = 0.0;
    }
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    roots.push_back(q / A);
    if (q != 0.0) roots.push_back(C / q);
  }
  for (auto& r : roots) {
    for (int it = 0; it < 2; ++it) {
      const double d = 2.0 * A * r + B;
      if (d == 0.0) break;
      r -= ((A * r + B) * r + C) / d;
    }
  }
  const double margin = 1e-14 * (hi - lo);
  std::vector<double> inside;
  for (double r : roots)
    if (r > lo + margin && r < hi - margin) inside.push_back(r);
  std::sort(inside.begin(), inside.end());
  return inside;
}

int BernsteinBox::strict_sign() const {
  const int m = size();
  bool pos = true, neg = true;
  for (int i = 0; i < m; ++i) {
    pos = pos && b[i] > 0.0;
    neg = neg && b[i] < 0.0;
  }
  return pos ? 1 : (neg ? -1 : 0);
}

bool BernsteinBox::mixed_sign() const {
  bool pos = false, neg = false;
  for (int i = 0; i < size(); ++i) {
    pos = pos || b[i] > 0.0;
    neg = neg || b[i] < 0.0;
  }
  return pos && neg;
}

int BernsteinBox::derivative_sign(int axis) const {
  if (n[axis] < 2) return 0;
  bool pos = true, neg = true;
  std::array<int, 3> idx{};
  for (idx[2] = 0; idx[2] < n[2]; ++idx[2])
    for (idx[1] = 0; idx[1] < n[1]; ++idx[1])
      for (idx[0] = 0; idx[0] < n[0]; ++idx[0]) {
        if (idx[axis] + 1 >= n[axis]) continue;
        auto nxt = idx;
        ++nxt[axis];
        const double d = at(nxt[0], nxt[1], nxt[2]) - at(idx[0], idx[1], idx[2]);
        pos = pos && d > 0.0;
        neg = neg && d < 0.0;
      }
  return pos ? 1 : (neg ? -1 : 0);
}

CellPolynomial::CellPolynomial(int degree, const Vec3& lower, double size, std::span<const double> nodal)
    : k_(degree), lower_(lower), size_(size) {
  if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("CellPolynomial: degree must be 1 or 2");
  if (static_cast<int>(nodal.size()) != nodes_per_cell(degree))
    throw std::invalid_argument("CellPolynomial: wrong number of nodal values");
  std::copy(nodal.begin(), nodal.end(), c_.begin());
}

double CellPolynomial::value_reference(const Vec3& t) const {
  const auto bx = lagrange_1d(k_, t[0]), by = lagrange_1d(k_, t[1]), bz = lagrange_1d(k_, t[2]);
  const int n = k_ + 1;
  double v = 0.0;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      const double yz = by.v[j] * bz.v[l];
      const double* c = &c_[n * (j + n * l)];
      for (int i = 0; i < n; ++i) v += c[i] * bx.v[i] * yz;
    }
  return v;
}

double CellPolynomial::value(const Vec3& x) const { return value_reference(to_reference(x)); }

Vec3 CellPolynomial::gradient(const Vec3& x) const {
  Vec3 g;
  evaluate(x, nullptr, &g, nullptr);
  return g;
}

void CellPolynomial::evaluate(const Vec3& x, double* value, Vec3* grad, Mat3* hess) const {
  const Vec3 t = to_reference(x);
  const auto bx = lagrange_1d(k_, t[0]), by = lagrange_1d(k_, t[1]), bz = lagrange_1d(k_, t[2]);
  const int n = k_ + 1;
  double v = 0.0;
  Vec3 g = Vec3::Zero();
  Mat3 H = Mat3::Zero();
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double c = c_[i + n * (j + n * l)];
        if (c == 0.0) continue;
        v += c * bx.v[i] * by.v[j] * bz.v[l];
        if (grad || hess) {
          g[0] += c * bx.d1[i] * by.v[j] * bz.v[l];
          g[1] += c * bx.v[i] * by.d1[j] * bz.v[l];
          g[2] += c * bx.v[i] * by.v[j] * bz.d1[l];
        }
        if (hess) {
          H(0, 0) += c * bx.d2[i] * by.v[j] * bz.v[l];
          H(1, 1) += c * bx.v[i] * by.d2[j] * bz.v[l];
          H(2, 2) += c * bx.v[i] * by.v[j] * bz.d2[l];
          H(0, 1) += c * bx.d1[i] * by.d1[j] * bz.v[l];
          H(0, 2) += c * bx.d1[i] * by.v[j] * bz.d1[l];
          H(1, 2) += c * bx.v[i] * by.d1[j] * bz.d1[l];
        }
      }
  if (value) *value = v;
  if (grad) *grad = g / size_;
  if (hess) {
    H(1, 0) = H(0, 1);
    H(2, 0) = H(0, 2);
    H(2, 1) = H(1, 2);
    *hess = H / (size_ * size_);
  }
}

std::array<double, kMaxDegree + 1> CellPolynomial::line_nodal(int axis, const Vec3& t) const {
  const int n = k_ + 1;
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const auto b1 = lagrange_1d(k_, t[a1]), b2 = lagrange_1d(k_, t[a2]);
  std::array<double, kMaxDegree + 1> out{};
  std::array<int, 3> idx{};
  for (int m = 0; m < n; ++m) {
    double s = 0.0;
    idx[axis] = m;
    for (int q = 0; q < n; ++q)
      for (int p = 0; p < n; ++p) {
        idx[a1] = p;
        idx[a2] = q;
        s += c_[idx[0] + n * (idx[1] + n * idx[2])] * b1.v[p] * b2.v[q];
      }
    out[m] = s;
  }
  return out;
}

BernsteinBox CellPolynomial::bernstein(const Vec3& lo, const Vec3& hi) const {
  BernsteinBox box;
  for (int a = 0; a < 3; ++a) box.n[a] = hi[a] > lo[a] ? k_ + 1 : 1;
  for (int l = 0; l < box.n[2]; ++l)
    for (int j = 0; j < box.n[1]; ++j)
      for (int i = 0; i < box.n[0]; ++i) {
        Vec3 t;
        const int id[3] = {i, j, l};
        for (int a = 0; a < 3; ++a)
          t[a] = box.n[a] > 1 ? lo[a] + (hi[a] - lo[a]) * id[a] / k_ : lo[a];
        box.at(i, j, l) = value_reference(t);
      }
  if (k_ == 2) {
    // Lagrange (0, 1/2, 1) -> Bernstein: middle coefficient (4 v_mid - v0 - v1) / 2.
    for (int a = 0; a < 3; ++a) {
      if (box.n[a] < 3) continue;
      std::array<int, 3> idx{};
      for (idx[2] = 0; idx[2] < box.n[2]; ++idx[2])
        for (idx[1] = 0; idx[1] < box.n[1]; ++idx[1])
          for (idx[0] = 0; idx[0] < box.n[0]; ++idx[0]) {
            if (idx[a] != 1) continue;
            auto i0 = idx, i2 = idx;
            i0[a] = 0;
            i2[a] = 2;
            double& mid = box.at(idx[0], idx[1], idx[2]);
            mid = 0.5 * (4.0 * mid - box.at(i0[0], i0[1], i0[2]) - box.at(i2[0], i2[1], i2[2]));
          }
    }
  }
  return box;
}

}  // namespace tracefem
