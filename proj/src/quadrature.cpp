#include "tracefem/quadrature.hpp"

#include "tracefem/levelset.hpp"

#include <algorithm>
#include <cmath>

namespace tracefem {

double SurfaceQuadrature::measure() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

inline int sgn(double v) { return v < 0.0 ? -1 : 1; }

class SurfaceRuleBuilder {
 public:
  SurfaceRuleBuilder(const CellPolynomial& phi, const CellId& cell, const SurfaceRuleOptions& opt)
      : phi_(phi), cell_(cell), opt_(opt), gauss_(gauss_legendre(opt.order)) {
    out_.cell = cell;
  }

  SurfaceQuadrature run() {
    if (phi_.bernstein(Vec3::Zero(), Vec3::Ones()).strict_sign() != 0) return std::move(out_);
    const Vec3 g = phi_.gradient(phi_.to_physical(Vec3::Constant(0.5)));
    height_ = 0;
    for (int a = 1; a < 3; ++a)
      if (std::abs(g[a]) > std::abs(g[height_])) height_ = a;
    base_[0] = (height_ + 1) % 3;
    base_[1] = (height_ + 2) % 3;
    if (base_[0] > base_[1]) std::swap(base_[0], base_[1]);
    column_region({0.0, 0.0}, {1.0, 1.0}, 0);
    return std::move(out_);
  }

 private:
  using Pair = std::array<double, 2>;

  Vec3 reference_point(const Pair& s, double t_height) const {
    Vec3 t;
    t[base_[0]] = s[0];
    t[base_[1]] = s[1];
    t[height_] = t_height;
    return t;
  }

  // Base rectangles are bisected until phi is monotone along the height axis
  // over the whole column.
  void column_region(const Pair& lo, const Pair& hi, int depth) {
    const auto box = phi_.bernstein(reference_point(lo, 0.0), reference_point(hi, 1.0));
    if (box.strict_sign() != 0) return;
    if (box.derivative_sign(height_) != 0) {
      base_region(lo, hi, 0);
      return;
    }
    if (depth >= opt_.max_depth) throw GeometryError(cell_, "surface_rule: degenerate cut");
    split(lo, hi, [&](const Pair& l, const Pair& h) { column_region(l, h, depth + 1); });
  }

  template <class F>
  static void split(const Pair& lo, const Pair& hi, F&& f) {
    const Pair mid{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
    for (int q = 0; q < 4; ++q) {
      const Pair l{(q & 1) ? mid[0] : lo[0], (q & 2) ? mid[1] : lo[1]};
      const Pair h{(q & 1) ? hi[0] : mid[0], (q & 2) ? hi[1] : mid[1]};
      f(l, h);
    }
  }

  // The column integrand is smooth away from the zero curves of phi on the
  // bottom (t = 0) and top (t = 1) faces; integrate the base piecewise.
  void base_region(const Pair& lo, const Pair& hi, int depth) {
    std::array<double, 2> active{};
    int n_active = 0;
    std::array<BernsteinBox, 2> faces;
    for (double tau : {0.0, 1.0}) {
      auto b = phi_.bernstein(reference_point(lo, tau), reference_point(hi, tau));
      // a face where phi only touches zero does not bound a column piece
      if (b.mixed_sign()) {
        faces[n_active] = b;
        active[n_active++] = tau;
      }
    }
    if (n_active == 0) {
      tensor_base(lo, hi);
      return;
    }
    // inner axis: every active face function must be monotone along it
    const Vec3 tc = reference_point({0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}, active[0]);
    const Vec3 gc = phi_.gradient(phi_.to_physical(tc));
    std::array<int, 2> order{0, 1};
    if (std::abs(gc[base_[1]]) > std::abs(gc[base_[0]])) order = {1, 0};
    for (int e : order) {
      bool monotone = true;
      for (int i = 0; i < n_active; ++i) monotone = monotone && faces[i].derivative_sign(base_[e]) != 0;
      if (monotone) {
        split_integrate(lo, hi, e, std::span<const double>(active.data(), n_active));
        return;
      }
    }
    if (depth < opt_.max_depth) {
      split(lo, hi, [&](const Pair& l, const Pair& h) { base_region(l, h, depth + 1); });
      return;
    }
    // A closed loop of the face curve below the bisection resolution; its
    // area is negligible, columns are still integrated pointwise.
    tensor_base(lo, hi);
  }

  void tensor_base(const Pair& lo, const Pair& hi) {
    const double w0 = hi[0] - lo[0], w1 = hi[1] - lo[1];
    for (std::size_t j = 0; j < gauss_.points.size(); ++j)
      for (std::size_t i = 0; i < gauss_.points.size(); ++i)
        column({lo[0] + w0 * gauss_.points[i], lo[1] + w1 * gauss_.points[j]},
               w0 * w1 * gauss_.weights[i] * gauss_.weights[j]);
  }

  static std::vector<double> breakpoints(double lo, double hi, std::vector<double> roots) {
    roots.push_back(lo);
    roots.push_back(hi);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
  }

  void split_integrate(const Pair& lo, const Pair& hi, int inner, std::span<const double> taus) {
    const int outer = 1 - inner;
    const int k = phi_.degree();
    const int ax_in = base_[inner], ax_out = base_[outer];

    std::vector<double> roots;
    for (double tau : taus)
      for (double edge : {lo[inner], hi[inner]}) {
        Vec3 t = Vec3::Zero();
        t[height_] = tau;
        t[ax_in] = edge;
        const auto line = phi_.line_nodal(ax_out, t);
        for (double r : roots_in_interval(k, line, lo[outer], hi[outer])) roots.push_back(r);
      }
    const auto outer_breaks = breakpoints(lo[outer], hi[outer], std::move(roots));

    for (std::size_t p = 0; p + 1 < outer_breaks.size(); ++p) {
      const double a = outer_breaks[p], b = outer_breaks[p + 1];
      if (b - a <= 0.0) continue;
      for (std::size_t i = 0; i < gauss_.points.size(); ++i) {
        const double so = a + (b - a) * gauss_.points[i];
        const double wo = (b - a) * gauss_.weights[i];
        std::vector<double> inner_roots;
        for (double tau : taus) {
          Vec3 t = Vec3::Zero();
          t[height_] = tau;
          t[ax_out] = so;
          const auto line = phi_.line_nodal(ax_in, t);
          for (double r : roots_in_interval(k, line, lo[inner], hi[inner])) inner_roots.push_back(r);
        }
        const auto inner_breaks = breakpoints(lo[inner], hi[inner], std::move(inner_roots));
        for (std::size_t q = 0; q + 1 < inner_breaks.size(); ++q) {
          const double c = inner_breaks[q], d = inner_breaks[q + 1];
          if (d - c <= 0.0) continue;
          for (std::size_t j = 0; j < gauss_.points.size(); ++j) {
            Pair s;
            s[outer] = so;
            s[inner] = c + (d - c) * gauss_.points[j];
            column(s, wo * (d - c) * gauss_.weights[j]);
          }
        }
      }
    }
  }

  double find_root(const std::array<double, kMaxDegree + 1>& line, double f0) const {
    const int k = phi_.degree();
    double lo = 0.0, hi = 1.0;
    const double f1 = line[k];
    double t = f0 / (f0 - f1);
    for (int it = 0; it < 100; ++it) {
      const auto b = lagrange_1d(k, t);
      double f = 0.0, df = 0.0;
      for (int m = 0; m <= k; ++m) {
        f += line[m] * b.v[m];
        df += line[m] * b.d1[m];
      }
      if (f == 0.0) return t;
      if (sgn(f) == sgn(f0))
        lo = t;
      else
        hi = t;
      double next = df != 0.0 ? t - f / df : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - t) < opt_.tol_root || hi - lo < opt_.tol_root;
      t = next;
      if (done) break;
    }
    return t;
  }

  void column(const Pair& s, double w, bool nudged = false) {
    const Vec3 t0 = reference_point(s, 0.0);
    const auto line = phi_.line_nodal(height_, t0);
    const int k = phi_.degree();
    const double f0 = line[0], f1 = line[k];
    if (sgn(f0) == sgn(f1)) return;
    Vec3 t = t0;
    t[height_] = find_root(line, f0);
    const Vec3 x = phi_.to_physical(t);
    if (!nudged) {
      for (const auto& p : opt_.avoid_points)
        if ((x - p).norm() < 1e-12) {
          Pair s2 = s;
          s2[0] += (s2[0] < 0.5 ? 1e-9 : -1e-9);
          column(s2, w, true);
          return;
        }
    }
    const Vec3 g = phi_.gradient(x);
    const double gn = g.norm();
    const double h = phi_.size();
    if (!(gn > 1e-10 / h) || g[height_] == 0.0)
      throw GeometryError(cell_, "surface_rule: degenerate level-set gradient");
    out_.points.push_back(x);
    out_.weights.push_back(w * h * h * gn / std::abs(g[height_]));
  }

  const CellPolynomial& phi_;
  CellId cell_;
  const SurfaceRuleOptions& opt_;
  const GaussRule1D& gauss_;
  int height_ = 2;
  std::array<int, 2> base_{0, 1};
  SurfaceQuadrature out_;
};

}  // namespace

SurfaceQuadrature surface_rule(const CellPolynomial& phi, const CellId& cell, const SurfaceRuleOptions& options) {
  if (options.order < 1) throw std::invalid_argument("surface_rule: order must be at least 1");
  return SurfaceRuleBuilder(phi, cell, options).run();
}

SurfaceQuadrature surface_rule(const LevelSetField& field, const CellId& cell, const SurfaceRuleOptions& options) {
  return surface_rule(field.on_cell(cell), cell, options);
}

TensorQuadrature box_rule(const Vec3& lower, double size, int order) {
  const auto& g = gauss_legendre(order);
  TensorQuadrature q;
  q.order = order;
  const int n = order;
  q.points.reserve(n * n * n);
  q.weights.reserve(n * n * n);
  const double vol = size * size * size;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        q.points.push_back(lower + size * Vec3(g.points[i], g.points[j], g.points[l]));
        q.weights.push_back(vol * g.weights[i] * g.weights[j] * g.weights[l]);
      }
  return q;
}

TensorQuadrature cell_rule(const OctreeMesh& mesh, const CellId& cell, int order) {
  if (!mesh.is_active(cell)) throw std::out_of_range("cell_rule: inactive cell " + cell.str());
  return box_rule(mesh.cell_lower(cell), mesh.cell_size(cell.level), order);
}

TensorQuadrature face_rule(const FaceId& face, int order) {
  const auto& g = gauss_legendre(order);
  const int a1 = (face.axis + 1) % 3, a2 = (face.axis + 2) % 3;
  const double w1 = face.upper[a1] - face.lower[a1], w2 = face.upper[a2] - face.lower[a2];
  TensorQuadrature q;
  q.order = order;
  for (int j = 0; j < order; ++j)
    for (int i = 0; i < order; ++i) {
      Vec3 x = face.lower;
      x[a1] += w1 * g.points[i];
      x[a2] += w2 * g.points[j];
      q.points.push_back(x);
      q.weights.push_back(w1 * w2 * g.weights[i] * g.weights[j]);
    }
  return q;
}

}  // namespace tracefem
