#include "tracefem/assembly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace tracefem {

StabilizationKind parse_stabilization(const std::string& name) {
  if (name == "nv") return StabilizationKind::nv;
  if (name == "jf") return StabilizationKind::jf;
  throw ConfigError("unknown stabilization '" + name + "' (expected nv or jf)");
}

std::string to_string(StabilizationKind kind) { return kind == StabilizationKind::nv ? "nv" : "jf"; }

void StabilizationConfig::validate() const {
  for (double v : {rho_scale, sigma_F, sigma_Gamma, sigma_F_tilde, sigma_Gamma_tilde})
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("stabilization parameters must be finite and non-negative");
}

Discretization Discretization::build(const OctreeMesh& mesh, const LevelSetField& field, const CutClassification& cuts,
                                     int degree) {
  if (cuts.cut_cells.empty()) throw GeometryError(CellId{}, "no cut cells: the surface does not cross the mesh");
  Discretization d;
  d.mesh_ = &mesh;
  d.field_ = &field;
  d.cuts_ = &cuts;
  d.dofs_ = DofMap::build(mesh, cuts.cut_cells, degree);
  d.constraints_ = ConstraintSet::build(mesh, d.dofs_);

  d.rules_.reserve(d.dofs_.n_cells());
  for (const auto& c : d.dofs_.cells()) d.rules_.push_back(&cuts.surface_rules.at(c));

  const CellSet cut_set(cuts.cut_cells.begin(), cuts.cut_cells.end());
  d.faces_ = mesh.internal_faces(cut_set);
  const std::size_t nc = d.dofs_.n_cells();
  std::vector<int> count(nc + 1, 0);
  for (const auto& f : d.faces_) {
    d.face_minus_.push_back(d.dofs_.cell_index(f.minus_cell));
    d.face_plus_.push_back(d.dofs_.cell_index(f.plus_cell));
    ++count[d.face_minus_.back()];
    ++count[d.face_plus_.back()];
  }
  d.cell_face_ptr_.assign(nc + 1, 0);
  for (std::size_t ci = 0; ci < nc; ++ci) d.cell_face_ptr_[ci + 1] = d.cell_face_ptr_[ci] + count[ci];
  d.cell_face_idx_.resize(d.cell_face_ptr_[nc]);
  std::vector<int> fill(d.cell_face_ptr_.begin(), d.cell_face_ptr_.end() - 1);
  for (std::size_t f = 0; f < d.faces_.size(); ++f) {
    d.cell_face_idx_[fill[d.face_minus_[f]]++] = static_cast<int>(f);
    d.cell_face_idx_[fill[d.face_plus_[f]]++] = static_cast<int>(f);
  }

  const auto& cs = d.constraints_;
  d.exp_ptr_.assign(cs.n_dofs() + 1, 0);
  for (std::size_t dof = 0; dof < cs.n_dofs(); ++dof) {
    const int i = static_cast<int>(dof);
    if (!cs.is_constrained(i)) {
      d.exp_free_.push_back(cs.free_index(i));
      d.exp_coef_.push_back(1.0);
    } else {
      for (const auto& e : cs.masters(i)) {
        d.exp_free_.push_back(cs.free_index(e.master));
        d.exp_coef_.push_back(e.coefficient);
      }
    }
    d.exp_ptr_[dof + 1] = static_cast<int>(d.exp_free_.size());
  }
  return d;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Condenses a local block through the constraint expansions and adds it to
// the global system.
class Scatter {
 public:
  explicit Scatter(const Discretization& s) : s_(s) {}

  void prepare(std::span<const int> local) {
    free_.clear();
    for (int d : local)
      for (int i : s_.expansion_free(d)) free_.push_back(i);
    std::sort(free_.begin(), free_.end());
    free_.erase(std::unique(free_.begin(), free_.end()), free_.end());
    c_.setZero(static_cast<Eigen::Index>(local.size()), static_cast<Eigen::Index>(free_.size()));
    for (std::size_t a = 0; a < local.size(); ++a) {
      const auto idx = s_.expansion_free(local[a]);
      const auto coef = s_.expansion_coef(local[a]);
      for (std::size_t m = 0; m < idx.size(); ++m) {
        const auto pos = std::lower_bound(free_.begin(), free_.end(), idx[m]) - free_.begin();
        c_(static_cast<Eigen::Index>(a), pos) += coef[m];
      }
    }
  }

  const std::vector<int>& free() const { return free_; }

  void add(CsrMatrix& a, const MatrixXd& k) {
    const MatrixXd kc = c_.transpose() * k * c_;
    const auto ptr = a.row_ptr();
    const auto cols = a.cols();
    auto vals = a.values();
    for (std::size_t r = 0; r < free_.size(); ++r) {
      int p = ptr[free_[r]];
      for (std::size_t c = 0; c < free_.size(); ++c) {
        while (cols[p] < free_[c]) ++p;
        vals[p] += kc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }

  void add(std::vector<double>& rhs, const VectorXd& f) {
    const VectorXd fc = c_.transpose() * f;
    for (std::size_t r = 0; r < free_.size(); ++r) rhs[free_[r]] += fc[static_cast<Eigen::Index>(r)];
  }

 private:
  const Discretization& s_;
  std::vector<int> free_;
  MatrixXd c_;
};

bool uses_faces(const StabilizationConfig& stab) { return stab.kind == StabilizationKind::jf; }
bool higher_order_jf(const Discretization& s, const StabilizationConfig& stab) {
  return stab.kind == StabilizationKind::jf && s.degree() == 2;
}

std::vector<int> face_local_dofs(const Discretization& s, int f) {
  const auto m = s.dofs().cell_dofs(static_cast<std::size_t>(s.face_minus(f)));
  const auto p = s.dofs().cell_dofs(static_cast<std::size_t>(s.face_plus(f)));
  std::vector<int> out(m.begin(), m.end());
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TraceSystem assemble(const Discretization& s, const StabilizationConfig& stab, const ScalarField& f, unsigned terms) {
  stab.validate();
  const auto& dofs = s.dofs();
  const int n = dofs.dofs_per_cell();
  const int order = s.quadrature_order();
  const bool with_surface = terms & surface_terms;
  const bool with_stab = terms & stabilization_terms;
  const bool jf2 = higher_order_jf(s, stab);
  const bool faces = with_stab && uses_faces(stab);

  Scatter scatter(s);
  SparsityBuilder pattern(s.constraints().n_free());
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) {
    scatter.prepare(dofs.cell_dofs(ci));
    pattern.add_clique(scatter.free());
  }
  if (faces)
    for (std::size_t fi = 0; fi < s.faces().size(); ++fi) {
      scatter.prepare(face_local_dofs(s, static_cast<int>(fi)));
      pattern.add_clique(scatter.free());
    }

  TraceSystem sys;
  sys.space = &s;
  sys.matrix = pattern.build();
  sys.rhs.assign(s.constraints().n_free(), 0.0);

  ShapeValues sh;
  MatrixXd k(n, n), g(n, 3);
  VectorXd v(n), nd(n), hn(n), load(n);
  for (std::size_t ci = 0; ci < dofs.n_cells(); ++ci) {
    const CellId& cell = dofs.cell(ci);
    const auto& phi = s.field().on_cell(cell);
    const double h = dofs.cell_size(ci);
    k.setZero();
    load.setZero();

    if (with_surface || (with_stab && jf2)) {
      const auto& rule = s.surface_rule(ci);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3& x = rule.points[q];
        const double w = rule.weights[q];
        evaluate_shapes(dofs, ci, x, sh, jf2);
        Vec3 nrm;
        LevelSetField::normal_and_jacobian(phi, cell, x, nrm, nullptr);
        for (int a = 0; a < n; ++a) {
          v[a] = sh.value[a];
          g.row(a) = sh.grad[a].transpose();
          nd[a] = sh.grad[a].dot(nrm);
          if (jf2) hn[a] = nrm.dot(sh.hess[a] * nrm);
        }
        if (with_surface) {
          k.noalias() += w * (g * g.transpose() - nd * nd.transpose() + v * v.transpose());
          if (f) load += (w * f(x)) * v;
        }
        if (with_stab && jf2) {
          k.noalias() += (stab.sigma_Gamma * w) * (nd * nd.transpose());
          k.noalias() += (stab.sigma_Gamma_tilde * h * h * w) * (hn * hn.transpose());
        }
      }
    }

    if (with_stab && stab.kind == StabilizationKind::nv) {
      const double rho = stab.rho_scale / h;
      const auto rule = box_rule(dofs.cell_lower(ci), h, order);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec3& x = rule.points[q];
        evaluate_shapes(dofs, ci, x, sh, false);
        Vec3 nrm;
        LevelSetField::normal_and_jacobian(phi, cell, x, nrm, nullptr);
        for (int a = 0; a < n; ++a) nd[a] = sh.grad[a].dot(nrm);
        k.noalias() += (rho * rule.weights[q]) * (nd * nd.transpose());
      }
    }

    scatter.prepare(dofs.cell_dofs(ci));
    scatter.add(sys.matrix, k);
    if (with_surface) scatter.add(sys.rhs, load);
  }

  if (faces) {
    ShapeValues sm, sp;
    MatrixXd kf(2 * n, 2 * n), jump(2 * n, 3);
    VectorXd hj(2 * n);
    for (std::size_t fi = 0; fi < s.faces().size(); ++fi) {
      const FaceId& face = s.faces()[fi];
      const auto cm = static_cast<std::size_t>(s.face_minus(static_cast<int>(fi)));
      const auto cp = static_cast<std::size_t>(s.face_plus(static_cast<int>(fi)));
      const auto rule = face_rule(face, order);
      const int ax = face.axis;
      kf.setZero();
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec3& x = rule.points[q];
        const double w = rule.weights[q];
        evaluate_shapes(dofs, cm, x, sm, jf2);
        evaluate_shapes(dofs, cp, x, sp, jf2);
        for (int a = 0; a < n; ++a) {
          jump.row(a) = -sm.grad[a].transpose();
          jump.row(n + a) = sp.grad[a].transpose();
          if (jf2) {
            hj[a] = -sm.hess[a](ax, ax);
            hj[n + a] = sp.hess[a](ax, ax);
          }
        }
        // each face is seen from both adjacent cells
        kf.noalias() += (2.0 * stab.sigma_F * w) * (jump * jump.transpose());
        if (jf2) kf.noalias() += (2.0 * stab.sigma_F_tilde * face.h_F * face.h_F * w) * (hj * hj.transpose());
      }
      scatter.prepare(face_local_dofs(s, static_cast<int>(fi)));
      scatter.add(sys.matrix, kf);
    }
  }
  return sys;
}

double cell_stab_energy(const Discretization& s, const StabilizationConfig& stab, std::span<const double> u,
                        std::size_t ci) {
  const auto& dofs = s.dofs();
  const CellId& cell = dofs.cell(ci);
  const auto& phi = s.field().on_cell(cell);
  const double h = dofs.cell_size(ci);
  const int order = s.quadrature_order();
  const auto uc = cell_function(dofs, ci, u);
  double e = 0.0;
  Vec3 g;
  Mat3 hess;

  if (stab.kind == StabilizationKind::nv) {
    const double rho = stab.rho_scale / h;
    const auto rule = box_rule(dofs.cell_lower(ci), h, order);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vec3 nrm;
      LevelSetField::normal_and_jacobian(phi, cell, rule.points[q], nrm, nullptr);
      uc.evaluate(rule.points[q], nullptr, &g, nullptr);
      const double d = g.dot(nrm);
      e += rho * rule.weights[q] * d * d;
    }
    return e;
  }

  const bool jf2 = higher_order_jf(s, stab);
  for (int fi : s.cell_faces(ci)) {
    const FaceId& face = s.faces()[fi];
    const auto um = cell_function(dofs, static_cast<std::size_t>(s.face_minus(fi)), u);
    const auto up = cell_function(dofs, static_cast<std::size_t>(s.face_plus(fi)), u);
    const auto rule = face_rule(face, order);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vec3 gm, gp;
      Mat3 hm, hp;
      um.evaluate(rule.points[q], nullptr, &gm, jf2 ? &hm : nullptr);
      up.evaluate(rule.points[q], nullptr, &gp, jf2 ? &hp : nullptr);
      e += stab.sigma_F * rule.weights[q] * (gp - gm).squaredNorm();
      if (jf2) {
        const double j = hp(face.axis, face.axis) - hm(face.axis, face.axis);
        e += stab.sigma_F_tilde * face.h_F * face.h_F * rule.weights[q] * j * j;
      }
    }
  }
  if (jf2) {
    const auto& rule = s.surface_rule(ci);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Vec3 nrm;
      LevelSetField::normal_and_jacobian(phi, cell, rule.points[q], nrm, nullptr);
      uc.evaluate(rule.points[q], nullptr, &g, &hess);
      const double d = g.dot(nrm);
      const double hn = nrm.dot(hess * nrm);
      e += rule.weights[q] * (stab.sigma_Gamma * d * d + stab.sigma_Gamma_tilde * h * h * hn * hn);
    }
  }
  return e;
}

}  // namespace tracefem
