#include "tracefem/benchmark.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tracefem;

namespace {

py::dict geometry_dict(const CellGeometry& g) {
  py::dict d;
  d["lower"] = g.lower;
  d["center"] = g.center;
  d["size"] = g.size;
  std::vector<Vec3> v(g.vertices.begin(), g.vertices.end());
  d["vertices"] = v;
  return d;
}

py::tuple pcg_triplets(std::size_t n, const std::vector<std::tuple<int, int, double>>& entries,
                       const std::vector<double>& b, double rel_tol, int max_iter) {
  const auto a = CsrMatrix::from_triplets(n, entries);
  std::vector<double> x(n, 0.0);
  const auto rep = pcg(a, b, x, SolverOptions{rel_tol, max_iter});
  return py::make_tuple(x, rep);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive trace finite elements for the Laplace-Beltrami problem";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_RuntimeError);

  py::class_<CellId>(m, "CellId")
      .def(py::init([](int level, std::array<std::int32_t, 3> anchor) { return CellId{level, anchor}; }),
           py::arg("level"), py::arg("anchor"))
      .def_readwrite("level", &CellId::level)
      .def_readwrite("anchor", &CellId::anchor)
      .def("parent", &CellId::parent)
      .def("child", &CellId::child)
      .def("__eq__", [](const CellId& a, const CellId& b) { return a == b; })
      .def("__lt__", [](const CellId& a, const CellId& b) { return a < b; })
      .def("__hash__", [](const CellId& c) { return CellIdHash{}(c); })
      .def("__repr__", [](const CellId& c) { return "CellId(" + c.str() + ")"; });

  py::class_<OctreeMesh>(m, "OctreeMesh")
      .def_static("create_uniform", &OctreeMesh::create_uniform, py::arg("lower"), py::arg("upper"), py::arg("n0"))
      .def_property_readonly("num_active", &OctreeMesh::num_active)
      .def_property_readonly("max_level", &OctreeMesh::max_level)
      .def("active_cells", &OctreeMesh::active_cells)
      .def("is_active", &OctreeMesh::is_active)
      .def("is_balanced", &OctreeMesh::is_balanced)
      .def("cell_size", &OctreeMesh::cell_size)
      .def("cell_geometry", [](const OctreeMesh& mesh, const CellId& c) { return geometry_dict(mesh.cell_geometry(c)); })
      .def("refine_with_closure",
           [](OctreeMesh& mesh, const std::vector<CellId>& marked) { mesh.refine_with_closure(marked); })
      .def("num_internal_faces", [](const OctreeMesh& mesh, const std::vector<CellId>& cells) {
        return mesh.internal_faces(CellSet(cells.begin(), cells.end())).size();
      });

  py::class_<LevelSetField>(m, "LevelSetField")
      .def_static(
          "interpolate",
          [](const std::function<double(const Vec3&)>& phi, const OctreeMesh& mesh, int degree) {
            return LevelSetField::interpolate(phi, mesh, degree);
          },
          py::arg("phi"), py::arg("mesh"), py::arg("degree"), py::keep_alive<0, 2>())
      .def_property_readonly("degree", &LevelSetField::degree)
      .def("value", py::overload_cast<const Vec3&>(&LevelSetField::value, py::const_))
      .def("normal", py::overload_cast<const Vec3&>(&LevelSetField::normal, py::const_))
      .def("normal_jacobian", &LevelSetField::normal_jacobian);

  py::class_<SurfaceQuadrature>(m, "SurfaceQuadrature")
      .def_readonly("cell", &SurfaceQuadrature::cell)
      .def_readonly("points", &SurfaceQuadrature::points)
      .def_readonly("weights", &SurfaceQuadrature::weights)
      .def("measure", &SurfaceQuadrature::measure)
      .def("__len__", &SurfaceQuadrature::size);

  py::enum_<CellTag>(m, "CellTag")
      .value("interior", CellTag::interior)
      .value("exterior", CellTag::exterior)
      .value("cut", CellTag::cut);

  py::class_<CutClassification>(m, "CutClassification")
      .def_readonly("cut_cells", &CutClassification::cut_cells)
      .def("tag", &CutClassification::tag)
      .def("surface_rule", [](const CutClassification& c, const CellId& id) { return c.surface_rules.at(id); })
      .def("surface_measure", [](const CutClassification& c) {
        double s = 0.0;
        for (const auto& [id, rule] : c.surface_rules) s += rule.measure();
        return s;
      });

  m.def(
      "classify",
      [](const LevelSetField& field, const OctreeMesh& mesh, int order) {
        SurfaceRuleOptions opt;
        opt.order = order;
        return classify(field, mesh, opt);
      },
      py::arg("field"), py::arg("mesh"), py::arg("order") = 2);

  py::class_<ManufacturedCase>(m, "ManufacturedCase")
      .def(py::init<double>(), py::arg("lam"))
      .def_property_readonly("lam", &ManufacturedCase::lambda)
      .def("u", &ManufacturedCase::u)
      .def("f", &ManufacturedCase::f)
      .def("grad_u", &ManufacturedCase::grad_u);

  py::enum_<StabilizationKind>(m, "StabilizationKind")
      .value("nv", StabilizationKind::nv)
      .value("jf", StabilizationKind::jf);

  py::class_<StabilizationConfig>(m, "StabilizationConfig")
      .def(py::init<>())
      .def_readwrite("kind", &StabilizationConfig::kind)
      .def_readwrite("rho_scale", &StabilizationConfig::rho_scale)
      .def_readwrite("sigma_F", &StabilizationConfig::sigma_F)
      .def_readwrite("sigma_Gamma", &StabilizationConfig::sigma_Gamma)
      .def_readwrite("sigma_F_tilde", &StabilizationConfig::sigma_F_tilde)
      .def_readwrite("sigma_Gamma_tilde", &StabilizationConfig::sigma_Gamma_tilde);

  py::enum_<RefinementMode>(m, "RefinementMode")
      .value("uniform", RefinementMode::uniform)
      .value("adaptive", RefinementMode::adaptive);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("relative_residual", &SolveReport::relative_residual)
      .def_readonly("converged", &SolveReport::converged);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("degree", &RunConfig::degree)
      .def_readwrite("stab", &RunConfig::stab)
      .def_readwrite("lam", &RunConfig::lambda)
      .def_readwrite("theta", &RunConfig::theta)
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("cycles", &RunConfig::cycles)
      .def_readwrite("n0", &RunConfig::n0)
      .def_property(
          "rel_tol", [](const RunConfig& c) { return c.solver.rel_tol; },
          [](RunConfig& c, double v) { c.solver.rel_tol = v; })
      .def_property(
          "max_iter", [](const RunConfig& c) { return c.solver.max_iter; },
          [](RunConfig& c, int v) { c.solver.max_iter = v; })
      .def_readwrite("out_path", &RunConfig::out_path)
      .def_readwrite("vtk_dir", &RunConfig::vtk_dir)
      .def("validate", &RunConfig::validate);

  py::class_<ConvergenceRecord>(m, "ConvergenceRecord")
      .def_readonly("cycle", &ConvergenceRecord::cycle)
      .def_readonly("dofs", &ConvergenceRecord::dofs)
      .def_readonly("l2_error", &ConvergenceRecord::l2_error)
      .def_readonly("h1_error", &ConvergenceRecord::h1_error)
      .def_readonly("estimator", &ConvergenceRecord::estimator)
      .def_readonly("I1", &ConvergenceRecord::I1)
      .def_readonly("I2", &ConvergenceRecord::I2)
      .def_readonly("I3", &ConvergenceRecord::I3)
      .def_readonly("cg_iters", &ConvergenceRecord::cg_iters)
      .def_readonly("wall_seconds", &ConvergenceRecord::wall_seconds);

  m.def(
      "run", [](const RunConfig& cfg) { return run(cfg); }, py::arg("config"),
      py::call_guard<py::gil_scoped_release>());
  m.def("csv_header", &csv_header);

  m.def(
      "dorfler_mark",
      [](const std::vector<double>& eta2, double theta) {
        std::vector<CellIndicator> ind(eta2.size());
        for (std::size_t i = 0; i < eta2.size(); ++i) {
          ind[i].cell = CellId{0, {static_cast<std::int32_t>(i), 0, 0}};
          ind[i].eta2 = eta2[i];
        }
        std::vector<int> out;
        for (const auto& c : dorfler_mark(ind, theta)) out.push_back(c.anchor[0]);
        return out;
      },
      py::arg("eta2"), py::arg("theta"),
      "Indices of the Dorfler-marked entries of a list of squared indicators.");

  m.def("pcg", &pcg_triplets, py::arg("n"), py::arg("entries"), py::arg("b"), py::arg("rel_tol") = 1e-10,
        py::arg("max_iter") = 20000, "Jacobi-preconditioned CG on a matrix given as (row, col, value) triplets.");
}
