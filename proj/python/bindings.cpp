#include "prodgeom/parallel.hpp"
#include "prodgeom/report.hpp"
#include "prodgeom/sinhgordon.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace prodgeom;

namespace {

py::array_t<double> grid_array(const GridSolution& gs) {
  py::array_t<double> a({gs.nu, gs.nv});
  std::copy(gs.h.begin(), gs.h.end(), a.mutable_data());
  return a;
}

py::tuple point_tuple(const AmbientPoint& x) { return py::make_tuple(Eigen::Vector3d(x.p), Eigen::Vector3d(x.q)); }

VerifyParams params_from(std::size_t n, std::uint64_t seed) {
  VerifyParams p;
  p.n_samples = n;
  p.seed = seed;
  return p;
}

}  // namespace

PYBIND11_MODULE(_prodgeom, m) {
  m.doc() = "Hypersurfaces of S^2 x S^2: frames, structure-equation checks, sinh-Gordon data, parallels";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", base);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<SingularChartError>(m, "SingularChartError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<ExcludedSetError>(m, "ExcludedSetError", base);
  py::register_exception<FocalPointError>(m, "FocalPointError", base);
  py::register_exception<NonconvergenceError>(m, "NonconvergenceError", base);

  m.attr("MINIMAL_DISTANCE") = kMinimalDistance;

  py::class_<Immersion>(m, "Immersion")
      .def("__call__", [](const Immersion& im, const Vec3& s) { return point_tuple(im(s)); })
      .def_property_readonly("name", &Immersion::name)
      .def_property_readonly("fd_step", &Immersion::fd_step)
      .def_property_readonly("orientation", &Immersion::orientation)
      .def_property_readonly("box", [](const Immersion& im) { return py::make_tuple(im.box().lo, im.box().hi); })
      .def_property_readonly("metadata", &Immersion::metadata)
      .def("with_fd_step", &Immersion::with_fd_step);

  m.def("family_Mt", &family_Mt, py::arg("t"));
  m.def("family_Mab", [](const Vec3& a, const Vec3& b) { return family_Mab(a, b); },
        py::arg("a") = Vec3(Vec3::UnitZ()), py::arg("b") = Vec3(-Vec3::UnitZ()));
  m.def("family_hatMab", [](const Vec3& a, const Vec3& b) { return family_hatMab(a, b); },
        py::arg("a") = Vec3(Vec3::UnitZ()), py::arg("b") = Vec3(-Vec3::UnitZ()));
  m.def("family_prop61_latitudes",
        [](double C, double theta1, double theta2) {
          return family_prop61(C, CurveOnSphere::latitude(theta1), CurveOnSphere::latitude(theta2));
        },
        py::arg("C"), py::arg("theta1") = 1.2, py::arg("theta2") = 1.4);
  m.def("parallel_immersion", &parallel_immersion, py::arg("im"), py::arg("r"));

  py::class_<FrameData>(m, "Frame")
      .def_readonly("C", &FrameData::C)
      .def_readonly("has_E", &FrameData::has_E)
      .def_readonly("b_matrix", &FrameData::b_matrix)
      .def_readonly("T", &FrameData::T)
      .def_readonly("mu", &FrameData::mu)
      .def_readonly("G", &FrameData::G)
      .def_property_readonly("b", [](const FrameData& f) { return std::vector<double>(f.b.begin(), f.b.end()); })
      .def_property_readonly("normal", [](const FrameData& f) { return Vec6(f.N.stacked()); })
      .def_property_readonly("mean_curvature", [](const FrameData& f) { return mean_curvature(f); })
      .def_property_readonly("principal_curvatures", [](const FrameData& f) { return principal_curvatures(f); });
  m.def("build_frame", [](const Immersion& im, const Vec3& s) { return build_frame(im, s); });

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("name", &CheckReport::name)
      .def_readonly("max_residual", &CheckReport::max_residual)
      .def_readonly("tolerance", &CheckReport::tolerance)
      .def_readonly("samples", &CheckReport::samples)
      .def_readonly("passed", &CheckReport::pass)
      .def_readonly("metadata", &CheckReport::metadata)
      .def("__repr__", [](const CheckReport& c) {
        return "<CheckReport " + c.name + (c.pass ? " pass" : " FAIL") + ">";
      });

  m.def("verify_suite", [](const Immersion& im, std::size_t n, std::uint64_t seed) {
    return verify_suite(im, params_from(n, seed));
  }, py::arg("im"), py::arg("n_samples") = 30, py::arg("seed") = 1);
  m.def("reports_to_json", [](const std::vector<CheckReport>& checks) { return reports_to_json({}, checks); });

  py::class_<GridSolution>(m, "GridSolution")
      .def_readonly("nu", &GridSolution::nu)
      .def_readonly("nv", &GridSolution::nv)
      .def_readonly("du", &GridSolution::du)
      .def_readonly("dv", &GridSolution::dv)
      .def_readonly("residual", &GridSolution::residual)
      .def_readonly("boundary", &GridSolution::boundary)
      .def_property_readonly("h", &grid_array)
      .def("set_node", [](GridSolution& gs, int i, int j, double v) { gs.at(i, j) = v; })
      .def("copy", [](const GridSolution& gs) { return gs; });

  m.def("solve_sinh_gordon",
        [](int n, const std::string& bc, double tol) {
          SolverOptions o;
          o.tol = tol;
          if (bc == "zero") return solve_sinh_gordon(Domain{}, n, n, zero_boundary(), nullptr, o, bc);
          if (bc == "soliton") return solve_sinh_gordon(Domain{}, n, n, soliton_boundary(), nullptr, o, bc);
          throw UsageError("boundary must be 'zero' or 'soliton'");
        },
        py::arg("n") = 128, py::arg("bc") = "soliton", py::arg("tol") = 1e-10);
  m.def("soliton_profile", &soliton_profile);
  m.def("intrinsic_checks", &intrinsic_checks, py::arg("gs"), py::arg("n_samples") = 30, py::arg("seed") = 1);
  m.def("b_fields", [](double h, double t) {
    const BFields b = b_fields(h, t);
    return py::make_tuple(b.b1, b.b2, b.b4);
  });
  m.def("save_archive", &save_archive);
  m.def("load_archive", &load_archive);

  m.def("det_B", [](double r, double b1, double b2, double b4) { return det_B({r, b1, b2, b4}); });
  m.def("A_r", [](double r, double b1, double b2, double b4) { return A_r({r, b1, b2, b4}); });
  m.def("A_r_jacobi", [](double r, double b1, double b2, double b4) { return A_r_jacobi({r, b1, b2, b4}); });
  m.def("mean_curvature_r", [](double r, double b1, double b2, double b4) { return mean_curvature_r({r, b1, b2, b4}); });
  m.def("parallel_ricci_minimal", &parallel_ricci_minimal);
  m.def("theorem46_check", [](const Immersion& im, std::size_t n, std::uint64_t seed, double r) {
    return theorem46_check(im, params_from(n, seed), r);
  }, py::arg("im"), py::arg("n_samples") = 30, py::arg("seed") = 1, py::arg("r") = kMinimalDistance);
  m.def("sweep", [](const Immersion& im, double r_min, double r_max, int steps, std::size_t n, std::uint64_t seed) {
    std::vector<py::dict> out;
    for (const SweepRow& row : sweep(im, r_min, r_max, steps, params_from(n, seed))) {
      py::dict d;
      d["r"] = row.r;
      d["H_mean"] = row.H_mean;
      d["H_max"] = row.H_max;
      d["C_max"] = row.C_max;
      d["detB_min"] = row.detB_min;
      out.push_back(d);
    }
    return out;
  }, py::arg("im"), py::arg("r_min"), py::arg("r_max"), py::arg("steps"), py::arg("n_samples") = 10,
     py::arg("seed") = 1);
}
