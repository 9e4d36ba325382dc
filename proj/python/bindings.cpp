#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fcurve/acceptance.hpp"
#include "fcurve/analytics.hpp"
#include "fcurve/config.hpp"
#include "fcurve/errors.hpp"
#include "fcurve/riesz.hpp"

namespace py = pybind11;
using namespace fcurve;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Forward curve dynamics on a discretised weighted function space";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<SpecViolation>(m, "SpecViolation", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Space>(m, "Space")
      .def(py::init([](double alpha, double x_max, double dx) { return Space(WeightSpec{alpha}, GridSpec{x_max, dx}); }),
           py::arg("alpha") = 1.0, py::arg("x_max") = 5.0, py::arg("dx") = 1.0 / 250.0)
      .def_property_readonly("alpha", &Space::alpha)
      .def_property_readonly("dx", &Space::dx)
      .def_property_readonly("x_max", &Space::x_max)
      .def_property_readonly("cells", &Space::cells)
      .def("nodes", [](const Space& s) {
        std::vector<double> v(s.cells() + 1);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.node(i);
        return to_array(v);
      });

  py::class_<Curve>(m, "Curve")
      .def_static("from_function", [](const Space& s, const std::function<double(double)>& f) { return Curve::from_function(s, f); })
      .def_static("from_nodes", [](const Space& s, const std::vector<double>& v) { return Curve::from_nodes(s, v); })
      .def_static("constant", &Curve::constant)
      .def_property_readonly("f0", &Curve::f0)
      .def("node_values", [](const Curve& f) { return to_array(f.node_values()); })
      .def("__call__", [](const Curve& f, double x) { return f(x); })
      .def("norm", [](const Curve& f) { return norm(f); })
      .def("__add__", [](const Curve& a, const Curve& b) { return a + b; })
      .def("__sub__", [](const Curve& a, const Curve& b) { return a - b; })
      .def("__mul__", [](const Curve& a, double c) { return c * a; })
      .def("__rmul__", [](const Curve& a, double c) { return c * a; });

  m.def("inner_product", [](const Curve& a, const Curve& b) { return inner_product(a, b); });
  m.def("h_curve", &h_curve, py::arg("space"), py::arg("x"));
  m.def("shift", [](const Curve& f, double t) { return shift(f, t); });
  m.def("multiply", [](const Curve& a, const Curve& b) { return multiply(a, b); });
  m.def("sup_norm", [](const Curve& f) { return sup_norm(f); });

  m.def("schur_bound", [](const Space& s, const std::string& spec) {
    const SchurBound b = schur_bound(parse_kernel(s, spec));
    return py::dict(py::arg("row_sup") = b.row_sup, py::arg("col_sup") = b.col_sup, py::arg("c") = b.c);
  });
  m.def("apply_kernel", [](const Space& s, const std::string& spec, const Curve& f) { return parse_kernel(s, spec).apply(f); });

  m.def("exp_kernel_correlation", &exp_kernel_correlation, py::arg("alpha"), py::arg("delta"), py::arg("x"), py::arg("y"));
  m.def("spatial_correlation", [](const std::vector<Curve>& factors, double x, double y) {
    if (factors.empty()) throw ConfigError("need at least one factor");
    return spatial_correlation(FactorCovariance(factors.front().space(), factors), x, y);
  });

  m.def("simulate", [](const std::string& config, std::size_t paths, std::optional<std::uint64_t> seed) {
    Scenario sc = resolve_scenario(config);
    if (seed) sc.set_seed(*seed);
    py::gil_scoped_release release;
    const auto surfaces = simulate_surfaces(sc.model, sc.run.horizon, sc.run.dt, paths);
    py::gil_scoped_acquire acquire;
    const std::size_t nt = surfaces.empty() ? 0 : surfaces[0].times.size();
    const std::size_t nx = sc.space.cells() + 1;
    py::array_t<double> out({paths, nt, nx});
    auto a = out.mutable_unchecked<3>();
    for (std::size_t p = 0; p < paths; ++p) {
      for (std::size_t k = 0; k < nt; ++k) {
        const auto v = surfaces[p].curves[k].node_values();
        for (std::size_t i = 0; i < nx; ++i) a(p, k, i) = v[i];
      }
    }
    return py::make_tuple(to_array(surfaces.empty() ? std::vector<double>{} : surfaces[0].times), out);
  }, py::arg("config") = "builtin:lucia-schwartz-1f", py::arg("paths") = 1, py::arg("seed") = py::none());

  m.def("run_criterion", [](int id, std::uint64_t seed) {
    const auto r = acceptance::run_criterion(id, acceptance::SuiteOptions{seed, 1, nullptr});
    py::dict metrics;
    for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
    return py::dict(py::arg("id") = r.id, py::arg("title") = r.title, py::arg("passed") = r.passed,
                    py::arg("metrics") = metrics);
  }, py::arg("id"), py::arg("seed") = 7);
}
