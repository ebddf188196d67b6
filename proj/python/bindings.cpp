#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>
#include <vector>

#include "latdeconv/budget.hpp"
#include "latdeconv/common.hpp"
#include "latdeconv/deconv.hpp"
#include "latdeconv/fracdiff.hpp"
#include "latdeconv/green.hpp"
#include "latdeconv/models.hpp"

namespace py = pybind11;
using namespace latdeconv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

/// Box array of shape (2R+1,)*d, index R at the origin.
Array to_array(const LatticeFunction& f) {
  const LatticeFunction box = f.to_box();
  std::vector<py::ssize_t> shape(box.dim(), 2 * box.radius() + 1);
  Array out(shape);
  std::copy(box.values().begin(), box.values().end(), out.mutable_data());
  return out;
}

LatticeFunction from_array(const Array& a) {
  const int d = static_cast<int>(a.ndim());
  if (d < 1) throw PreconditionError("kernel array needs at least one axis");
  const py::ssize_t side = a.shape(0);
  for (int j = 0; j < d; ++j)
    if (a.shape(j) != side) throw PreconditionError("kernel array must have equal odd sides");
  if (side % 2 == 0) throw PreconditionError("kernel array must have equal odd sides");
  LatticeFunction f = LatticeFunction::zeros(d, static_cast<int>(side / 2), Layout::box);
  std::copy(a.data(), a.data() + a.size(), f.mutable_values().begin());
  return f;
}

py::dict fit_dict(const std::optional<DecayFit>& f) {
  py::dict out;
  if (!f) return out;
  out["exponent"] = f->exponent;
  out["amplitude"] = f->amplitude;
  out["r_min"] = f->r_min;
  out["r_max"] = f->r_max;
  out["r_squared"] = f->r_squared;
  out["envelope_exponent"] = f->envelope_exponent;
  out["zero_function"] = f->zero_function;
  return out;
}

py::dict budget_dict(const ExponentBudget& b) {
  py::dict out;
  out["d"] = b.d;
  out["rho"] = to_string(b.rho);
  out["s_sup"] = to_string(b.s_sup);
  out["s0"] = b.s0;
  out["n_d"] = b.n_d;
  out["n_d_bound"] = to_string(b.n_d_bound);
  out["in_range"] = b.in_range;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian deconvolution on Z^d";
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  m.def("set_threads", &set_thread_count, py::arg("threads"), "0 restores the default");
  m.def("a_d", &a_d, py::arg("d"));
  m.def("c_delta", &c_delta, py::arg("delta"));

  m.def(
      "green",
      [](int d, int radius, int grid, double mu) {
        GreenSpec spec;
        spec.dim = d;
        spec.mu = mu;
        spec.box_radius = radius;
        return to_array(green_function(spec, TorusGrid(d, grid > 0 ? grid : 4 * radius, true)));
      },
      py::arg("d"), py::arg("radius"), py::arg("grid") = 0, py::arg("mu") = 1.0,
      "C_mu on [-R, R]^d from the shifted torus of M points (default 4R)");

  m.def(
      "model_kernel", [](const std::string& json) { return to_array(make_kernel(model_spec_from_json(json))); },
      py::arg("json"), "kernel F of a model config given as JSON text");

  m.def(
      "critical_constants",
      [](const Array& F) {
        const CriticalConstants c = critical_constants(from_array(F));
        py::dict out;
        out["lambda"] = c.lambda;
        out["mu"] = c.mu;
        out["K_F_second"] = c.K_F_second;
        out["F_hat_zero"] = c.F_hat_zero;
        out["critical"] = c.critical;
        return out;
      },
      py::arg("F"));

  m.def(
      "deconvolve",
      [](const Array& F, int radius, int grid, bool refine) {
        const LatticeFunction k = from_array(F).to_orbits();
        DeconvOptions opt;
        opt.refine = refine;
        const DeconvolutionResult r = deconvolve(k, radius, TorusGrid(k.dim(), grid > 0 ? grid : 4 * radius, true), opt);
        py::dict out;
        out["G"] = to_array(r.G);
        out["f"] = to_array(r.f);
        out["lambda"] = r.constants.lambda;
        out["mu"] = r.constants.mu;
        out["f_sup"] = r.f_sup;
        out["torus_residual"] = r.torus_residual;
        out["fit"] = fit_dict(r.fit_all);
        out["amplitude_ratio"] = r.amplitude.axis_ratio;
        return out;
      },
      py::arg("F"), py::arg("radius"), py::arg("grid") = 0, py::arg("refine") = false,
      "G = F^{-1} on [-R, R]^d and f = G - lambda C_mu; F must be symmetric");

  m.def(
      "admissible_s",
      [](int d, const std::string& rho, bool exploratory) {
        return budget_dict(admissible_s(d, parse_rational(rho), exploratory));
      },
      py::arg("d"), py::arg("rho"), py::arg("exploratory") = false, "rho as decimal or p/q text");

  m.def(
      "error_term_holder_curve",
      [](const Array& F, int order, int grid, double u_max) {
        const LatticeFunction k = from_array(F).to_orbits();
        const TorusGrid g(k.dim(), grid, true);
        const ErrorTermCurve e = error_term_holder_curve(k, order, aligned_u_values(g, u_max), g);
        py::dict out;
        out["u"] = e.curve.u_values;
        out["norms"] = e.curve.norms;
        out["fitted_eta"] = e.curve.fitted_eta;
        out["hat_norm"] = e.hat_norm;
        return out;
      },
      py::arg("F"), py::arg("order"), py::arg("grid"), py::arg("u_max") = 1.0,
      "||U_u d_1^n f^||_1 at grid-aligned u in (0, u_max]");
}
