#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xlat/design.hpp"
#include "xlat/errors.hpp"
#include "xlat/extraction.hpp"
#include "xlat/io.hpp"
#include "xlat/matching.hpp"
#include "xlat/metrics.hpp"
#include "xlat/resonator.hpp"

namespace py = pybind11;
using namespace xlat;
using json = nlohmann::json;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

FrequencyGrid grid_of(const DArray& f) {
  if (f.ndim() != 1) throw py::value_error("frequencies must be one-dimensional");
  return FrequencyGrid(std::vector<double>(f.data(), f.data() + f.size()), Spacing::Linear);
}

CArray stack(const SweepResponse& r) {
  CArray out({static_cast<py::ssize_t>(r.size()), py::ssize_t{2}, py::ssize_t{2}});
  auto v = out.mutable_unchecked<3>();
  for (std::size_t i = 0; i < r.size(); ++i)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) v(i, a, b) = r.matrix(i)(a, b);
  return out;
}

SweepResponse unstack(const DArray& f, const CArray& s, std::pair<cplx, cplx> refs) {
  if (s.ndim() != 3 || s.shape(1) != 2 || s.shape(2) != 2) throw py::value_error("S must have shape (n, 2, 2)");
  auto v = s.unchecked<3>();
  std::vector<Matrix2c> m(s.shape(0));
  for (py::ssize_t i = 0; i < s.shape(0); ++i) m[i] << v(i, 0, 0), v(i, 0, 1), v(i, 1, 0), v(i, 1, 1);
  return SweepResponse(grid_of(f), ParamKind::S, std::move(m), RefPair{refs.first, refs.second});
}

Matrix2c matrix_of(const CArray& s) {
  if (s.ndim() != 2 || s.shape(0) != 2 || s.shape(1) != 2) throw py::value_error("S must have shape (2, 2)");
  auto v = s.unchecked<2>();
  Matrix2c m;
  m << v(0, 0), v(0, 1), v(1, 0), v(1, 1);
  return m;
}

py::dict metrics_dict(const FilterMetrics& m) {
  py::dict d;
  d["f_lo_hz"] = m.f_lo_hz;
  d["f_hi_hz"] = m.f_hi_hz;
  d["f_c_hz"] = m.f_c_hz;
  d["il_min_db"] = m.il_min_db;
  d["f_il_min_hz"] = m.f_il_min_hz;
  d["fbw_3db"] = m.fbw_3db;
  d["ripple_db"] = m.ripple_db;
  d["oob_rejection_db"] = m.oob_rejection_db;
  return d;
}

py::dict response_dict(const SweepResponse& r) {
  py::dict d;
  const auto f = r.grid().points();
  d["frequencies_hz"] = std::vector<double>(f.begin(), f.end());
  d["s"] = stack(r);
  d["refs"] = std::vector<cplx>{r.refs()[0], r.refs()[1]};
  return d;
}

std::vector<Stopband> bands_of(const std::vector<std::pair<double, double>>& v) {
  std::vector<Stopband> out;
  for (const auto& [lo, hi] : v) out.push_back({lo, hi});
  return out;
}

py::dict simulate(const std::string& design_json) {
  const DesignDocument doc = parse_design(json::parse(design_json));
  const Evaluation ev = evaluate(doc.design, doc.sweep.grid(), doc.match, doc.stopbands);
  py::dict d;
  d["unmatched"] = response_dict(ev.unmatched);
  d["matched"] = response_dict(ev.response);
  d["metrics"] = metrics_dict(ev.metrics);
  if (ev.match) d["match"] = match_report(*ev.match).dump();
  return d;
}

std::string optimize_design(const std::string& design_json, const std::string& spec_json, long budget, int starts,
                            std::uint64_t seed) {
  DesignDocument doc = parse_design(json::parse(design_json));
  const TargetSpec spec = parse_target_spec(json::parse(spec_json));
  OptimizeOptions opt;
  opt.budget = budget;
  opt.starts = starts;
  opt.seed = seed;
  opt.match = doc.match;
  doc.design = optimize(doc.design, doc.free, spec, doc.sweep.grid(), opt).best;
  return design_to_json(doc).dump();
}

CArray resonator_admittance(const std::string& resonator_json, const DArray& f) {
  const MbvdParams p = parse_resonator(json::parse(resonator_json));
  CArray out(f.size());
  auto v = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < f.size(); ++i) v(i) = admittance(p, f.data()[i]);
  return out;
}

std::string fit(const DArray& f, const CArray& y, std::size_t branches, int restarts, std::uint64_t seed) {
  const MeasuredOnePort m{grid_of(f), std::vector<cplx>(y.data(), y.data() + y.size()), "python"};
  FitOptions opt;
  opt.restarts = restarts;
  opt.seed = seed;
  return fit_params_json(fit_mbvd(m, initial_guess(m, branches), opt)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice acoustic filter toolkit";

  static py::exception<Error> error(m, "XlatError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("simulate", &simulate, py::arg("design_json"),
        "Evaluate a design document; returns unmatched and matched responses plus metrics.");
  m.def("optimize", &optimize_design, py::arg("design_json"), py::arg("spec_json"), py::arg("budget") = 5000,
        py::arg("starts") = 8, py::arg("seed") = 1, "Optimize the free parameters; returns the new design JSON.");
  m.def(
      "metrics",
      [](const DArray& f, const CArray& s, const std::vector<std::pair<double, double>>& stopbands) {
        return metrics_dict(extract_metrics(unstack(f, s, {50.0, 50.0}), bands_of(stopbands)));
      },
      py::arg("frequencies_hz"), py::arg("s"), py::arg("stopbands") = std::vector<std::pair<double, double>>{});
  m.def(
      "rollett_k", [](const CArray& s, cplx z0) { return rollett_k(TwoPortMatrix::s(matrix_of(s), {z0, z0})); },
      py::arg("s"), py::arg("z0") = cplx{50.0});
  m.def(
      "conjugate_match",
      [](const CArray& s, cplx z0) {
        return match_report(conjugate_match(TwoPortMatrix::s(matrix_of(s), {z0, z0}))).dump();
      },
      py::arg("s"), py::arg("z0") = cplx{50.0}, "Simultaneous conjugate match of one S matrix; returns report JSON.");
  m.def(
      "match_sweep",
      [](const DArray& f, const CArray& s, std::optional<double> at_hz) {
        const SweepResponse r = unstack(f, s, {50.0, 50.0});
        const MatchSolution sol = conjugate_match(r, at_hz);
        py::dict d = response_dict(apply_match(r, sol));
        d["report"] = match_report(sol).dump();
        return d;
      },
      py::arg("frequencies_hz"), py::arg("s"), py::arg("at_hz") = std::nullopt);
  m.def("resonator_admittance", &resonator_admittance, py::arg("resonator_json"), py::arg("frequencies_hz"));
  m.def("fit", &fit, py::arg("frequencies_hz"), py::arg("admittance"), py::arg("branches"), py::arg("restarts") = 8,
        py::arg("seed") = 1, "Fit an mBVD model; returns the fitted-parameter JSON.");
  m.def(
      "read_touchstone",
      [](const std::string& path) {
        const TouchstoneData t = read_touchstone(path);
        py::dict d;
        d["ports"] = t.ports;
        d["frequencies_hz"] = t.frequencies_hz;
        CArray s({static_cast<py::ssize_t>(t.s.size()), py::ssize_t{t.ports}, py::ssize_t{t.ports}});
        auto v = s.mutable_unchecked<3>();
        for (std::size_t i = 0; i < t.s.size(); ++i)
          for (int a = 0; a < t.ports; ++a)
            for (int b = 0; b < t.ports; ++b) v(i, a, b) = t.s[i](a, b);
        d["s"] = s;
        d["refs"] = std::vector<cplx>(t.refs.begin(), t.refs.begin() + t.ports);
        return d;
      },
      py::arg("path"));
  m.def(
      "write_touchstone",
      [](const std::string& path, const DArray& f, const CArray& s, const std::string& format) {
        write_touchstone(unstack(f, s, {50.0, 50.0}), path, parse_touchstone_format(format));
      },
      py::arg("path"), py::arg("frequencies_hz"), py::arg("s"), py::arg("format") = "MA");
}
