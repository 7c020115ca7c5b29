#include "xlat/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "xlat/errors.hpp"
#include "xlat/optim.hpp"

namespace xlat {

namespace {

// Balanced lattices null S21 to rounding level; treat that as "no passband"
// before attempting a match on pure numerical noise.
constexpr double kBalanceFloorDb = 200.0;

struct ParsedPath {
  std::string resonator;
  std::string field;
  std::size_t index = 0;
  bool indexed = false;
};

ParsedPath parse_path(const std::string& path) {
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    fail(ErrorCode::InvalidArgument, "parameter path '" + path + "' must look like NAME.field");
  }
  ParsedPath p;
  p.resonator = path.substr(0, dot);
  std::string rest = path.substr(dot + 1);
  const auto bracket = rest.find('[');
  if (bracket != std::string::npos) {
    if (rest.back() != ']') fail(ErrorCode::InvalidArgument, "bad index in '" + path + "'");
    const std::string idx = rest.substr(bracket + 1, rest.size() - bracket - 2);
    if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      fail(ErrorCode::InvalidArgument, "bad index in '" + path + "'");
    }
    p.index = static_cast<std::size_t>(std::stoul(idx));
    p.indexed = true;
    rest = rest.substr(0, bracket);
  }
  p.field = rest;
  const bool branch_field = p.field == "rm" || p.field == "lm" || p.field == "cm" || p.field == "fs";
  const bool static_field = p.field == "c0" || p.field == "r0" || p.field == "rs" || p.field == "ls" ||
                            p.field == "scale";
  if (!branch_field && !static_field) fail(ErrorCode::InvalidArgument, "unknown field in '" + path + "'");
  if (static_field && p.indexed) fail(ErrorCode::InvalidArgument, "field in '" + path + "' takes no index");
  return p;
}

MotionalBranch& branch_at(MbvdParams& p, const ParsedPath& path) {
  if (path.index >= p.branches.size()) fail(ErrorCode::InvalidArgument, "branch index out of range");
  return p.branches[path.index];
}

std::vector<MbvdParams*> resonators_named(FilterDesign& design, const std::string& name) {
  std::vector<MbvdParams*> out;
  std::visit(
      [&](auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, LadderDesign>) {
          for (auto& e : t.elements)
            if (e.name == name) out.push_back(&e.params);
        } else if constexpr (std::is_same_v<T, LayoutBalancedDesign>) {
          if (name == "A1") out.push_back(&t.a1);
          if (name == "A2") out.push_back(&t.a2);
          if (name == "B") out.push_back(&t.b);
        } else {
          if (name == "A") out.push_back(&t.a);
          if (name == "B") out.push_back(&t.b);
        }
      },
      design.topology);
  if (out.empty()) fail(ErrorCode::InvalidArgument, "design has no resonator named '" + name + "'");
  return out;
}

double to_value(double u, const FreeParameter& fp) {
  const double t = 0.5 * (1.0 + std::sin(u));
  double v;
  if (fp.lower > 0.0 && fp.upper / fp.lower >= 10.0) {
    v = std::exp(std::log(fp.lower) + t * (std::log(fp.upper) - std::log(fp.lower)));
  } else {
    v = fp.lower + t * (fp.upper - fp.lower);
  }
  return std::clamp(v, fp.lower, fp.upper);
}

double to_unconstrained(double v, const FreeParameter& fp) {
  v = std::clamp(v, fp.lower, fp.upper);
  double t;
  if (fp.lower > 0.0 && fp.upper / fp.lower >= 10.0) {
    t = (std::log(v) - std::log(fp.lower)) / (std::log(fp.upper) - std::log(fp.lower));
  } else {
    t = (v - fp.lower) / (fp.upper - fp.lower);
  }
  return std::asin(std::clamp(2.0 * t - 1.0, -1.0, 1.0));
}

}  // namespace

Evaluation evaluate(const FilterDesign& design, const FrequencyGrid& grid, const MatchPlan& match,
                    const std::vector<Stopband>& stopbands, const MetricsOptions& metrics) {
  const Netlist net = build_netlist(design);
  SweepResponse unmatched = sweep_reduce(net, grid, design.port_refs);

  const auto il = insertion_loss_trace(unmatched);
  if (*std::min_element(il.begin(), il.end()) > kBalanceFloorDb) {
    fail(ErrorCode::NoPassband, "transmission is nulled across the sweep (balanced arms)");
  }

  std::optional<MatchSolution> sol;
  SweepResponse response = unmatched;
  switch (match.mode) {
    case MatchMode::None:
      break;
    case MatchMode::Fixed:
      response = renormalize(unmatched, match.fixed);
      break;
    case MatchMode::Auto:
      sol = conjugate_match(unmatched, match.at_hz);
      response = apply_match(unmatched, *sol);
      break;
  }
  FilterMetrics m = extract_metrics(response, stopbands, metrics);
  return {std::move(unmatched), std::move(response), std::move(m), std::move(sol)};
}

std::vector<std::string> resonator_names(const FilterDesign& design) {
  std::vector<std::string> out;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, LadderDesign>) {
          for (const auto& e : t.elements)
            if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
        } else if constexpr (std::is_same_v<T, LayoutBalancedDesign>) {
          out = {"A1", "A2", "B"};
        } else {
          out = {"A", "B"};
        }
      },
      design.topology);
  return out;
}

MbvdParams& resonator(FilterDesign& design, const std::string& name) {
  return *resonators_named(design, name).front();
}

const MbvdParams& resonator(const FilterDesign& design, const std::string& name) {
  return *resonators_named(const_cast<FilterDesign&>(design), name).front();
}

double get_parameter(const FilterDesign& design, const std::string& path) {
  const ParsedPath p = parse_path(path);
  MbvdParams r = resonator(design, p.resonator);
  if (p.field == "c0") return r.c0;
  if (p.field == "r0") return r.r0;
  if (p.field == "rs") return r.rs;
  if (p.field == "ls") return r.ls;
  if (p.field == "scale") return 1.0;
  MotionalBranch& b = branch_at(r, p);
  if (p.field == "rm") return b.rm;
  if (p.field == "lm") return b.lm;
  if (p.field == "cm") return b.cm;
  return series_resonance(b);
}

void set_parameter(FilterDesign& design, const std::string& path, double value) {
  const ParsedPath p = parse_path(path);
  if (!std::isfinite(value)) fail(ErrorCode::InvalidArgument, "parameter value must be finite");
  for (MbvdParams* r : resonators_named(design, p.resonator)) {
    if (p.field == "c0") r->c0 = value;
    else if (p.field == "r0") r->r0 = value;
    else if (p.field == "rs") r->rs = value;
    else if (p.field == "ls") r->ls = value;
    else if (p.field == "scale") *r = scale(*r, value);
    else {
      MotionalBranch& b = branch_at(*r, p);
      if (p.field == "rm") b.rm = value;
      else if (p.field == "lm") b.lm = value;
      else if (p.field == "cm") b.cm = value;
      else {
        const double w = 2.0 * kPi * value;
        b.lm = 1.0 / (w * w * b.cm);
      }
    }
  }
}

void TargetSpec::validate() const {
  if (!(fbw_min > 0.0 && fbw_min < 1.0)) fail(ErrorCode::InvalidArgument, "fbw_min must lie in (0, 1)");
  if (!(il_max_db > 0.0)) fail(ErrorCode::InvalidArgument, "il_max_db must be > 0");
  if (f_c_target_hz < 0.0 || f_c_tolerance < 0.0) {
    fail(ErrorCode::InvalidArgument, "f_c target and tolerance must be >= 0");
  }
  for (double w : {w_il, w_fbw, w_oob, w_fc}) {
    if (!(w >= 0.0)) fail(ErrorCode::InvalidArgument, "weights must be >= 0");
  }
}

double spec_cost(const FilterMetrics& m, const TargetSpec& spec) {
  auto hinge2 = [](double v) { return v > 0.0 ? v * v : 0.0; };
  // IL and OoB terms are in dB; FBW and f_c terms in percent.
  double cost = spec.w_il * hinge2(m.il_min_db - spec.il_max_db);
  cost += spec.w_fbw * hinge2(100.0 * (spec.fbw_min - m.fbw_3db));
  for (double oob : m.oob_rejection_db) cost += spec.w_oob * hinge2(spec.oob_min_db - oob);
  if (spec.f_c_target_hz > 0.0) {
    const double rel = std::abs(m.f_c_hz - spec.f_c_target_hz) / spec.f_c_target_hz;
    cost += spec.w_fc * hinge2(100.0 * (rel - spec.f_c_tolerance));
  }
  return cost;
}

FilterDesign apply_parameters(const FilterDesign& base, const std::vector<FreeParameter>& free,
                              const std::vector<double>& values) {
  if (values.size() != free.size()) fail(ErrorCode::InvalidArgument, "parameter vector size mismatch");
  FilterDesign d = base;
  for (std::size_t i = 0; i < free.size(); ++i) set_parameter(d, free[i].path, values[i]);
  return d;
}

double design_cost(const FilterDesign& base, const std::vector<FreeParameter>& free,
                   const std::vector<double>& values, const TargetSpec& spec, const FrequencyGrid& grid,
                   const OptimizeOptions& options) {
  try {
    const FilterDesign d = apply_parameters(base, free, values);
    const Evaluation ev = evaluate(d, grid, options.match, spec.stopbands);
    return spec_cost(ev.metrics, spec);
  } catch (const Error&) {
    return options.failure_cost;
  }
}

OptimizeResult optimize(const FilterDesign& base, const std::vector<FreeParameter>& free,
                        const TargetSpec& spec, const FrequencyGrid& grid, const OptimizeOptions& options) {
  spec.validate();
  if (free.empty()) fail(ErrorCode::InvalidArgument, "optimize needs at least one free parameter");
  for (const auto& fp : free) {
    if (!std::isfinite(fp.lower) || !std::isfinite(fp.upper) || !(fp.lower < fp.upper)) {
      fail(ErrorCode::InfeasibleBounds, "bounds of '" + fp.path + "' are empty or non-finite");
    }
    get_parameter(base, fp.path);
  }
  if (options.starts < 1 || options.budget < 1) {
    fail(ErrorCode::InvalidArgument, "starts and budget must be >= 1");
  }

  OptimizeResult out;
  out.best_cost = std::numeric_limits<double>::infinity();
  long evaluations = 0;
  int current_start = 0;

  auto record = [&](const std::vector<double>& values) {
    const double cost = design_cost(base, free, values, spec, grid, options);
    ++evaluations;
    if (cost < out.best_cost) {
      out.best_cost = cost;
      out.best_values = values;
    }
    out.history.push_back({evaluations, current_start, cost, out.best_cost, values});
    return cost;
  };

  std::vector<double> template_values;
  for (const auto& fp : free) template_values.push_back(std::clamp(get_parameter(base, fp.path), fp.lower, fp.upper));
  // "scale" entries read back as 1.0 and are applied relative to the template.
  if (record(template_values) == 0.0) {
    out.best = apply_parameters(base, free, template_values);
    return out;
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  bool last_converged = true;
  for (int s = 0; s < options.starts && evaluations < options.budget; ++s) {
    current_start = s;
    std::vector<double> u0(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (s == 0) {
        u0[i] = to_unconstrained(template_values[i], free[i]);
      } else {
        const double t = unit(rng);
        u0[i] = std::asin(2.0 * t - 1.0);
      }
    }
    const Objective obj = [&](std::span<const double> u) {
      std::vector<double> v(free.size());
      for (std::size_t i = 0; i < free.size(); ++i) v[i] = to_value(u[i], free[i]);
      return record(v);
    };
    SimplexOptions so;
    so.max_iterations = std::numeric_limits<int>::max();
    so.max_evaluations = (options.budget - evaluations) / (options.starts - s);
    if (so.max_evaluations < 1) so.max_evaluations = 1;
    const SimplexResult run = minimize_simplex(obj, u0, std::vector<double>(free.size(), 0.3), so);
    last_converged = run.converged;
    if (out.best_cost == 0.0) break;
  }
  out.budget_exhausted = evaluations >= options.budget && !last_converged;
  out.best = apply_parameters(base, free, out.best_values);
  return out;
}

}  // namespace xlat
