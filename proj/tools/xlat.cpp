// xlat: lattice acoustic filter simulation, matching, fitting and optimization.
//
// Exit status: 0 success, 2 validation error, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "xlat/design.hpp"
#include "xlat/errors.hpp"
#include "xlat/extraction.hpp"
#include "xlat/io.hpp"

using namespace xlat;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

Stopband parse_stopband(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "stopband '" + s + "' must be lo:hi in Hz");
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(s.substr(0, colon));
    hi = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "stopband '" + s + "' must be lo:hi in Hz");
  }
  if (!(lo > 0.0 && lo < hi)) fail(ErrorCode::InvalidArgument, "stopband '" + s + "' needs 0 < lo < hi");
  return {lo, hi};
}

MbvdParams load_params(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, path + ": " + e.what());
  }
  // Either a bare resonator or the output of `fit`.
  if (j.is_object() && j.contains("resonator")) return parse_resonator(j.at("resonator"));
  return parse_resonator(j);
}

void print_metrics(const std::string& label, const FilterMetrics& m) {
  std::printf("%s: f_c %.6g Hz  fbw %.3f %%  IL_min %.3f dB  band %.6g..%.6g Hz\n", label.c_str(), m.f_c_hz,
              100.0 * m.fbw_3db, m.il_min_db, m.f_lo_hz, m.f_hi_hz);
}

struct Options {
  std::string design, design_b, spec, input, out, metrics_out, report, seed_from, history, format = "MA";
  double at_hz = 0.0;
  std::vector<std::string> stopbands;
  bool sidecar = false, matched = false, geometric = false;
  int branches = 1, restarts = 8, starts = 8;
  long budget = 0;
  std::uint64_t seed = 1;
  double noise = 0.0, f_start = 10e9, f_stop = 30e9, peak_weight = 1.0;
  std::size_t points = 2001;
};

int run_simulate(const Options& o) {
  const DesignDocument doc = load_design(o.design);
  const Evaluation ev = evaluate(doc.design, doc.sweep.grid(), doc.match, doc.stopbands);
  const SweepResponse& out = o.matched ? ev.response : ev.unmatched;
  write_touchstone(out, o.out, parse_touchstone_format(o.format), o.sidecar,
                   {"design " + doc.design.name + " (" + topology_name(doc.design.topology) + ")",
                    o.matched ? "conjugately matched response" : "response at the design port references"});
  if (!o.metrics_out.empty()) write_file_atomic(o.metrics_out, metrics_csv(ev.metrics));
  print_metrics(doc.design.name, ev.metrics);
  return 0;
}

int run_match(const Options& o) {
  const TouchstoneData data = read_touchstone(o.input);
  const SweepResponse r = data.sweep();
  std::optional<double> at;
  if (o.at_hz > 0.0) at = o.at_hz;
  const MatchSolution sol = conjugate_match(r, at);
  const SweepResponse matched = apply_match(r, sol);
  write_touchstone(matched, o.out, parse_touchstone_format(o.format), o.sidecar,
                   {"conjugate match of " + data.source});
  if (!o.report.empty()) write_file_atomic(o.report, match_report(sol).dump(2) + "\n");
  std::printf("match at %.6g Hz: K = %.6f  Gamma1 = %.6g%+.6gj  Gamma2 = %.6g%+.6gj\n", sol.f_design_hz,
              sol.rollett_k, sol.gamma_m[0].real(), sol.gamma_m[0].imag(), sol.gamma_m[1].real(),
              sol.gamma_m[1].imag());
  return 0;
}

int run_metrics(const Options& o) {
  const SweepResponse r = read_touchstone(o.input).sweep();
  std::vector<Stopband> bands;
  for (const auto& s : o.stopbands) bands.push_back(parse_stopband(s));
  MetricsOptions mo;
  if (o.geometric) mo.center = CenterConvention::Geometric;
  const FilterMetrics m = extract_metrics(r, bands, mo);
  write_file_atomic(o.out, metrics_csv(m));
  print_metrics(o.input, m);
  return 0;
}

int run_fit(const Options& o) {
  const MeasuredOnePort data = read_touchstone(o.input).one_port();
  const MbvdParams init = o.seed_from.empty() ? initial_guess(data, static_cast<std::size_t>(o.branches))
                                              : load_params(o.seed_from);
  FitOptions fo;
  fo.restarts = o.restarts;
  fo.seed = o.seed;
  fo.peak_weight = o.peak_weight;
  const FitResult fit = fit_mbvd(data, init, fo);
  write_file_atomic(o.out, fit_params_json(fit).dump(2) + "\n");
  if (!o.report.empty()) write_file_atomic(o.report, fit_report_csv(fit));
  std::printf("fit: %zu branches, rms residual %.3g, %s\n", fit.params.branches.size(), fit.residual_rms,
              fit.converged ? "converged" : "NOT converged");
  std::printf("note: %s\n", kFitLossCaveat);
  return 0;
}

OptimizeResult optimize_document(const DesignDocument& doc, const TargetSpec& spec, const Options& o) {
  if (doc.free.empty()) fail(ErrorCode::InvalidArgument, doc.design.name + " declares no free parameters");
  OptimizeOptions oo;
  oo.starts = o.starts;
  oo.budget = o.budget;
  oo.seed = o.seed;
  oo.match = doc.match;
  return optimize(doc.design, doc.free, spec, doc.sweep.grid(), oo);
}

int run_optimize(const Options& o) {
  const DesignDocument doc = load_design(o.design);
  const TargetSpec spec = load_target_spec(o.spec);
  const OptimizeResult res = optimize_document(doc, spec, o);
  DesignDocument best = doc;
  best.design = res.best;
  save_design(best, o.out);
  if (!o.history.empty()) write_file_atomic(o.history, history_csv(res, doc.free));
  std::printf("best cost %.6g after %zu evaluations%s\n", res.best_cost, res.history.size(),
              res.budget_exhausted ? " (budget exhausted)" : "");
  return 0;
}

int run_compare(const Options& o) {
  std::vector<std::pair<std::string, FilterMetrics>> rows;
  std::optional<TargetSpec> spec;
  if (!o.spec.empty()) spec = load_target_spec(o.spec);
  for (const std::string& path : {o.design, o.design_b}) {
    DesignDocument doc = load_design(path);
    std::vector<Stopband> bands = spec ? spec->stopbands : doc.stopbands;
    if (spec) doc.design = optimize_document(doc, *spec, o).best;
    const Evaluation ev = evaluate(doc.design, doc.sweep.grid(), doc.match, bands);
    print_metrics(doc.design.name, ev.metrics);
    rows.emplace_back(doc.design.name, ev.metrics);
  }
  write_file_atomic(o.out, comparison_csv(rows));
  return 0;
}

int run_synth(const Options& o) {
  const MbvdParams p = load_params(o.input);
  const FrequencyGrid grid = FrequencyGrid::linear(o.f_start, o.f_stop, o.points);
  const MeasuredOnePort m = synthesize_one_port(p, grid, o.noise, o.seed);
  write_touchstone(grid, s11_from_admittance(m.admittance, 50.0), 50.0, o.out, parse_touchstone_format(o.format),
                   {"synthetic one-port from " + o.input, "relative noise " + format_number(o.noise) +
                                                            ", seed " + std::to_string(o.seed)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice acoustic filter toolkit"};
  app.set_version_flag("--version", XLAT_VERSION);
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Evaluate a design file and write its two-port response");
  sim->add_option("design", o.design, "design JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", o.out, "output .s2p")->required();
  sim->add_option("--metrics", o.metrics_out, "metrics CSV of the matched response");
  sim->add_flag("--matched", o.matched, "write the matched response instead of the raw one");
  sim->add_flag("--sidecar", o.sidecar, "allow complex references via a .refs.json sidecar");
  sim->add_option("--format", o.format, "RI, MA or DB");

  auto* match = app.add_subcommand("match", "Simultaneous conjugate match of a two-port sweep");
  match->add_option("input", o.input, "input .s2p")->required()->check(CLI::ExistingFile);
  match->add_option("--at-hz", o.at_hz, "match frequency (default: max |S21|)");
  match->add_option("--out", o.out, "matched .s2p")->required();
  match->add_option("--report", o.report, "match report JSON");
  match->add_flag("--sidecar", o.sidecar, "allow complex references via a .refs.json sidecar");
  match->add_option("--format", o.format, "RI, MA or DB");

  auto* met = app.add_subcommand("metrics", "Passband and stopband metrics of a two-port sweep");
  met->add_option("input", o.input, "input .s2p")->required()->check(CLI::ExistingFile);
  met->add_option("--stopband", o.stopbands, "stopband lo:hi in Hz (repeatable)");
  met->add_flag("--geometric", o.geometric, "geometric-mean centre frequency");
  met->add_option("--out", o.out, "metrics CSV")->required();

  auto* fit = app.add_subcommand("fit", "Fit a multi-branch resonator model to one-port data");
  fit->add_option("input", o.input, "measured .s1p")->required()->check(CLI::ExistingFile);
  fit->add_option("--branches", o.branches, "number of motional branches")->check(CLI::PositiveNumber);
  fit->add_option("--seed-from", o.seed_from, "initial parameters JSON")->check(CLI::ExistingFile);
  fit->add_option("--restarts", o.restarts, "random restarts");
  fit->add_option("--seed", o.seed, "random seed");
  fit->add_option("--peak-weight", o.peak_weight, "weight near resonances");
  fit->add_option("--out", o.out, "fitted parameters JSON")->required();
  fit->add_option("--report", o.report, "per-branch CSV");

  auto* opt = app.add_subcommand("optimize", "Tune a design's free parameters against a target");
  opt->add_option("design", o.design, "design JSON")->required()->check(CLI::ExistingFile);
  opt->add_option("spec", o.spec, "target spec JSON")->required()->check(CLI::ExistingFile);
  opt->add_option("--budget", o.budget, "evaluation budget")->required()->check(CLI::PositiveNumber);
  opt->add_option("--seed", o.seed, "random seed");
  opt->add_option("--starts", o.starts, "multi-start count");
  opt->add_option("--out", o.out, "best design JSON")->required();
  opt->add_option("--history", o.history, "cost history CSV");

  auto* cmp = app.add_subcommand("compare", "Side-by-side metrics of two designs");
  cmp->add_option("design_a", o.design, "first design JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("design_b", o.design_b, "second design JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--spec", o.spec, "optimize both against this target first")->check(CLI::ExistingFile);
  cmp->add_option("--budget", o.budget, "evaluation budget per design")->check(CLI::PositiveNumber);
  cmp->add_option("--seed", o.seed, "random seed");
  cmp->add_option("--starts", o.starts, "multi-start count");
  cmp->add_option("--out", o.out, "comparison CSV")->required();

  auto* syn = app.add_subcommand("synth", "Write synthetic one-port data from resonator parameters");
  syn->add_option("params", o.input, "resonator JSON")->required()->check(CLI::ExistingFile);
  syn->add_option("--noise", o.noise, "relative noise level");
  syn->add_option("--seed", o.seed, "noise seed");
  syn->add_option("--f-start", o.f_start, "first frequency, Hz");
  syn->add_option("--f-stop", o.f_stop, "last frequency, Hz");
  syn->add_option("--points", o.points, "number of points");
  syn->add_option("--format", o.format, "RI, MA or DB");
  syn->add_option("--out", o.out, "output .s1p")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (o.budget == 0) o.budget = 2000;
    if (*sim) return run_simulate(o);
    if (*match) return run_match(o);
    if (*met) return run_metrics(o);
    if (*fit) return run_fit(o);
    if (*opt) return run_optimize(o);
    if (*cmp) return run_compare(o);
    if (*syn) return run_synth(o);
  } catch (const Error& e) {
    std::cerr << "xlat: " << e.what() << "\n";
    return is_validation(e.code()) ? kExitValidation : kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "xlat: malformed JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "xlat: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
