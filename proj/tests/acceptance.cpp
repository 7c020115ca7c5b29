// Acceptance checks AC-1 .. AC-10. Prints one PASS/FAIL line per criterion
// and exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "xlat/design.hpp"
#include "xlat/errors.hpp"
#include "xlat/extraction.hpp"
#include "xlat/io.hpp"
#include "xlat/matching.hpp"
#include "xlat/mna.hpp"
#include "xlat/topology.hpp"

using namespace xlat;
namespace fs = std::filesystem;

namespace {

const fs::path kData = XLAT_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(const Matrix2c& a, const Matrix2c& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return scale == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / scale;
}

double max_diff(const SweepResponse& a, const SweepResponse& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, (a.matrix(i) - b.matrix(i)).cwiseAbs().maxCoeff());
  return e;
}

const RefPair k50{cplx{50.0}, cplx{50.0}};

// ---------------------------------------------------------------------------

void ac1(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uf(1e8, 1e11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const cplx ya{0.1 * u(rng), 0.1 * u(rng)}, yb{0.1 * u(rng), 0.1 * u(rng)};
    const double f = uf(rng);
    auto k = [](cplx y) { return [y](double) { return y; }; };
    Netlist n(4, 1);
    n.add_branch(0, 2, k(ya));
    n.add_branch(1, 3, k(ya));
    n.add_branch(0, 3, k(yb));
    n.add_branch(1, 2, k(yb));
    n.add_port(0, 1);
    n.add_port(2, 3);
    worst = std::max(worst, rel_err(lattice_closed_form(ya, yb).m(), reduce(n, f).y));
  }
  const double t = seconds_since(t0);
  o.detail << "max rel err " << worst << ", " << t << " s";
  o.require(worst < 1e-9, "error < 1e-9");
  o.require(t < 1.0, "runtime < 1 s");
}

void ac2(Outcome& o) {
  const auto doc = load_design(kData / "demo_layout_balanced.json");
  const auto& lb = std::get<LayoutBalancedDesign>(doc.design.topology);
  const auto grid = FrequencyGrid::linear(doc.sweep.f_start_hz, doc.sweep.f_stop_hz, 401);
  const auto a2 = scale(lb.a1, 0.5);
  const auto bal = sweep_reduce(build_layout_balanced(lb.a1, a2, lb.b), grid, k50);
  const auto can = sweep_reduce(build_canonical_lattice(lb.a1, lb.b), grid, k50);
  const double err = max_diff(bal, can);

  // Split sections 10 % short of half the port arm.
  const auto skew = sweep_reduce(build_layout_balanced(lb.a1, scale(lb.a1, 0.45), lb.b), grid, k50);
  // Reported only: 10 % excess lifts the low skirt but lowers the high one.
  const auto excess = sweep_reduce(build_layout_balanced(lb.a1, scale(lb.a1, 0.55), lb.b), grid, k50);
  const auto metrics = extract_metrics(bal);
  double oob_bal = 0.0, oob_skew = 0.0, oob_excess = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid[i];
    if (f > 0.9 * metrics.f_lo_hz && f < 1.1 * metrics.f_hi_hz) continue;
    oob_bal = std::max(oob_bal, std::abs(bal.matrix(i)(1, 0)));
    oob_skew = std::max(oob_skew, std::abs(skew.matrix(i)(1, 0)));
    oob_excess = std::max(oob_excess, std::abs(excess.matrix(i)(1, 0)));
  }
  o.detail << "balanced vs canonical " << err << "; OoB peak |S21| " << 20 * std::log10(oob_bal) << " dB ideal, "
           << 20 * std::log10(oob_skew) << " dB with 10% deficit (" << 20 * std::log10(oob_excess)
           << " dB with 10% excess)";
  o.require(err < 1e-9, "equivalence < 1e-9");
  o.require(oob_skew > oob_bal, "imbalance raises OoB S21");
}

TwoPortMatrix random_passive(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix2d l;
  l << 3 + 8 * std::abs(u(rng)), 0, 8 * u(rng), 3 + 8 * std::abs(u(rng));
  const Eigen::Matrix2d r = l * l.transpose();
  const double x12 = 60 * u(rng);
  Matrix2c z;
  z << cplx{r(0, 0), 80 * u(rng)}, cplx{r(0, 1), x12}, cplx{r(1, 0), x12}, cplx{r(1, 1), 80 * u(rng)};
  return convert(TwoPortMatrix::z(z), ParamKind::S);
}

void ac3(Outcome& o) {
  std::mt19937_64 rng(3);
  const auto grid = FrequencyGrid::linear(1e9, 2e9, 3);
  double worst_s = 0.0, worst_g = 0.0;
  int n = 0;
  while (n < 100) {
    const auto s = random_passive(rng);
    if (rollett_k(s) < 1.0 + 1e-6) continue;
    ++n;
    const auto sol = conjugate_match(s, grid[1]);
    const SweepResponse r(grid, ParamKind::S, std::vector<Matrix2c>(3, s.m()));
    const auto m = apply_match(r, sol).matrix(1);
    worst_s = std::max({worst_s, std::abs(m(0, 0)), std::abs(m(1, 1))});
    worst_g = std::max(worst_g, std::abs(std::norm(m(1, 0)) - max_available_gain(s)));
  }
  Matrix2c series100;
  series100 << 0.5, 0.5, 0.5, 0.5;
  const auto b = conjugate_match(TwoPortMatrix::s(series100), 1e9);
  o.detail << "max |Sii| " << worst_s << ", max gain err " << worst_g << "; series 100 ohm: K=" << b.rollett_k
           << " boundary=" << b.boundary << " degenerate=" << b.degenerate();
  o.require(worst_s < 1e-8, "|Sii| < 1e-8");
  o.require(worst_g < 1e-8, "gain = Gmax within 1e-8");
  o.require(b.rollett_k == 1.0 && b.feasible && b.boundary && b.degenerate(), "boundary case");
}

void ac4(Outcome& o) {
  std::vector<FilterDesign> designs;
  for (const char* f : {"demo_direct_lattice.json", "demo_layout_balanced.json", "demo_ladder.json"}) {
    designs.push_back(load_design(kData / f).design);
  }
  const auto grid = FrequencyGrid::linear(1.01e9, 39.99e9, 1201);
  double unitary = 0.0, margin = 1.0;
  for (const auto& d : designs) {
    margin = std::min(margin, passivity_margin(sweep_reduce(build_netlist(d), grid, k50)));
    // Zero every resistance; set_parameter reaches all elements sharing a name.
    FilterDesign lossless = d;
    for (const auto& name : resonator_names(d)) {
      set_parameter(lossless, name + ".r0", 0.0);
      set_parameter(lossless, name + ".rs", 0.0);
      const std::size_t n = resonator(d, name).branches.size();
      for (std::size_t k = 0; k < n; ++k) set_parameter(lossless, name + ".rm[" + std::to_string(k) + "]", 0.0);
    }
    const auto s = sweep_reduce(build_netlist(lossless), grid, k50);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Matrix2c e = s.matrix(i).adjoint() * s.matrix(i) - Matrix2c::Identity();
      unitary = std::max(unitary, e.norm());
    }
  }
  o.detail << "lossless max ||S^H S - I|| " << unitary << ", min passivity margin " << margin;
  o.require(unitary < 1e-10, "lossless unitarity");
  o.require(margin >= -1e-12, "passivity");
}

void ac5(Outcome& o) {
  // Series RLC between 50 ohm ports, f0 = 1 GHz.
  const double r = 2.0, l = 80e-9, z0 = 50.0;
  const double c = 1.0 / (std::pow(2 * kPi * 1e9, 2) * l);
  const double f0 = 1.0 / (2 * kPi * std::sqrt(l * c));
  const double q = 2 * kPi * f0 * l / (2 * z0 + r);
  const auto grid = FrequencyGrid::linear(0.5e9, 2e9, 300001);
  std::vector<Matrix2c> data;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = 2 * kPi * grid[i];
    const cplx t = 2 * z0 / (2 * z0 + cplx{r, w * l - 1.0 / (w * c)});
    Matrix2c m;
    m << 0, t, t, 0;
    data.push_back(m);
  }
  MetricsOptions half;
  half.band_drop_db = 10 * std::log10(2.0);
  half.center = CenterConvention::Geometric;
  const auto m = extract_metrics(SweepResponse(grid, ParamKind::S, data), {}, half);
  const double bw_err = std::abs((m.f_hi_hz - m.f_lo_hz) - f0 / q) / (f0 / q);
  const auto e = metrics_from_edges(17.0e9, 22.4e9);
  o.detail << "RLC bandwidth rel err " << bw_err << "; (17.0, 22.4) GHz -> f_c " << e.f_c_hz / 1e9 << " GHz, FBW "
           << 100 * e.fbw_3db << " %";
  o.require(bw_err < 1e-6, "RLC bandwidth");
  o.require(std::abs(e.f_c_hz - 19.7e9) < 1.0, "f_c = 19.7 GHz");
  o.require(std::abs(100 * e.fbw_3db - 27.41) < 0.005, "FBW = 27.41 %");
}

void ac6(Outcome& o) {
  const auto t0 = Clock::now();
  // Single branch, noiseless: every parameter within 1 %.
  MbvdParams one;
  one.c0 = 80e-15;
  one.r0 = 0.6;
  one.rs = 1.2;
  one.branches = {branch_from_resonance(19e9, 30e-15, 180, ModeLabel::parse("S2"))};
  const auto grid1 = FrequencyGrid::linear(2e9, 30e9, 701);
  const auto m1 = synthesize_one_port(one, grid1);
  const auto f1 = fit_mbvd(m1, initial_guess(m1, 1));
  const auto& b = f1.params.branches[0];
  const auto& t = one.branches[0];
  double worst1 = 0.0;
  for (auto [got, want] : {std::pair{f1.params.c0, one.c0}, {f1.params.r0, one.r0}, {f1.params.rs, one.rs},
                           {b.cm, t.cm}, {b.lm, t.lm}, {b.rm, t.rm}}) {
    worst1 = std::max(worst1, std::abs(got - want) / want);
  }
  const bool ls_ok = f1.params.ls < 1e-13;

  // Three branches (A1 + S2 + A3), 1 % noise, 20 seeds.
  const auto truth = parse_resonator(nlohmann::json::parse(read_file(kData / "three_mode_resonator.json")));
  const auto grid3 = FrequencyGrid::linear(2e9, 30e9, 1001);
  FitOptions opt;
  opt.restarts = 1;
  double worst_fs = 0.0, worst_k2 = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = synthesize_one_port(truth, grid3, 0.01, seed);
    const auto fit = fit_mbvd(m, initial_guess(m, 3), opt);
    for (std::size_t k = 0; k < 3; ++k) {
      const double fs = series_resonance(fit.params.branches[k]);
      const double fs_true = series_resonance(truth.branches[k]);
      worst_fs = std::max(worst_fs, std::abs(fs - fs_true) / fs_true);
      const double k2 = coupling(fit.params, k), k2_true = coupling(truth, k);
      worst_k2 = std::max(worst_k2, std::abs(k2 - k2_true) / k2_true);
    }
  }
  const double secs = seconds_since(t0);
  o.detail << "single-branch worst param err " << 100 * worst1 << " %; three-branch worst f_s err " << 100 * worst_fs
           << " %, worst k2 err " << 100 * worst_k2 << " % over 20 seeds; " << secs << " s";
  o.require(worst1 < 0.01 && ls_ok, "single-branch within 1 %");
  o.require(worst_fs < 1e-3, "f_s within 0.1 %");
  o.require(worst_k2 < 0.05, "k2 within 5 %");
  o.require(secs < 60.0, "runtime < 60 s");
}

Evaluation evaluate_doc(const DesignDocument& doc) {
  return evaluate(doc.design, doc.sweep.grid(), doc.match, doc.stopbands);
}

void ac7(Outcome& o) {
  const auto t0 = Clock::now();
  const auto direct = evaluate_doc(load_design(kData / "demo_direct_lattice.json")).metrics;
  const auto balanced = evaluate_doc(load_design(kData / "demo_layout_balanced.json")).metrics;
  const double secs = seconds_since(t0);
  o.detail << "direct: f_c " << direct.f_c_hz / 1e9 << " GHz, FBW " << 100 * direct.fbw_3db << " %, IL "
           << direct.il_min_db << " dB; balanced: f_c " << balanced.f_c_hz / 1e9 << " GHz, FBW "
           << 100 * balanced.fbw_3db << " %, IL " << balanced.il_min_db << " dB; " << secs << " s";
  o.require(direct.fbw_3db >= 0.25 && direct.il_min_db <= 1.0, "direct lattice FBW/IL");
  o.require(std::abs(direct.f_c_hz / 19.7e9 - 1.0) < 0.03, "direct lattice near 19.7 GHz");
  o.require(balanced.fbw_3db >= 0.35 && balanced.il_min_db <= 1.2, "layout-balanced FBW/IL");
  o.require(std::abs(balanced.f_c_hz / 19.7e9 - 1.0) < 0.03, "layout-balanced near 19.7 GHz");
  o.require(secs < 10.0, "runtime < 10 s");
}

void ac8(Outcome& o) {
  const auto doc = load_design(kData / "demo_direct_lattice.json");
  const auto grid = doc.sweep.grid();
  auto spurred = doc.design;
  auto& dl = std::get<DirectLatticeDesign>(spurred.topology);
  const auto a1 = branch_from_resonance(12.0e9, 6e-15, 150, ModeLabel::parse("A1"));
  const auto a3 = branch_from_resonance(28.0e9, 4e-15, 150, ModeLabel::parse("A3"));
  dl.a = add_spur(add_spur(dl.a, a1), a3);

  const auto clean = evaluate(doc.design, grid, doc.match, doc.stopbands);
  const auto spur = evaluate(spurred, grid, doc.match, doc.stopbands);
  const auto il_clean = insertion_loss_trace(clean.response);
  const auto il_spur = insertion_loss_trace(spur.response);
  // Rejection within +/-2 % of each spur resonance.
  auto window_min = [&](const std::vector<double>& il, double fc) {
    double v = 1e9;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (std::abs(grid[i] / fc - 1.0) <= 0.02) v = std::min(v, il[i]);
    }
    return v;
  };
  double degradation = 1e9;
  for (const auto& br : {a1, a3}) {
    const double fs = series_resonance(br);
    const double d = window_min(il_clean, fs) - window_min(il_spur, fs);
    o.detail << br.mode.str() << " @ " << fs / 1e9 << " GHz: rejection " << window_min(il_clean, fs) << " -> "
             << window_min(il_spur, fs) << " dB; ";
    degradation = std::min(degradation, d);
  }
  const double dil = std::abs(spur.metrics.il_min_db - clean.metrics.il_min_db);
  o.detail << "passband IL change " << dil << " dB";
  o.require(degradation >= 10.0, "rejection degrades >= 10 dB near each spur");
  o.require(dil < 0.5, "passband IL change < 0.5 dB");
}

void ac9(Outcome& o) {
  const auto t0 = Clock::now();
  const auto spec = load_target_spec(kData / "wideband_spec.json");
  OptimizeOptions opt;
  opt.budget = 1500;
  opt.starts = 4;
  opt.seed = 1;
  struct Row {
    double cost;
    FilterMetrics m;
  };
  auto run = [&](const char* file) {
    const auto doc = load_design(kData / file);
    opt.match = doc.match;
    const auto grid = doc.sweep.grid();
    const auto r = optimize(doc.design, doc.free, spec, grid, opt);
    return Row{r.best_cost, evaluate(r.best, grid, doc.match, spec.stopbands).metrics};
  };
  const Row lat = run("demo_direct_lattice.json");
  const Row lad = run("demo_ladder.json");
  o.detail << "lattice: cost " << lat.cost << ", FBW " << 100 * lat.m.fbw_3db << " %, IL " << lat.m.il_min_db
           << " dB, OoB " << lat.m.worst_oob_db() << " dB; ladder: cost " << lad.cost << ", FBW "
           << 100 * lad.m.fbw_3db << " %, IL " << lad.m.il_min_db << " dB, OoB " << lad.m.worst_oob_db() << " dB; "
           << seconds_since(t0) << " s";
  o.require(lat.m.fbw_3db > lad.m.fbw_3db, "lattice FBW > ladder FBW");
}

void ac10(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / ("xlat_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto doc = load_design(kData / "demo_direct_lattice.json");
  const auto r = evaluate_doc(doc).unmatched;
  double err = 0.0;
  for (auto fmt : {TouchstoneFormat::MA, TouchstoneFormat::RI, TouchstoneFormat::DB}) {
    write_touchstone(r, dir / "rt.s2p", fmt);
    err = std::max(err, max_diff(read_touchstone(dir / "rt.s2p").sweep(), r));
  }
  fs::remove_all(dir);

  auto code_of = [](const char* text) {
    try {
      (void)parse_touchstone(text, 2);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  const bool malformed = code_of("# GHz S RI R\n1 0 0 0 0 0 0 0 0\n") == ErrorCode::MalformedOptionLine &&
                         code_of("# GHz S QQ R 50\n1 0 0 0 0 0 0 0 0\n") == ErrorCode::MalformedOptionLine;
  const bool nonmono = code_of("# GHz S RI R 50\n2 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n") ==
                       ErrorCode::NonMonotoneFrequency;
  o.detail << "round-trip max err " << err << "; malformed option line -> " << (malformed ? "MalformedOptionLine" : "?")
           << "; non-monotone -> " << (nonmono ? "NonMonotoneFrequency" : "?");
  o.require(err < 1e-9, "round trip < 1e-9");
  o.require(malformed, "malformed option lines rejected");
  o.require(nonmono, "non-monotone frequency rejected");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> checks{
      {"AC-1", ac1}, {"AC-2", ac2}, {"AC-3", ac3}, {"AC-4", ac4}, {"AC-5", ac5},
      {"AC-6", ac6}, {"AC-7", ac7}, {"AC-8", ac8}, {"AC-9", ac9}, {"AC-10", ac10}};
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failed += !o.pass;
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
