#include "support.hpp"

#include "xlat/mna.hpp"
#include "xlat/topology.hpp"

using namespace xlat;

namespace {

AdmittanceFn constant(cplx y) {
  return [y](double) { return y; };
}

AdmittanceFn of(const MbvdParams& p) {
  return [p](double f) { return admittance(p, f); };
}

// Four-arm lattice assembled by hand: nodes 1, 1', 2, 2' = 0, 1, 2, 3.
Netlist hand_lattice(AdmittanceFn ya, AdmittanceFn yb) {
  Netlist n(4, 1);
  n.add_branch(0, 2, ya);
  n.add_branch(1, 3, ya);
  n.add_branch(0, 3, yb);
  n.add_branch(1, 2, yb);
  n.add_port(0, 1);
  n.add_port(2, 3);
  return n;
}

Matrix2c y2(const Netlist& n, double f) { return reduce(n, f).y; }

const RefPair k50{cplx{50.0}, cplx{50.0}};

}  // namespace

TEST_CASE("closed form agrees with four-arm reduction") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uf(1e8, 5e10);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const cplx ya = xt::random_cplx(rng, -0.1, 0.1);
    const cplx yb = xt::random_cplx(rng, -0.1, 0.1);
    const double f = uf(rng);
    const Matrix2c mna = y2(hand_lattice(constant(ya), constant(yb)), f);
    worst = std::max(worst, xt::rel_diff(lattice_closed_form(ya, yb).m(), mna));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("closed form special cases") {
  const cplx y{0.01, 0.03};
  const auto bal = lattice_closed_form(y, y);
  CHECK(bal(0, 1) == cplx{});
  CHECK(bal(1, 0) == cplx{});

  const auto open = lattice_closed_form(y, cplx{});
  CHECK(open(0, 0) == 0.5 * y);
  CHECK(open(0, 1) == -0.5 * y);
  // Two series arms only: 1-2 and 1'-2'.
  Netlist n(4, 1);
  n.add_branch(0, 2, constant(y));
  n.add_branch(1, 3, constant(y));
  n.add_port(0, 1);
  n.add_port(2, 3);
  CHECK(xt::rel_diff(open.m(), y2(n, 1e9)) < 1e-12);
}

TEST_CASE("canonical lattice builder matches the closed form") {
  const auto a = xt::resonator(20e9, 0.3);
  const auto b = xt::resonator(16.5e9, 0.3, 150e-15);
  const auto net = build_canonical_lattice(a, b);
  for (double f = 10e9; f <= 30e9; f += 0.37e9) {
    const auto cf = lattice_closed_form(admittance(a, f), admittance(b, f));
    CHECK(xt::rel_diff(cf.m(), y2(net, f)) < 1e-9);
  }
}

TEST_CASE("identical arms null the transmission") {
  const auto p = xt::resonator(19e9);
  const auto grid = FrequencyGrid::linear(5e9, 35e9, 301);
  const auto s = sweep_reduce(build_canonical_lattice(p, p), grid, k50);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(s.matrix(i)(1, 0)) < 1e-10);  // below -200 dB
  }
}

TEST_CASE("swapping arms flips the sign of S21") {
  const auto a = xt::resonator(20e9);
  const auto b = xt::resonator(16.5e9, 0.3, 150e-15);
  const auto grid = FrequencyGrid::linear(10e9, 30e9, 201);
  const auto ab = sweep_reduce(build_canonical_lattice(a, b), grid, k50);
  const auto ba = sweep_reduce(build_canonical_lattice(b, a), grid, k50);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(ab.matrix(i)(1, 0) + ba.matrix(i)(1, 0)) < 1e-12);
    CHECK(std::abs(ab.matrix(i)(0, 0) - ba.matrix(i)(0, 0)) < 1e-12);
  }
}

TEST_CASE("direct lattice variants") {
  const auto a = xt::resonator(20e9);
  const auto b = xt::resonator(16.5e9, 0.3, 150e-15);
  const auto grid = FrequencyGrid::linear(10e9, 30e9, 101);

  // Bridge: A between the hot nodes, one B to ground at each port.
  Netlist bridge(3, 0);
  bridge.add_branch(1, 2, of(a));
  bridge.add_branch(1, 0, of(b));
  bridge.add_branch(2, 0, of(b));
  bridge.add_port(1, 0);
  bridge.add_port(2, 0);
  const auto ref = sweep_reduce(bridge, grid, k50);

  const auto tied_dangling = sweep_reduce(build_direct_lattice(a, b, GroundMode::Tied, FourthArm::Dangling), grid, k50);
  const auto tied_present = sweep_reduce(build_direct_lattice(a, b, GroundMode::Tied, FourthArm::Present), grid, k50);
  const auto sep_present = sweep_reduce(build_direct_lattice(a, b, GroundMode::Separate, FourthArm::Present), grid, k50);
  const auto canonical = sweep_reduce(build_canonical_lattice(a, b), grid, k50);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(xt::max_abs_diff(tied_dangling.matrix(i), ref.matrix(i)) < 1e-12);
    CHECK(xt::max_abs_diff(tied_present.matrix(i), tied_dangling.matrix(i)) < 1e-12);
    CHECK(xt::max_abs_diff(sep_present.matrix(i), canonical.matrix(i)) < 1e-9);
  }

  // The dangling arm stays in the netlist as an unstamped annotation.
  const auto net = build_direct_lattice(a, b, GroundMode::Separate, FourthArm::Dangling);
  int open = 0;
  for (const auto& br : net.branches()) open += br.is_open();
  CHECK(net.branches().size() == 4);
  CHECK(open == 1);
}

TEST_CASE("layout-balanced lattice equals the canonical lattice under an ideal split") {
  const auto a1 = xt::resonator(20e9, 0.3, 100e-15, 150, 0.8, 0.4);
  const auto b = xt::resonator(16.4e9, 0.3, 150e-15, 150, 0.8, 0.4);
  const LayoutBalancedDesign d{a1, scale(a1, 0.5), b};
  const auto grid = FrequencyGrid::linear(5e9, 35e9, 401);
  const auto bal = sweep_reduce(build_layout_balanced(d.a1, d.a2, d.b), grid, k50);
  const auto can = sweep_reduce(build_canonical_lattice(a1, b), grid, k50);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(xt::max_abs_diff(bal.matrix(i), can.matrix(i)) < 1e-9);
    CHECK(std::abs(bal.matrix(i)(0, 0) - bal.matrix(i)(1, 1)) < 1e-12);
    const double f = grid[i];
    CHECK(std::abs(ground_ground_admittance(d, f) - admittance(a1, f)) <= 1e-12 * std::abs(admittance(a1, f)));
    CHECK(std::abs(ground_section_admittance(d, f) - 0.5 * admittance(a1, f)) <=
          1e-12 * std::abs(admittance(a1, f)));
  }
}

TEST_CASE("imperfect split raises out-of-band transmission") {
  const auto a1 = xt::resonator(20e9, 0.3, 100e-15, 150, 0.8, 0.4);
  const auto b = xt::resonator(16.4e9, 0.3, 100e-15, 150, 0.8, 0.4);
  const auto grid = FrequencyGrid::linear(5e9, 35e9, 301);
  const auto ideal = sweep_reduce(build_layout_balanced(a1, scale(a1, 0.5), b), grid, k50);
  const auto under = sweep_reduce(build_layout_balanced(a1, scale(a1, 0.45), b), grid, k50);
  const auto over = sweep_reduce(build_layout_balanced(a1, scale(a1, 0.55), b), grid, k50);
  // Undersized ground sections lift |S21| everywhere outside 14..25 GHz.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 14e9 && grid[i] < 25e9) continue;
    CHECK(std::abs(under.matrix(i)(1, 0)) > std::abs(ideal.matrix(i)(1, 0)));
  }
  // Oversized ones move the lattice null inward and roll up at the low end.
  CHECK(std::abs(over.matrix(0)(1, 0)) > 2.0 * std::abs(ideal.matrix(0)(1, 0)));
}

TEST_CASE("transmission zeros sit at arm admittance crossings") {
  const auto a = xt::lossless(xt::resonator(20e9, 0.3, 100e-15));
  const auto b = xt::lossless(xt::resonator(16.4e9, 0.3, 80e-15));
  const auto grid = FrequencyGrid::linear(10.0005e9, 30.0005e9, 20001);
  const auto s = sweep_reduce(build_canonical_lattice(a, b), grid, k50);
  std::vector<double> gap(grid.size()), size(grid.size()), t(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx ya = admittance(a, grid[i]), yb = admittance(b, grid[i]);
    gap[i] = (ya - yb).imag();
    size[i] = std::abs(ya) + std::abs(yb);
    t[i] = std::abs(s.matrix(i)(1, 0));
  }
  int found = 0;
  for (std::size_t i = 1; i + 2 < grid.size(); ++i) {
    // A crossing changes the sign of the difference through zero, not through a pole.
    const bool sign_change = (gap[i] < 0.0) != (gap[i + 1] < 0.0);
    if (!sign_change || std::min(std::abs(gap[i]), std::abs(gap[i + 1])) > 0.05 * size[i]) continue;
    ++found;
    bool local_min = false;
    for (std::size_t j = i - 1; j <= i + 2; ++j) local_min |= t[j] <= t[j - 1] && t[j] <= t[j + 1];
    CHECK(local_min);
  }
  CHECK(found >= 2);
}

TEST_CASE("single-element ladders") {
  const auto p = xt::lossless(xt::resonator(20e9, 0.3));
  // Offset by half a step so no point lands exactly on a lossless resonance.
  const auto grid = FrequencyGrid::linear(15.0005e9, 30.0005e9, 15001);
  const double step = grid[1] - grid[0];
  auto argmin21 = [&](const SweepResponse& s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (std::abs(s.matrix(i)(1, 0)) < std::abs(s.matrix(best)(1, 0))) best = i;
    }
    return grid[best];
  };
  const auto series = sweep_reduce(build_ladder({p}, {}, false), grid, k50);
  CHECK(std::abs(argmin21(series) - antiresonance(p, 0)) <= step);
  const auto shunt = sweep_reduce(build_ladder({}, {p}, true), grid, k50);
  CHECK(std::abs(argmin21(shunt) - series_resonance(p.branches[0])) <= step);
}

TEST_CASE("ladder assembly") {
  const auto a = xt::resonator(20e9);
  const auto b = xt::resonator(16.5e9);
  const auto net = build_ladder({a}, {b, b}, true);
  CHECK(net.branches().size() == 3);
  CHECK(net.ports().size() == 2);
  XT_CHECK_CODE(build_ladder(LadderDesign{}), ErrorCode::EmptyDesign);
  XT_CHECK_CODE(ladder_by_cascade(LadderDesign{}, FrequencyGrid::linear(1e9, 2e9, 3), k50),
                ErrorCode::EmptyDesign);

  auto bad = a;
  bad.c0 = -1;
  XT_CHECK_CODE(build_canonical_lattice(bad, b), ErrorCode::InvalidArgument);
}

TEST_CASE("build_netlist dispatches on the topology") {
  const auto a = xt::resonator(20e9);
  const auto b = xt::resonator(16.5e9);
  FilterDesign d{"x", CanonicalLatticeDesign{a, b}, k50};
  CHECK(std::string(topology_name(d.topology)) == "canonical_lattice");
  CHECK(build_netlist(d).branches().size() == 4);
  d.topology = LayoutBalancedDesign{a, scale(a, 0.5), b};
  CHECK(std::string(topology_name(d.topology)) == "layout_balanced");
  CHECK(build_netlist(d).branches().size() == 5);
}
