#include "xlat/topology.hpp"

#include "xlat/errors.hpp"

namespace xlat {

namespace {

AdmittanceFn arm(const MbvdParams& p) {
  p.validate();
  return [p](double f) { return admittance(p, f); };
}

}  // namespace

const char* topology_name(const Topology& t) noexcept {
  struct Visitor {
    const char* operator()(const LadderDesign&) const { return "ladder"; }
    const char* operator()(const CanonicalLatticeDesign&) const { return "canonical_lattice"; }
    const char* operator()(const DirectLatticeDesign&) const { return "direct_lattice"; }
    const char* operator()(const LayoutBalancedDesign&) const { return "layout_balanced"; }
  };
  return std::visit(Visitor{}, t);
}

TwoPortMatrix lattice_closed_form(cplx y_a, cplx y_b) {
  Matrix2c y;
  y << 0.5 * (y_a + y_b), 0.5 * (y_b - y_a), 0.5 * (y_b - y_a), 0.5 * (y_a + y_b);
  return TwoPortMatrix::y(y);
}

Netlist build_canonical_lattice(const MbvdParams& a, const MbvdParams& b) {
  // 0 = 1, 1 = 1', 2 = 2, 3 = 2'. The network has no ground of its own, so 1'
  // serves as the reference.
  Netlist net(4, 1);
  net.add_branch(0, 2, arm(a), "A 1-2");
  net.add_branch(1, 3, arm(a), "A 1'-2'");
  net.add_branch(0, 3, arm(b), "B 1-2'");
  net.add_branch(1, 2, arm(b), "B 1'-2");
  net.add_port(0, 1);
  net.add_port(2, 3);
  return net;
}

Netlist build_direct_lattice(const MbvdParams& a, const MbvdParams& b, GroundMode grounds,
                             FourthArm fourth_arm) {
  // 0 = S1, 1 = G1, 2 = S2, 3 = G2 (merged into G1 when grounds are tied).
  const bool tied = grounds == GroundMode::Tied;
  const int s1 = 0, g1 = 1, s2 = 2;
  const int g2 = tied ? g1 : 3;
  Netlist net(tied ? 3 : 4, g1);
  net.add_branch(s1, s2, arm(a), "A S1-S2");
  net.add_branch(s1, g2, arm(b), "B S1-G2");
  net.add_branch(g1, s2, arm(b), "B G1-S2");
  if (fourth_arm == FourthArm::Dangling) {
    net.add_branch(g1, kOpenTerminal, arm(a), "A G1-(dangling)");
  } else if (tied) {
    net.add_branch(g1, kOpenTerminal, arm(a), "A G1-G2 (shorted by tied grounds)");
  } else {
    net.add_branch(g1, g2, arm(a), "A G1-G2");
  }
  net.add_port(s1, g1);
  net.add_port(s2, g2);
  return net;
}

Netlist build_layout_balanced(const MbvdParams& a1, const MbvdParams& a2, const MbvdParams& b) {
  // 0 = S1, 1 = G1, 2 = S2, 3 = G2; both A2 sections span G1-G2.
  Netlist net(4, 1);
  net.add_branch(0, 2, arm(a1), "A1 S1-S2");
  net.add_branch(0, 3, arm(b), "B S1-G2");
  net.add_branch(1, 2, arm(b), "B G1-S2");
  net.add_branch(1, 3, arm(a2), "A2 G1-G2 (upper)");
  net.add_branch(1, 3, arm(a2), "A2 G1-G2 (lower)");
  net.add_port(0, 1);
  net.add_port(2, 3);
  return net;
}

Netlist build_ladder(const LadderDesign& ladder) {
  if (ladder.elements.empty()) fail(ErrorCode::EmptyDesign, "ladder has no elements");
  int series = 0;
  for (const auto& e : ladder.elements) series += e.placement == Placement::Series;
  // node 0 = ground, node 1 = port 1, one new node per series element.
  Netlist net(2 + series, 0);
  int node = 1;
  int next = 2;
  for (const auto& e : ladder.elements) {
    if (e.placement == Placement::Series) {
      net.add_branch(node, next, arm(e.params), "series " + e.name);
      node = next++;
    } else {
      net.add_branch(node, 0, arm(e.params), "shunt " + e.name);
    }
  }
  if (node == 1) {
    // Shunt-only ladders have both ports on one node, which has no Y matrix.
    Netlist tied(3, 0);
    for (const auto& br : net.branches()) tied.add_branch(br.a, br.b, br.y, br.label);
    tied.add_branch(1, 2, [](double) { return cplx{kStiffShort}; }, "through");
    tied.add_port(1, 0);
    tied.add_port(2, 0);
    return tied;
  }
  net.add_port(1, 0);
  net.add_port(node, 0);
  return net;
}

Netlist build_ladder(const std::vector<MbvdParams>& series, const std::vector<MbvdParams>& shunt,
                     bool shunt_first) {
  LadderDesign d;
  std::size_t i = 0, j = 0;
  bool take_shunt = shunt_first;
  while (i < series.size() || j < shunt.size()) {
    if (take_shunt && j < shunt.size()) {
      d.elements.push_back({Placement::Shunt, "shunt" + std::to_string(j), shunt[j]});
      ++j;
    } else if (!take_shunt && i < series.size()) {
      d.elements.push_back({Placement::Series, "series" + std::to_string(i), series[i]});
      ++i;
    } else if (j < shunt.size()) {
      d.elements.push_back({Placement::Shunt, "shunt" + std::to_string(j), shunt[j]});
      ++j;
    } else {
      d.elements.push_back({Placement::Series, "series" + std::to_string(i), series[i]});
      ++i;
    }
    take_shunt = !take_shunt;
  }
  return build_ladder(d);
}

cplx ground_section_admittance(const LayoutBalancedDesign& d, double f_hz) {
  return admittance(d.a2, f_hz);
}

cplx ground_ground_admittance(const LayoutBalancedDesign& d, double f_hz) {
  return 2.0 * admittance(d.a2, f_hz);
}

Netlist build_netlist(const FilterDesign& design) {
  struct Visitor {
    Netlist operator()(const LadderDesign& d) const { return build_ladder(d); }
    Netlist operator()(const CanonicalLatticeDesign& d) const { return build_canonical_lattice(d.a, d.b); }
    Netlist operator()(const DirectLatticeDesign& d) const {
      return build_direct_lattice(d.a, d.b, d.grounds, d.fourth_arm);
    }
    Netlist operator()(const LayoutBalancedDesign& d) const {
      return build_layout_balanced(d.a1, d.a2, d.b);
    }
  };
  return std::visit(Visitor{}, design.topology);
}

SweepResponse ladder_by_cascade(const LadderDesign& ladder, const FrequencyGrid& grid, RefPair refs) {
  if (ladder.elements.empty()) fail(ErrorCode::EmptyDesign, "ladder has no elements");
  std::vector<Matrix2c> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TwoPortMatrix chain = TwoPortMatrix::abcd(Matrix2c::Identity());
    for (const auto& e : ladder.elements) {
      const cplx y = admittance(e.params, grid[i]);
      chain = cascade(chain, e.placement == Placement::Series ? abcd_series(1.0 / y) : abcd_shunt(y));
    }
    out.push_back(convert(chain, ParamKind::S, refs).m());
  }
  return SweepResponse(grid, ParamKind::S, std::move(out), refs);
}

}  // namespace xlat
