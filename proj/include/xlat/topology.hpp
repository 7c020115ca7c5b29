#pragma once

#include <string>
#include <variant>
#include <vector>

#include "xlat/mna.hpp"
#include "xlat/resonator.hpp"

namespace xlat {

/// Admittance used to tie two nodes together without merging them.
inline constexpr double kStiffShort = 1e12;

enum class GroundMode { Tied, Separate };
enum class FourthArm { Present, Dangling };
enum class Placement { Series, Shunt };

struct LadderElement {
  Placement placement;
  std::string name;
  MbvdParams params;
};

/// Elements in order from port 1 to port 2.
struct LadderDesign {
  std::vector<LadderElement> elements;
};

/// Four-arm lattice: A arms 1-2 and 1'-2', B arms 1-2' and 1'-2.
struct CanonicalLatticeDesign {
  MbvdParams a;
  MbvdParams b;
};

/// Single-ended planar lattice with ground pads G1/G2.
struct DirectLatticeDesign {
  MbvdParams a;
  MbvdParams b;
  GroundMode grounds = GroundMode::Separate;
  FourthArm fourth_arm = FourthArm::Present;
};

/// Lattice with one A arm replaced by two sections A2 between the ground pads.
struct LayoutBalancedDesign {
  MbvdParams a1;
  MbvdParams a2;
  MbvdParams b;
};

using Topology = std::variant<LadderDesign, CanonicalLatticeDesign, DirectLatticeDesign,
                              LayoutBalancedDesign>;

struct FilterDesign {
  std::string name;
  Topology topology;
  RefPair port_refs{cplx{50.0}, cplx{50.0}};
};

const char* topology_name(const Topology& t) noexcept;

/// Y matrix of a symmetric lattice from its arm admittances.
TwoPortMatrix lattice_closed_form(cplx y_a, cplx y_b);

Netlist build_canonical_lattice(const MbvdParams& a, const MbvdParams& b);
Netlist build_direct_lattice(const MbvdParams& a, const MbvdParams& b, GroundMode grounds,
                             FourthArm fourth_arm);
Netlist build_layout_balanced(const MbvdParams& a1, const MbvdParams& a2, const MbvdParams& b);
Netlist build_ladder(const LadderDesign& ladder);
/// Interleaves the lists; `shunt_first` puts a shunt element at port 1.
Netlist build_ladder(const std::vector<MbvdParams>& series, const std::vector<MbvdParams>& shunt,
                     bool shunt_first);

/// Total admittance between the two ground pads of the layout-balanced
/// realization: the two A2 sections in parallel, 2 * Y_A2(f).
cplx ground_ground_admittance(const LayoutBalancedDesign& d, double f_hz);
/// Admittance of one A2 section, Y_A2(f); equals Y_A1/2 under an ideal split.
cplx ground_section_admittance(const LayoutBalancedDesign& d, double f_hz);

Netlist build_netlist(const FilterDesign& design);

/// Same ladder assembled by chaining ABCD sections (independent of MNA).
SweepResponse ladder_by_cascade(const LadderDesign& ladder, const FrequencyGrid& grid,
                                RefPair refs);

}  // namespace xlat
