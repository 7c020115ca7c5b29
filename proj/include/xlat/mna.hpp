#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xlat/netcore.hpp"

namespace xlat {

/// Complex admittance (S) of a branch as a function of frequency (Hz).
using AdmittanceFn = std::function<cplx(double)>;

/// Terminal value for a branch end that is left unconnected. Such branches
/// are kept for bookkeeping and never stamped.
inline constexpr int kOpenTerminal = -1;

/// Branch admittances at or above this magnitude (S) are ideal shorts: their
/// end nodes are merged before the nodal matrix is built.
inline constexpr double kShortAdmittance = 1e100;
/// Stiff branches (S) are merged too unless both ends carry ports. The
/// error of treating them as shorts is |Y|/kStiffAdmittance relative.
inline constexpr double kStiffAdmittance = 1e12;

struct Branch {
  int a;
  int b;
  AdmittanceFn y;
  std::string label;

  bool is_open() const noexcept { return a == kOpenTerminal || b == kOpenTerminal; }
};

struct Port {
  int hot;
  int ref;
};

/// Nodes 0..node_count-1, one of which is the ground reference. Ports may be
/// referenced to ground or to any other node (difference voltages).
class Netlist {
 public:
  Netlist(int node_count, int ground);

  void add_branch(int a, int b, AdmittanceFn y, std::string label = {});
  void add_port(int hot, int ref);

  int node_count() const noexcept { return node_count_; }
  int ground() const noexcept { return ground_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  const std::vector<Port>& ports() const noexcept { return ports_; }

  /// Throws InvalidArgument unless the netlist is complete (>= 1 stamped
  /// branch, >= 1 port).
  void validate() const;

 private:
  void check_node(int n) const;

  int node_count_;
  int ground_;
  std::vector<Branch> branches_;
  std::vector<Port> ports_;
};

struct ReducedYMatrix {
  double frequency_hz;
  Eigen::MatrixXcd y;
};

/// Port-level admittance matrix at one frequency. Internal nodes are removed
/// by Schur complement. A node with no admittance path to ground raises
/// FloatingNodeError; a numerically singular system or a shorted port raises
/// SingularConversion.
ReducedYMatrix reduce(const Netlist& net, double f_hz);

/// Two-port sweep. Returns Y, or S at `s_refs` when given.
SweepResponse sweep_reduce(const Netlist& net, const FrequencyGrid& grid,
                           std::optional<RefPair> s_refs = std::nullopt);

}  // namespace xlat
