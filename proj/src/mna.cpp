#include "xlat/mna.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <limits>
#include <string>

#include "xlat/errors.hpp"

namespace xlat {

namespace {

int find_root(std::vector<int>& parent, int k) {
  while (parent[k] != k) k = parent[k] = parent[parent[k]];
  return k;
}

// Nodes joined by shorts collapse onto one representative; ground always
// represents its own group. A stiff branch is merged only when it reaches a
// node no port touches: eliminating such a node would cancel the stiff
// admittance against itself and lose its digits. Between port nodes the
// stiff value is stamped, since merging could put two ports on one node.
std::vector<int> merge_shorts(const Netlist& net, const std::vector<cplx>& y) {
  const int n = net.node_count();
  std::vector<char> at_port(n, 0);
  for (const auto& p : net.ports()) at_port[p.hot] = at_port[p.ref] = 1;
  std::vector<int> parent(n);
  for (int k = 0; k < n; ++k) parent[k] = k;
  const auto& branches = net.branches();
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& br = branches[i];
    if (br.is_open()) continue;
    const double mag = std::abs(y[i]);
    const bool merge = !(mag < kShortAdmittance) || (!(mag < kStiffAdmittance) && !(at_port[br.a] && at_port[br.b]));
    if (!merge) continue;
    int a = find_root(parent, branches[i].a), b = find_root(parent, branches[i].b);
    if (a == find_root(parent, net.ground())) std::swap(a, b);
    parent[a] = b;
  }
  std::vector<int> rep(n);
  for (int k = 0; k < n; ++k) rep[k] = find_root(parent, k);
  return rep;
}

// Every node must reach ground through branches with non-zero admittance or
// through port constraints.
void check_connectivity(const Netlist& net, const std::vector<cplx>& y, const std::vector<int>& rep,
                        double f_hz) {
  const int n = net.node_count();
  std::vector<int> parent(n);
  for (int k = 0; k < n; ++k) parent[k] = k;
  auto unite = [&](int a, int b) { parent[find_root(parent, rep[a])] = find_root(parent, rep[b]); };
  const auto& branches = net.branches();
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (!branches[i].is_open() && y[i] != cplx{}) unite(branches[i].a, branches[i].b);
  }
  for (const auto& p : net.ports()) unite(p.hot, p.ref);
  const int g = find_root(parent, net.ground());
  for (int k = 0; k < n; ++k) {
    if (find_root(parent, rep[k]) != g) throw FloatingNodeError(k, f_hz);
  }
}

// LU on a singular matrix still returns numbers; a backward-error check
// separates those from genuine solutions.
void check_solution(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& b,
                    double f_hz) {
  const double residual = (a * x - b).norm();
  if (!x.allFinite() || !(residual <= 1e-8 * (a.norm() * x.norm() + b.norm()))) {
    fail(ErrorCode::SingularConversion,
         "nodal matrix is singular at f = " + std::to_string(f_hz) + " Hz");
  }
}

// Stiff branches legitimately leave pivots far below Eigen's default rank
// threshold, so rank decisions are left to the residual check.
Eigen::MatrixXcd solve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  lu.setThreshold(std::numeric_limits<double>::min());
  return lu.solve(b);
}

}  // namespace

Netlist::Netlist(int node_count, int ground) : node_count_(node_count), ground_(ground) {
  if (node_count_ < 2) fail(ErrorCode::InvalidArgument, "netlist needs at least two nodes");
  check_node(ground_);
}

void Netlist::check_node(int n) const {
  if (n < 0 || n >= node_count_) {
    fail(ErrorCode::InvalidArgument, "node id " + std::to_string(n) + " out of range");
  }
}

void Netlist::add_branch(int a, int b, AdmittanceFn y, std::string label) {
  if (a != kOpenTerminal) check_node(a);
  if (b != kOpenTerminal) check_node(b);
  if (a == kOpenTerminal && b == kOpenTerminal) {
    fail(ErrorCode::InvalidArgument, "branch must touch at least one node");
  }
  if (a == b) fail(ErrorCode::InvalidArgument, "branch connects node " + std::to_string(a) + " to itself");
  if (!y) fail(ErrorCode::InvalidArgument, "branch needs an admittance evaluator");
  branches_.push_back({a, b, std::move(y), std::move(label)});
}

void Netlist::add_port(int hot, int ref) {
  check_node(hot);
  check_node(ref);
  if (hot == ref) fail(ErrorCode::InvalidArgument, "port hot and reference nodes coincide");
  ports_.push_back({hot, ref});
}

void Netlist::validate() const {
  const bool any = std::any_of(branches_.begin(), branches_.end(),
                               [](const Branch& b) { return !b.is_open(); });
  if (!any) fail(ErrorCode::InvalidArgument, "netlist has no connected branch");
  if (ports_.empty()) fail(ErrorCode::InvalidArgument, "netlist has no ports");
}

ReducedYMatrix reduce(const Netlist& net, double f_hz) {
  net.validate();
  const int n = net.node_count();
  const int g = net.ground();

  std::vector<cplx> ys(net.branches().size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!net.branches()[i].is_open()) ys[i] = net.branches()[i].y(f_hz);
  }
  const std::vector<int> rep = merge_shorts(net, ys);
  check_connectivity(net, ys, rep, f_hz);

  // Map representative node id -> row in the grounded nodal matrix.
  std::vector<int> row(n, -1);
  int dim = 0;
  for (int k = 0; k < n; ++k) {
    if (rep[k] == k && k != g) row[k] = dim++;
  }
  for (int k = 0; k < n; ++k) row[k] = row[rep[k]];

  Eigen::MatrixXcd yn = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto& br = net.branches()[i];
    if (br.is_open() || rep[br.a] == rep[br.b]) continue;
    const cplx y = ys[i];
    const int ra = row[br.a];
    const int rb = row[br.b];
    if (ra >= 0) yn(ra, ra) += y;
    if (rb >= 0) yn(rb, rb) += y;
    if (ra >= 0 && rb >= 0) {
      yn(ra, rb) -= y;
      yn(rb, ra) -= y;
    }
  }
  for (const auto& p : net.ports()) {
    if (rep[p.hot] == rep[p.ref]) {
      fail(ErrorCode::SingularConversion, "port is short-circuited at f = " + std::to_string(f_hz) + " Hz");
    }
  }
  // Split rows into terminals (touched by a port) and internal nodes.
  std::vector<char> is_terminal(dim, 0);
  for (const auto& p : net.ports()) {
    if (row[p.hot] >= 0) is_terminal[row[p.hot]] = 1;
    if (row[p.ref] >= 0) is_terminal[row[p.ref]] = 1;
  }
  std::vector<int> term, internal;
  for (int r = 0; r < dim; ++r) (is_terminal[r] ? term : internal).push_back(r);

  const int nt = static_cast<int>(term.size());
  const int ni = static_cast<int>(internal.size());
  Eigen::MatrixXcd yt(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) yt(i, j) = yn(term[i], term[j]);

  if (ni > 0) {
    Eigen::MatrixXcd yii(ni, ni), yti(nt, ni), yit(ni, nt);
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < ni; ++j) yii(i, j) = yn(internal[i], internal[j]);
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < ni; ++j) {
        yti(i, j) = yn(term[i], internal[j]);
        yit(j, i) = yn(internal[j], term[i]);
      }
    const Eigen::MatrixXcd x = solve(yii, yit);
    check_solution(yii, x, yit, f_hz);
    yt -= yti * x;
  }

  // Bordered solve: Yt v = P I (port currents only), P^T v = V.
  const int np = static_cast<int>(net.ports().size());
  std::vector<int> term_index(dim, -1);
  for (int i = 0; i < nt; ++i) term_index[term[i]] = i;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(nt, np);
  for (int k = 0; k < np; ++k) {
    const auto& port = net.ports()[k];
    if (row[port.hot] >= 0) p(term_index[row[port.hot]], k) += 1.0;
    if (row[port.ref] >= 0) p(term_index[row[port.ref]], k) -= 1.0;
  }
  Eigen::MatrixXcd k_mat = Eigen::MatrixXcd::Zero(nt + np, nt + np);
  k_mat.topLeftCorner(nt, nt) = yt;
  k_mat.topRightCorner(nt, np) = -p;
  k_mat.bottomLeftCorner(np, nt) = p.transpose();
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(nt + np, np);
  rhs.bottomRows(np) = Eigen::MatrixXcd::Identity(np, np);

  const Eigen::MatrixXcd sol = solve(k_mat, rhs);
  check_solution(k_mat, sol, rhs, f_hz);
  return {f_hz, sol.bottomRows(np)};
}

SweepResponse sweep_reduce(const Netlist& net, const FrequencyGrid& grid,
                           std::optional<RefPair> s_refs) {
  if (net.ports().size() != 2) fail(ErrorCode::InvalidArgument, "sweep_reduce needs a two-port netlist");
  std::vector<Matrix2c> y;
  y.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto red = reduce(net, grid[i]);
    y.push_back(red.y);
  }
  SweepResponse ry(grid, ParamKind::Y, std::move(y));
  if (!s_refs) return ry;
  return convert(ry, ParamKind::S, *s_refs);
}

}  // namespace xlat
