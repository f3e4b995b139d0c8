#include "cqe/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

#include "cqe/constants.hpp"
#include "cqe/error.hpp"

namespace cqe {

namespace {

std::string edge_name(const NodePair& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

void stamp(Eigen::MatrixXd& m, const NodePair& p, double v) {
  const int i = p.first;
  const int j = p.second;
  if (i > 0) m(i - 1, i - 1) += v;
  if (j > 0) m(j - 1, j - 1) += v;
  if (i > 0 && j > 0) {
    m(i - 1, j - 1) -= v;
    m(j - 1, i - 1) -= v;
  }
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

std::vector<int> loop_members(std::span<const InductiveBranch> branches, int loop) {
  std::vector<int> out;
  for (const auto& br : branches)
    if (std::find(br.loops.begin(), br.loops.end(), loop) != br.loops.end()) out.push_back(br.index);
  return out;
}

std::optional<std::string> cycle_problem(std::span<const InductiveBranch> branches, const std::vector<int>& members,
                                         const std::string& id) {
  if (members.size() < 2)
    return "loop '" + id + "' is not closed by inductive branches (it needs at least two members)";
  std::map<int, int> degree;
  for (int k : members) {
    ++degree[branches[k].nodes.first];
    ++degree[branches[k].nodes.second];
  }
  for (const auto& [node, d] : degree)
    if (d != 2)
      return "loop '" + id + "' is not closed by inductive branches (node " + std::to_string(node) + " has " +
             std::to_string(d) + " member branches, expected 2)";
  DisjointSets sets(static_cast<int>(degree.rbegin()->first) + 1);
  for (int k : members) sets.unite(branches[k].nodes.first, branches[k].nodes.second);
  int root = sets.find(degree.begin()->first);
  for (const auto& [node, d] : degree)
    if (sets.find(node) != root) return "loop '" + id + "' consists of more than one closed cycle";
  return std::nullopt;
}

// Walks the cycle formed by `members`, starting with `start` traversed forward.
Eigen::RowVectorXd orient_cycle(std::span<const InductiveBranch> branches, const std::vector<int>& members, int start) {
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(branches.size()));
  std::vector<bool> used(members.size(), false);
  auto pos = std::find(members.begin(), members.end(), start) - members.begin();
  used[static_cast<std::size_t>(pos)] = true;
  g(start) = 1.0;
  const int origin = branches[start].tail();
  int node = branches[start].head();
  while (node != origin) {
    bool advanced = false;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (used[m]) continue;
      const auto& br = branches[members[m]];
      if (br.tail() == node) {
        g(br.index) = 1.0;
        node = br.head();
      } else if (br.head() == node) {
        g(br.index) = -1.0;
        node = br.tail();
      } else {
        continue;
      }
      used[m] = true;
      advanced = true;
      break;
    }
    if (!advanced) throw InputError("internal error: loop traversal did not close");
  }
  return g;
}

int matrix_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

// Fundamental cycle of closure branch `c`: the closure forward, then back
// through the tree from its head to its tail.
Eigen::RowVectorXd fundamental_cycle(std::span<const InductiveBranch> branches, const std::vector<int>& tree, int c,
                                     int num_nodes) {
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(num_nodes) + 1);
  for (int k : tree) {
    adjacency[branches[k].nodes.first].push_back(k);
    adjacency[branches[k].nodes.second].push_back(k);
  }
  const int from = branches[c].head();
  const int to = branches[c].tail();
  std::vector<int> via(static_cast<std::size_t>(num_nodes) + 1, -2);
  via[from] = -1;
  std::queue<int> queue;
  queue.push(from);
  while (!queue.empty()) {
    int n = queue.front();
    queue.pop();
    for (int k : adjacency[n]) {
      int other = branches[k].nodes.first == n ? branches[k].nodes.second : branches[k].nodes.first;
      if (via[other] != -2) continue;
      via[other] = k;
      queue.push(other);
    }
  }
  if (via[to] == -2) throw InputError("internal error: closure branch endpoints are not joined by the tree");
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(branches.size()));
  g(c) = 1.0;
  // Path recovered backwards from `to`; traversal direction is from -> to.
  int node = to;
  while (node != from) {
    const auto& br = branches[via[node]];
    int prev = br.nodes.first == node ? br.nodes.second : br.nodes.first;
    g(br.index) = (br.tail() == prev && br.head() == node) ? 1.0 : -1.0;
    node = prev;
  }
  return g;
}

}  // namespace

double CircuitMatrices::branch_flux_phase(int k, std::span<const double> loop_phases) const {
  double s = 0.0;
  for (int l = 0; l < num_loops; ++l) s += B(k, l) * loop_phases[static_cast<std::size_t>(l)];
  return s;
}

std::vector<CapacitorInstance> collect_capacitors(const CircuitSpec& spec) {
  std::vector<CapacitorInstance> out;
  for (const auto& edge : spec.edges) {
    for (const auto& el : edge.elements) {
      const CapacitorDef* cap = nullptr;
      if (auto* c = std::get_if<CapacitorDef>(&el)) cap = c;
      if (auto* l = std::get_if<InductorDef>(&el); l && l->parallel_cap) cap = &*l->parallel_cap;
      if (auto* j = std::get_if<JunctionDef>(&el); j && j->parallel_cap) cap = &*j->parallel_cap;
      if (cap) out.push_back({edge.nodes, to_si(cap->value, ElementKind::Capacitor), cap->quality});
    }
  }
  return out;
}

Eigen::MatrixXd build_cap_matrix(const CircuitSpec& spec) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(spec.num_nodes, spec.num_nodes);
  for (const auto& inst : collect_capacitors(spec)) stamp(c, inst.nodes, inst.capacitance);
  return c;
}

Eigen::MatrixXd build_susceptance_matrix(const CircuitSpec& spec) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(spec.num_nodes, spec.num_nodes);
  for (const auto& edge : spec.edges)
    for (const auto& el : edge.elements)
      if (auto* ind = std::get_if<InductorDef>(&el)) stamp(l, edge.nodes, 1.0 / to_si(ind->value, ElementKind::Inductor));
  return l;
}

std::vector<InductiveBranch> collect_branches(const CircuitSpec& spec) {
  std::vector<InductiveBranch> out;
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const auto& edge = spec.edges[e];
    for (std::size_t m = 0; m < edge.elements.size(); ++m) {
      const auto& el = edge.elements[m];
      if (std::holds_alternative<CapacitorDef>(el)) continue;
      InductiveBranch br;
      br.index = static_cast<int>(out.size());
      br.nodes = edge.nodes;
      br.edge = static_cast<int>(e);
      br.element = static_cast<int>(m);
      const std::vector<std::string>* loops = nullptr;
      if (auto* ind = std::get_if<InductorDef>(&el)) {
        br.kind = BranchKind::Inductor;
        br.value = to_si(ind->value, ElementKind::Inductor);
        br.quality = ind->quality;
        loops = &ind->loops;
      } else {
        const auto& jj = std::get<JunctionDef>(el);
        br.kind = BranchKind::Junction;
        br.value = to_si(jj.value, ElementKind::Junction);
        br.noise_amp = jj.noise_amp;
        br.gap_joule = jj.gap_ev * constants::electron_volt;
        br.qp_density = jj.qp_density;
        loops = &jj.loops;
      }
      for (const auto& id : *loops) {
        int idx = spec.loop_index(id);
        if (idx < 0) throw InputError("reference to undeclared loop '" + id + "'");
        br.loops.push_back(idx);
      }
      br.w = Eigen::VectorXd::Zero(spec.num_nodes);
      br.w(br.tail() - 1) = 1.0;
      if (br.head() > 0) br.w(br.head() - 1) = -1.0;
      out.push_back(std::move(br));
    }
  }
  return out;
}

SpanningTree build_spanning_tree(const CircuitSpec& spec, std::span<const InductiveBranch> branches, TreeChoice choice) {
  const int nb = static_cast<int>(branches.size());
  const int nl = static_cast<int>(spec.loops.size());
  SpanningTree out;

  std::vector<int> order(static_cast<std::size_t>(nb));
  std::iota(order.begin(), order.end(), 0);
  if (choice == TreeChoice::Reversed) std::reverse(order.begin(), order.end());
  DisjointSets sets(spec.num_nodes + 1);
  std::vector<bool> in_tree(static_cast<std::size_t>(nb), false);
  for (int k : order)
    if (sets.unite(branches[k].nodes.first, branches[k].nodes.second)) in_tree[k] = true;
  for (int k = 0; k < nb; ++k) (in_tree[k] ? out.tree : out.closures).push_back(k);

  out.G = Eigen::MatrixXd::Zero(nl, nb);
  for (int l = 0; l < nl; ++l) {
    auto members = loop_members(branches, l);
    if (auto problem = cycle_problem(branches, members, spec.loops[l].id)) throw InputError(*problem);
    out.G.row(l) = orient_cycle(branches, members, *std::max_element(members.begin(), members.end()));
  }
  if (matrix_rank(out.G) < nl) throw InputError("declared loops are not independent inductive cycles");
  const int cycle_rank = static_cast<int>(out.closures.size());
  if (nl > cycle_rank)
    throw InputError("circuit declares " + std::to_string(nl) + " loops but its inductive graph has only " +
                     std::to_string(cycle_rank) + " independent cycles");

  out.G_full = out.G;
  for (int c : out.closures) {
    if (out.G_full.rows() == cycle_rank) break;
    Eigen::RowVectorXd f = fundamental_cycle(branches, out.tree, c, spec.num_nodes);
    Eigen::MatrixXd trial(out.G_full.rows() + 1, nb);
    trial << out.G_full, f;
    if (matrix_rank(trial) == trial.rows()) out.G_full = std::move(trial);
  }
  return out;
}

Eigen::MatrixXd assign_fluxes_static(const SpanningTree& tree, int num_branches, int num_loops) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(num_branches, num_loops);
  const auto r = static_cast<Eigen::Index>(tree.closures.size());
  if (num_loops == 0 || r == 0) return b;
  Eigen::MatrixXd y(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) y(i, j) = tree.G_full(i, tree.closures[static_cast<std::size_t>(j)]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(y);
  if (!lu.isInvertible()) throw NumericalError("loop incidence restricted to closure branches is singular");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(r, num_loops);
  rhs.topRows(num_loops).setIdentity();
  Eigen::MatrixXd x = lu.solve(rhs);
  for (Eigen::Index j = 0; j < r; ++j)
    for (int l = 0; l < num_loops; ++l) {
      double v = x(j, l);
      double rounded = std::round(v);
      b(tree.closures[static_cast<std::size_t>(j)], l) = std::abs(v - rounded) < 1e-12 ? rounded : v;
    }
  return b;
}

Eigen::VectorXd branch_capacitances(const CircuitSpec& spec, std::span<const InductiveBranch> branches) {
  constexpr double placeholder = 1e-20;
  Eigen::VectorXd c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(branches.size()), placeholder);
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const auto& edge = spec.edges[e];
    double free_caps = 0.0;
    for (const auto& el : edge.elements)
      if (auto* cap = std::get_if<CapacitorDef>(&el)) free_caps += to_si(cap->value, ElementKind::Capacitor);
    bool absorbed = false;
    for (const auto& br : branches) {
      if (br.edge != static_cast<int>(e)) continue;
      const auto& el = edge.elements[static_cast<std::size_t>(br.element)];
      const std::optional<CapacitorDef>* own = nullptr;
      if (auto* ind = std::get_if<InductorDef>(&el)) own = &ind->parallel_cap;
      if (auto* jj = std::get_if<JunctionDef>(&el)) own = &jj->parallel_cap;
      if (own && *own) {
        c(br.index) = to_si((*own)->value, ElementKind::Capacitor);
      } else if (!absorbed && free_caps > 0.0) {
        c(br.index) = free_caps;
        absorbed = true;
      }
    }
  }
  return c;
}

Eigen::MatrixXd assign_fluxes_timedep(const Eigen::MatrixXd& W, const Eigen::MatrixXd& G_full,
                                      const Eigen::VectorXd& C_ed, int num_loops) {
  const Eigen::Index nb = W.rows();
  const Eigen::Index nn = W.cols();
  const Eigen::Index r = G_full.rows();
  if (num_loops == 0) return Eigen::MatrixXd::Zero(nb, 0);
  // Rows of Wᵀ C_ed are rescaled to order one; the solution is unchanged.
  const double cscale = C_ed.cwiseAbs().maxCoeff();
  Eigen::MatrixXd a(nn + r, nb);
  a.topRows(nn) = W.transpose() * (C_ed / cscale).asDiagonal();
  a.bottomRows(r) = G_full;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nn + r, num_loops);
  rhs.block(nn, 0, num_loops, num_loops).setIdentity();
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-13);
  if (qr.rank() < nb)
    throw NumericalError("time-dependent flux distribution is rank deficient (rank " + std::to_string(qr.rank()) +
                         " of " + std::to_string(nb) + " branches); give every inductive branch a capacitance");
  Eigen::MatrixXd b = qr.solve(rhs);
  const double res_cap = (a.topRows(nn) * b).cwiseAbs().maxCoeff();
  const double res_loop = (G_full.topRows(num_loops) * b - Eigen::MatrixXd::Identity(num_loops, num_loops)).cwiseAbs().maxCoeff();
  const double cap_norm = a.topRows(nn).cwiseAbs().maxCoeff();
  if (res_cap > 1e-9 * cap_norm || res_loop > 1e-9)
    throw NumericalError("time-dependent flux distribution residual too large (" + std::to_string(res_cap) + ", " +
                         std::to_string(res_loop) + ")");
  return b;
}

CircuitMatrices build_circuit_matrices(const CircuitSpec& spec, TreeChoice choice) {
  require_valid(spec);
  CircuitMatrices m;
  m.num_nodes = spec.num_nodes;
  m.num_loops = static_cast<int>(spec.loops.size());
  m.flux_dist = spec.flux_dist;
  m.C = build_cap_matrix(spec);
  m.Lstar = build_susceptance_matrix(spec);
  m.capacitors = collect_capacitors(spec);
  m.branches = collect_branches(spec);
  const auto nb = static_cast<Eigen::Index>(m.branches.size());
  m.W.resize(nb, spec.num_nodes);
  for (const auto& br : m.branches) m.W.row(br.index) = br.w.transpose();
  m.tree = build_spanning_tree(spec, m.branches, choice);
  m.G = m.tree.G;
  m.C_ed = branch_capacitances(spec, m.branches);
  if (spec.flux_dist == FluxDistribution::All)
    m.B = assign_fluxes_timedep(m.W, m.tree.G_full, m.C_ed, m.num_loops);
  else
    m.B = assign_fluxes_static(m.tree, static_cast<int>(nb), m.num_loops);
  for (auto& br : m.branches) br.b = m.B.row(br.index).transpose();
  return m;
}

std::optional<std::string> loop_closure_problem(const CircuitSpec& spec, const std::string& loop_id) {
  int l = spec.loop_index(loop_id);
  if (l < 0) return "loop '" + loop_id + "' is not declared";
  auto branches = collect_branches(spec);
  return cycle_problem(branches, loop_members(branches, l), loop_id);
}

std::vector<std::string> undeclared_cycle_warnings(const CircuitSpec& spec) {
  std::vector<std::string> out;
  auto branches = collect_branches(spec);
  SpanningTree tree = build_spanning_tree(spec, branches);
  for (Eigen::Index row = tree.G.rows(); row < tree.G_full.rows(); ++row) {
    std::string list;
    for (Eigen::Index k = 0; k < tree.G_full.cols(); ++k)
      if (tree.G_full(row, k) != 0.0) list += (list.empty() ? "" : " ") + edge_name(branches[static_cast<std::size_t>(k)].nodes);
    out.push_back("inductive cycle through " + list + " is not declared as a loop; it carries zero external flux");
  }
  return out;
}

}  // namespace cqe
