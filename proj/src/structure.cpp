#include "wsnet/structure.hpp"

#include <map>
#include <unordered_map>

namespace wsnet {

IndexList Partition::group_sizes() const {
  IndexList sizes(static_cast<std::size_t>(n_groups), 0);
  for (Index g : assignment) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

void Partition::validate() const {
  if (n_groups < 1) throw InvalidArgument("Partition: no groups");
  IndexList sizes(static_cast<std::size_t>(n_groups), 0);
  for (Index g : assignment) {
    if (g < 0 || g >= n_groups) {
      throw InvalidArgument("Partition: group id " + std::to_string(g) + " outside [0, " +
                            std::to_string(n_groups) + ")");
    }
    ++sizes[static_cast<std::size_t>(g)];
  }
  for (Index g = 0; g < n_groups; ++g) {
    if (sizes[static_cast<std::size_t>(g)] == 0) {
      throw InvalidArgument("Partition: group " + std::to_string(g) + " is empty");
    }
  }
}

Partition canonicalize(IndexList assignment, PartitionKind kind) {
  std::unordered_map<Index, Index> remap;
  for (Index& g : assignment) {
    auto [it, inserted] = remap.try_emplace(g, static_cast<Index>(remap.size()));
    g = it->second;
  }
  return Partition{std::move(assignment), static_cast<Index>(remap.size()), kind};
}

namespace {

// Weighted symmetric graph for one Louvain level. `loop[i]` is A_ii and
// strength[i] = sum_j A_ij including the loop, so sum(strength) = 2m.
struct LouvainLevel {
  std::vector<std::vector<std::pair<Index, double>>> adj;
  std::vector<double> loop;
  std::vector<double> strength;

  Index size() const { return static_cast<Index>(adj.size()); }
};

LouvainLevel level_from_graph(const Graph& g) {
  const Index n = g.n_nodes();
  LouvainLevel lv;
  lv.adj.resize(static_cast<std::size_t>(n));
  lv.loop.assign(static_cast<std::size_t>(n), 0.0);
  lv.strength.assign(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j : g.neighbors(i)) lv.adj[static_cast<std::size_t>(i)].emplace_back(j, 1.0);
    lv.strength[static_cast<std::size_t>(i)] = static_cast<double>(g.degree(i));
  }
  return lv;
}

// One round of local moves. Returns the community of every level node and
// whether anything moved.
bool local_moving(const LouvainLevel& lv, double two_m, std::mt19937_64& rng, IndexList& comm) {
  const Index n = lv.size();
  comm.resize(static_cast<std::size_t>(n));
  std::vector<double> tot(lv.strength);
  for (Index i = 0; i < n; ++i) comm[static_cast<std::size_t>(i)] = i;

  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> w_to(static_cast<std::size_t>(n), 0.0);
  IndexList touched;
  bool any_move = false;
  constexpr int kMaxPasses = 1000;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (Index i : order) {
      const auto ui = static_cast<std::size_t>(i);
      const Index ci = comm[ui];
      const double ki = lv.strength[ui];
      touched.clear();
      for (const auto& [j, w] : lv.adj[ui]) {
        const Index cj = comm[static_cast<std::size_t>(j)];
        if (w_to[static_cast<std::size_t>(cj)] == 0.0) touched.push_back(cj);
        w_to[static_cast<std::size_t>(cj)] += w;
      }
      tot[static_cast<std::size_t>(ci)] -= ki;
      Index best = ci;
      double best_gain = w_to[static_cast<std::size_t>(ci)] - tot[static_cast<std::size_t>(ci)] * ki / two_m;
      for (Index c : touched) {
        const double gain = w_to[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * ki / two_m;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best = c;
        }
      }
      tot[static_cast<std::size_t>(best)] += ki;
      comm[ui] = best;
      if (best != ci) moved = true;
      for (Index c : touched) w_to[static_cast<std::size_t>(c)] = 0.0;
    }
    if (!moved) break;
    any_move = true;
  }
  return any_move;
}

LouvainLevel aggregate(const LouvainLevel& lv, const Partition& part) {
  const Index g = part.n_groups;
  LouvainLevel out;
  out.adj.resize(static_cast<std::size_t>(g));
  out.loop.assign(static_cast<std::size_t>(g), 0.0);
  out.strength.assign(static_cast<std::size_t>(g), 0.0);
  std::vector<std::map<Index, double>> acc(static_cast<std::size_t>(g));
  for (Index i = 0; i < lv.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Index ci = part.assignment[ui];
    out.loop[static_cast<std::size_t>(ci)] += lv.loop[ui];
    out.strength[static_cast<std::size_t>(ci)] += lv.strength[ui];
    for (const auto& [j, w] : lv.adj[ui]) {
      const Index cj = part.assignment[static_cast<std::size_t>(j)];
      if (cj == ci) {
        out.loop[static_cast<std::size_t>(ci)] += w;
      } else {
        acc[static_cast<std::size_t>(ci)][cj] += w;
      }
    }
  }
  for (Index c = 0; c < g; ++c) {
    for (const auto& [d, w] : acc[static_cast<std::size_t>(c)]) out.adj[static_cast<std::size_t>(c)].emplace_back(d, w);
  }
  return out;
}

}  // namespace

Partition detect_communities(const Graph& g, std::uint64_t seed) {
  const Index n = g.n_nodes();
  IndexList node_comm(static_cast<std::size_t>(n));
  std::iota(node_comm.begin(), node_comm.end(), Index{0});
  const double two_m = 2.0 * static_cast<double>(g.edges().size());
  if (two_m == 0.0) return canonicalize(std::move(node_comm), PartitionKind::kCommunity);

  std::mt19937_64 rng(seed);
  LouvainLevel level = level_from_graph(g);
  while (true) {
    IndexList comm;
    const bool moved = local_moving(level, two_m, rng, comm);
    if (!moved) break;
    Partition part = canonicalize(std::move(comm), PartitionKind::kCommunity);
    for (Index& c : node_comm) c = part.assignment[static_cast<std::size_t>(c)];
    if (part.n_groups == level.size()) break;
    level = aggregate(level, part);
  }
  return canonicalize(std::move(node_comm), PartitionKind::kCommunity);
}

double modularity(const Graph& g, const Partition& part) {
  const double two_m = 2.0 * static_cast<double>(g.edges().size());
  if (two_m == 0.0) return 0.0;
  std::vector<double> internal(static_cast<std::size_t>(part.n_groups), 0.0);
  std::vector<double> tot(static_cast<std::size_t>(part.n_groups), 0.0);
  for (Index i = 0; i < g.n_nodes(); ++i) {
    tot[static_cast<std::size_t>(part.assignment[static_cast<std::size_t>(i)])] += static_cast<double>(g.degree(i));
  }
  for (const auto& [u, v] : g.edges()) {
    const Index cu = part.assignment[static_cast<std::size_t>(u)];
    if (cu == part.assignment[static_cast<std::size_t>(v)]) internal[static_cast<std::size_t>(cu)] += 2.0;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    q += internal[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
  }
  return q;
}

double adjusted_rand_index(const IndexList& a, const IndexList& b) {
  if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: labelings differ in length");
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<Index, Index>, double> joint;
  std::map<Index, double> row, col;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    row[a[i]] += 1.0;
    col[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_joint = 0.0, sum_row = 0.0, sum_col = 0.0;
  for (const auto& [key, c] : joint) sum_joint += choose2(c);
  for (const auto& [key, c] : row) sum_row += choose2(c);
  for (const auto& [key, c] : col) sum_col += choose2(c);
  const double expected = sum_row * sum_col / choose2(n);
  const double max_index = 0.5 * (sum_row + sum_col);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

void write_partition_csv(std::ostream& os, const Partition& part,
                         const std::vector<std::string>& node_ids) {
  os << "node_id,group_id\n";
  for (std::size_t i = 0; i < part.assignment.size(); ++i) {
    if (node_ids.empty()) {
      os << i;
    } else {
      os << node_ids[i];
    }
    os << ',' << part.assignment[i] << '\n';
  }
}

}  // namespace wsnet
