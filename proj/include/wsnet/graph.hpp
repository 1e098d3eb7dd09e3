#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wsnet/common.hpp"

namespace wsnet {

using Edge = std::pair<Index, Index>;

/// Undirected, unweighted, node-attributed graph. Immutable once built.
///
/// Edges are stored once with u < v, sorted, without self-loops. A CSR
/// neighbour index is kept alongside for O(deg) neighbourhood queries.
template <typename Scalar>
class BasicGraph {
 public:
  BasicGraph(Index n_nodes, std::vector<Edge> edges, MatrixX<Scalar> features,
             std::vector<std::string> node_ids = {})
      : n_nodes_(n_nodes),
        edges_(std::move(edges)),
        features_(std::move(features)),
        node_ids_(std::move(node_ids)) {
    offsets_.assign(static_cast<std::size_t>(n_nodes_) + 1, 0);
    for (const auto& [u, v] : edges_) {
      ++offsets_[u + 1];
      ++offsets_[v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    neighbors_.resize(2 * edges_.size());
    std::vector<Index> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [u, v] : edges_) {
      neighbors_[cursor[u]++] = v;
      neighbors_[cursor[v]++] = u;
    }
    for (Index i = 0; i < n_nodes_; ++i) {
      std::sort(neighbors_.begin() + offsets_[i], neighbors_.begin() + offsets_[i + 1]);
    }
  }

  Index n_nodes() const { return n_nodes_; }
  Index n_features() const { return features_.cols(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const MatrixX<Scalar>& features() const { return features_; }
  const std::vector<std::string>& node_ids() const { return node_ids_; }

  std::span<const Index> neighbors(Index i) const {
    return {neighbors_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  Index degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }
  bool adjacent(Index u, Index v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

 private:
  Index n_nodes_;
  std::vector<Edge> edges_;
  MatrixX<Scalar> features_;
  std::vector<std::string> node_ids_;
  std::vector<Index> offsets_;
  std::vector<Index> neighbors_;
};

using Graph = BasicGraph<double>;

/// Â = D̃^{-1/2}(A + I)D̃^{-1/2}, shared read-only between encoder passes.
template <typename Scalar>
struct NormalizedAdjacency {
  std::shared_ptr<const SparseMatrixX<Scalar>> matrix;
  bool self_loops_added = true;

  const SparseMatrixX<Scalar>& operator*() const { return *matrix; }
};

/// Symmetrizes, deduplicates and drops self-loops from `edge_list`.
template <typename Scalar>
BasicGraph<Scalar> build_graph(std::span<const Edge> edge_list, MatrixX<Scalar> features,
                               std::vector<std::string> node_ids = {}) {
  const Index n = features.rows();
  if (n == 0) throw InvalidArgument("build_graph: graph must have at least one node");
  if (!node_ids.empty() && static_cast<Index>(node_ids.size()) != n) {
    throw InvalidArgument("build_graph: node_ids size does not match feature rows");
  }
  std::vector<Edge> edges;
  edges.reserve(edge_list.size());
  for (auto [u, v] : edge_list) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw InvalidArgument("build_graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") has endpoint outside [0, " + std::to_string(n) + ")");
    }
    if (u == v) continue;
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return BasicGraph<Scalar>(n, std::move(edges), std::move(features), std::move(node_ids));
}

/// Row-wise overload; rejects ragged rows.
template <typename Scalar>
BasicGraph<Scalar> build_graph(std::span<const Edge> edge_list,
                               const std::vector<std::vector<Scalar>>& rows) {
  if (rows.empty()) throw InvalidArgument("build_graph: graph must have at least one node");
  const auto d = rows.front().size();
  MatrixX<Scalar> x(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw InvalidArgument("build_graph: feature row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " columns, expected " +
                            std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return build_graph<Scalar>(edge_list, std::move(x));
}

template <typename Scalar>
NormalizedAdjacency<Scalar> normalize_adjacency(const BasicGraph<Scalar>& g) {
  const Index n = g.n_nodes();
  VectorX<Scalar> inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    inv_sqrt[i] = Scalar(1) / std::sqrt(static_cast<Scalar>(g.degree(i) + 1));
  }
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) + 2 * g.edges().size());
  for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
  for (const auto& [u, v] : g.edges()) {
    // Same product on both sides keeps the matrix bit-symmetric.
    const Scalar w = inv_sqrt[u] * inv_sqrt[v];
    triplets.emplace_back(u, v, w);
    triplets.emplace_back(v, u, w);
  }
  auto m = std::make_shared<SparseMatrixX<Scalar>>(n, n);
  m->setFromTriplets(triplets.begin(), triplets.end());
  m->makeCompressed();
  return {std::move(m), true};
}

/// Uniform random permutation of 0..n-1 drawn from `seed`.
inline IndexList random_permutation(Index n, std::uint64_t seed) {
  IndexList perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

/// Rows of X under a seeded permutation: out.row(i) = X.row(perm[i]).
template <typename Scalar>
MatrixX<Scalar> corrupt_features(const BasicGraph<Scalar>& g, std::uint64_t seed) {
  const Index n = g.n_nodes();
  if (n < 2) throw InvalidArgument("corrupt_features: need at least two nodes to shuffle");
  const IndexList perm = random_permutation(n, seed);
  return g.features()(perm, Eigen::all);
}

}  // namespace wsnet
