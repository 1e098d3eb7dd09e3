#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "wsnet/common.hpp"
#include "wsnet/graph.hpp"

namespace wsnet {

enum class PartitionKind { kCommunity, kCluster };

/// Node -> group assignment with contiguous, non-empty group ids.
struct Partition {
  IndexList assignment;
  Index n_groups = 0;
  PartitionKind kind = PartitionKind::kCluster;

  Index n_nodes() const { return static_cast<Index>(assignment.size()); }
  /// Member count per group.
  IndexList group_sizes() const;
  /// Throws unless every id is in range and every group is non-empty.
  void validate() const;
};

/// Renumbers ids by first appearance so equal partitions compare equal.
Partition canonicalize(IndexList assignment, PartitionKind kind);

/// Greedy multi-level modularity maximisation (Louvain). Nodes are visited
/// in a seeded random order; isolated nodes stay singletons and no two
/// connected components ever share a community.
Partition detect_communities(const Graph& g, std::uint64_t seed);

/// Newman-Girvan modularity of `part` on `g`.
double modularity(const Graph& g, const Partition& part);

/// Hubert-Arabie adjusted Rand index between two labelings of the same nodes.
double adjusted_rand_index(const IndexList& a, const IndexList& b);

/// CSV `node_id,group_id`; uses external ids when the graph carries them.
void write_partition_csv(std::ostream& os, const Partition& part,
                         const std::vector<std::string>& node_ids = {});

/// Per-group arithmetic mean of embedding rows.
template <typename Derived>
MatrixX<typename Derived::Scalar> pool_centroids(const Eigen::MatrixBase<Derived>& embeddings,
                                                 const Partition& part) {
  using Scalar = typename Derived::Scalar;
  if (part.n_nodes() != embeddings.rows()) {
    throw InvalidArgument("pool_centroids: partition covers " + std::to_string(part.n_nodes()) +
                          " nodes, embeddings have " + std::to_string(embeddings.rows()) + " rows");
  }
  MatrixX<Scalar> sums = MatrixX<Scalar>::Zero(part.n_groups, embeddings.cols());
  VectorX<Scalar> counts = VectorX<Scalar>::Zero(part.n_groups);
  for (Index i = 0; i < embeddings.rows(); ++i) {
    const Index g = part.assignment[static_cast<std::size_t>(i)];
    sums.row(g) += embeddings.row(i);
    counts[g] += Scalar(1);
  }
  for (Index g = 0; g < part.n_groups; ++g) {
    if (counts[g] > Scalar(0)) sums.row(g) /= counts[g];
  }
  return sums;
}

template <typename Scalar>
struct KMeansResult {
  Partition partition;
  MatrixX<Scalar> centroids;
  /// Within-cluster SSE after each assignment step; non-increasing.
  std::vector<Scalar> sse_history;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Stops after `max_iter`
/// iterations or when no centroid moves more than `tol`. A cluster that
/// empties is re-seeded with the point farthest from its own centroid.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& points, Index k,
                                              std::uint64_t seed, int max_iter = 100,
                                              double tol = 1e-6) {
  using Scalar = typename Derived::Scalar;
  const Index n = points.rows();
  if (k <= 0) throw InvalidArgument("kmeans: k must be positive");
  if (k > n) {
    throw InvalidArgument("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));
  }
  if (points.cols() < 1) throw InvalidArgument("kmeans: points need at least one dimension");

  const MatrixX<Scalar> x = points;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // k-means++ seeding.
  MatrixX<Scalar> centroids(k, x.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  {
    std::uniform_int_distribution<Index> first(0, n - 1);
    const Index c0 = first(rng);
    centroids.row(0) = x.row(c0);
    chosen[static_cast<std::size_t>(c0)] = true;
  }
  VectorX<Scalar> d2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const Scalar total = d2.sum();
    Index pick = -1;
    if (total > Scalar(0)) {
      const double target = unit(rng) * static_cast<double>(total);
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += static_cast<double>(d2[i]);
        if (acc >= target && d2[i] > Scalar(0)) {
          pick = i;
          break;
        }
      }
      if (pick < 0) d2.maxCoeff(&pick);
    } else {
      // All remaining mass is zero: fall back to an unused point.
      IndexList unused;
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> any(0, unused.size() - 1);
      pick = unused[any(rng)];
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KMeansResult<Scalar> result;
  IndexList assign(static_cast<std::size_t>(n), 0);
  VectorX<Scalar> dist(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter + 1;
    IndexList sizes(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      Scalar best_d = std::numeric_limits<Scalar>::infinity();
      for (Index c = 0; c < k; ++c) {
        const Scalar d = (x.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[static_cast<std::size_t>(i)] = best;
      dist[i] = best_d;
      ++sizes[static_cast<std::size_t>(best)];
    }
    for (Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || dist[i] > dist[far]) far = i;
      }
      --sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
      assign[static_cast<std::size_t>(far)] = c;
      ++sizes[static_cast<std::size_t>(c)];
      centroids.row(c) = x.row(far);
      dist[far] = Scalar(0);
    }
    result.sse_history.push_back(dist.sum());

    MatrixX<Scalar> updated = MatrixX<Scalar>::Zero(k, x.cols());
    for (Index i = 0; i < n; ++i) updated.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
    for (Index c = 0; c < k; ++c) updated.row(c) /= static_cast<Scalar>(sizes[static_cast<std::size_t>(c)]);
    const Scalar shift = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(updated);
    if (shift < static_cast<Scalar>(tol)) break;
  }
  result.partition.assignment = std::move(assign);
  result.partition.n_groups = k;
  result.partition.kind = PartitionKind::kCluster;
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace wsnet
