#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wsnet/common.hpp"
#include "wsnet/graph.hpp"

namespace wsnet {

inline constexpr int kAbstain = -1;

using VoteMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelVector = Eigen::VectorXi;

/// N x m labeling-function votes, entries in {-1, 0, ..., C-1}.
class WeakLabelMatrix {
 public:
  WeakLabelMatrix(VoteMatrix votes, int n_classes);

  const VoteMatrix& votes() const { return votes_; }
  int vote(Index node, Index lf) const { return votes_(node, lf); }
  Index n_nodes() const { return votes_.rows(); }
  Index n_lfs() const { return votes_.cols(); }
  int n_classes() const { return n_classes_; }

  /// Number of non-abstain votes on `node`.
  Index coverage(Index node) const;
  /// Per-class vote counts for `node`, length C.
  Eigen::VectorXi class_counts(Index node) const;

  /// Copy in which every row outside `visible` is all-abstain.
  WeakLabelMatrix restricted_to(std::span<const Index> visible) const;

 private:
  VoteMatrix votes_;
  int n_classes_;
};

struct AggregatedLabels {
  LabelVector labels;            // -1 when every LF abstained
  std::vector<bool> tie_broken;  // true when the mode was not unique
};

/// Modal non-abstain vote per node; ties go to the lowest class index.
AggregatedLabels majority_vote(const WeakLabelMatrix& wlm);

/// Natural-log Shannon entropy of the non-abstain vote distribution.
/// All-abstain nodes report ln C.
double vote_entropy(const WeakLabelMatrix& wlm, Index node);

/// Cosine similarity of the one-hot encoded vote rows of i and j.
///
/// Each vote expands to a length-C one-hot block (abstain is the zero block),
/// so the dot product counts LFs on which both nodes cast the same vote and
/// the squared norm is the node's coverage. Zero vectors give 0.
double weak_label_similarity(const WeakLabelMatrix& wlm, Index i, Index j);

/// Similarity of `node` to every node (including itself).
Vector similarity_row(const WeakLabelMatrix& wlm, Index node);

/// argmax_{j != i} similarity(i, j), lowest index on ties. An all-abstain
/// anchor gets a uniformly random partner drawn from `seed`.
Index top_positive_pair(const WeakLabelMatrix& wlm, Index node, std::uint64_t seed = 0);

struct LfSynthConfig {
  Index n_lfs = 10;
  double accuracy = 0.7;
  double coverage = 0.7;
  std::uint64_t seed = 0;
};

/// Independent synthetic LFs: abstain with probability 1 - coverage, else vote
/// the true label with probability `accuracy`, else a uniform wrong class.
WeakLabelMatrix generate_synthetic_lfs(std::span<const int> y_true, int n_classes,
                                       const LfSynthConfig& cfg);

struct AgreementReport {
  double mean_entropy_correct = 0.0;
  double mean_entropy_incorrect = 0.0;
  Index n_correct = 0;
  Index n_incorrect = 0;
  bool incorrect_empty = false;
  bool correct_empty = false;
};

/// Mean vote entropy for nodes whose majority vote is right vs. wrong.
/// Nodes with no votes or unknown truth are skipped.
AgreementReport agreement_report(const WeakLabelMatrix& wlm, const AggregatedLabels& agg,
                                 std::span<const int> y_true);

struct PairClassReport {
  double top_pair_same_class = 0.0;
  double random_nonadjacent_same_class = 0.0;
  Index n_anchors = 0;
};

/// Same-true-class rate of top-similarity partners vs. random non-neighbours,
/// over anchors with at least one vote and a known label.
PairClassReport positive_pair_report(const WeakLabelMatrix& wlm, const Graph& g,
                                     std::span<const int> y_true, std::uint64_t seed);

}  // namespace wsnet
