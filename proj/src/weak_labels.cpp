#include "wsnet/weak_labels.hpp"

#include <cmath>
#include <random>
#include <string>

namespace wsnet {

WeakLabelMatrix::WeakLabelMatrix(VoteMatrix votes, int n_classes)
    : votes_(std::move(votes)), n_classes_(n_classes) {
  if (n_classes_ < 2) throw InvalidArgument("WeakLabelMatrix: need at least 2 classes");
  if (votes_.cols() < 1) throw InvalidArgument("WeakLabelMatrix: need at least one labeling function");
  for (Index i = 0; i < votes_.rows(); ++i) {
    for (Index j = 0; j < votes_.cols(); ++j) {
      const int v = votes_(i, j);
      if (v < kAbstain || v >= n_classes_) {
        throw InvalidArgument("WeakLabelMatrix: vote " + std::to_string(v) + " at (" +
                              std::to_string(i) + ", " + std::to_string(j) +
                              ") outside [-1, " + std::to_string(n_classes_) + ")");
      }
    }
  }
}

Index WeakLabelMatrix::coverage(Index node) const {
  return (votes_.row(node).array() != kAbstain).count();
}

Eigen::VectorXi WeakLabelMatrix::class_counts(Index node) const {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(n_classes_);
  for (Index j = 0; j < votes_.cols(); ++j) {
    const int v = votes_(node, j);
    if (v != kAbstain) ++counts[v];
  }
  return counts;
}

WeakLabelMatrix WeakLabelMatrix::restricted_to(std::span<const Index> visible) const {
  VoteMatrix masked = VoteMatrix::Constant(votes_.rows(), votes_.cols(), kAbstain);
  for (Index i : visible) masked.row(i) = votes_.row(i);
  return WeakLabelMatrix(std::move(masked), n_classes_);
}

AggregatedLabels majority_vote(const WeakLabelMatrix& wlm) {
  AggregatedLabels out;
  out.labels = LabelVector::Constant(wlm.n_nodes(), kAbstain);
  out.tie_broken.assign(static_cast<std::size_t>(wlm.n_nodes()), false);
  for (Index i = 0; i < wlm.n_nodes(); ++i) {
    const Eigen::VectorXi counts = wlm.class_counts(i);
    Index best = 0;
    const int top = counts.maxCoeff(&best);
    if (top == 0) continue;
    out.labels[i] = static_cast<int>(best);
    out.tie_broken[static_cast<std::size_t>(i)] = (counts.array() == top).count() > 1;
  }
  return out;
}

double vote_entropy(const WeakLabelMatrix& wlm, Index node) {
  const Eigen::VectorXi counts = wlm.class_counts(node);
  const int total = counts.sum();
  if (total == 0) return std::log(static_cast<double>(wlm.n_classes()));
  double h = 0.0;
  for (int c = 0; c < wlm.n_classes(); ++c) {
    if (counts[c] == 0) continue;
    const double p = static_cast<double>(counts[c]) / total;
    h -= p * std::log(p);
  }
  return h;
}

double weak_label_similarity(const WeakLabelMatrix& wlm, Index i, Index j) {
  Index agree = 0;
  for (Index k = 0; k < wlm.n_lfs(); ++k) {
    const int a = wlm.vote(i, k);
    if (a != kAbstain && a == wlm.vote(j, k)) ++agree;
  }
  const Index ci = wlm.coverage(i);
  const Index cj = wlm.coverage(j);
  if (ci == 0 || cj == 0) return 0.0;
  return static_cast<double>(agree) / std::sqrt(static_cast<double>(ci) * static_cast<double>(cj));
}

Vector similarity_row(const WeakLabelMatrix& wlm, Index node) {
  const Index n = wlm.n_nodes();
  Vector out = Vector::Zero(n);
  const Index ci = wlm.coverage(node);
  if (ci == 0) return out;
  const auto& votes = wlm.votes();
  const auto anchor = votes.row(node);
  for (Index j = 0; j < n; ++j) {
    Index agree = 0;
    Index cj = 0;
    for (Index k = 0; k < votes.cols(); ++k) {
      const int v = votes(j, k);
      if (v == kAbstain) continue;
      ++cj;
      if (v == anchor[k]) ++agree;
    }
    if (cj > 0) out[j] = static_cast<double>(agree) / std::sqrt(static_cast<double>(ci * cj));
  }
  return out;
}

Index top_positive_pair(const WeakLabelMatrix& wlm, Index node, std::uint64_t seed) {
  const Index n = wlm.n_nodes();
  if (n < 2) throw InvalidArgument("top_positive_pair: need at least two nodes");
  if (wlm.coverage(node) == 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 2);
    const Index j = pick(rng);
    return j >= node ? j + 1 : j;
  }
  const Vector sim = similarity_row(wlm, node);
  Index best = node == 0 ? 1 : 0;
  for (Index j = best + 1; j < n; ++j) {
    if (j != node && sim[j] > sim[best]) best = j;
  }
  return best;
}

WeakLabelMatrix generate_synthetic_lfs(std::span<const int> y_true, int n_classes,
                                       const LfSynthConfig& cfg) {
  if (n_classes < 2) throw InvalidArgument("generate_synthetic_lfs: need at least 2 classes");
  if (!(cfg.accuracy > 0.0 && cfg.accuracy <= 1.0)) {
    throw InvalidArgument("generate_synthetic_lfs: accuracy must lie in (0, 1]");
  }
  if (!(cfg.coverage > 0.0 && cfg.coverage <= 1.0)) {
    throw InvalidArgument("generate_synthetic_lfs: coverage must lie in (0, 1]");
  }
  if (cfg.n_lfs < 1) throw InvalidArgument("generate_synthetic_lfs: need at least one LF");
  const auto n = static_cast<Index>(y_true.size());
  VoteMatrix votes(n, cfg.n_lfs);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> wrong(0, n_classes - 2);
  for (Index i = 0; i < n; ++i) {
    const int y = y_true[static_cast<std::size_t>(i)];
    if (y < 0 || y >= n_classes) {
      throw InvalidArgument("generate_synthetic_lfs: label " + std::to_string(y) + " at node " +
                            std::to_string(i) + " outside [0, " + std::to_string(n_classes) + ")");
    }
    for (Index k = 0; k < cfg.n_lfs; ++k) {
      // Draw all three variates unconditionally so the stream layout does not
      // depend on the outcome.
      const double u_cover = unit(rng);
      const double u_correct = unit(rng);
      const int w = wrong(rng);
      if (u_cover >= cfg.coverage) {
        votes(i, k) = kAbstain;
      } else if (u_correct < cfg.accuracy) {
        votes(i, k) = y;
      } else {
        votes(i, k) = w >= y ? w + 1 : w;
      }
    }
  }
  return WeakLabelMatrix(std::move(votes), n_classes);
}

AgreementReport agreement_report(const WeakLabelMatrix& wlm, const AggregatedLabels& agg,
                                 std::span<const int> y_true) {
  AgreementReport r;
  double sum_correct = 0.0;
  double sum_incorrect = 0.0;
  for (Index i = 0; i < wlm.n_nodes(); ++i) {
    const int y = y_true[static_cast<std::size_t>(i)];
    if (agg.labels[i] == kAbstain || y < 0) continue;
    const double h = vote_entropy(wlm, i);
    if (agg.labels[i] == y) {
      sum_correct += h;
      ++r.n_correct;
    } else {
      sum_incorrect += h;
      ++r.n_incorrect;
    }
  }
  if (r.n_correct + r.n_incorrect == 0) {
    throw InvalidArgument("agreement_report: no covered nodes with known labels");
  }
  r.correct_empty = r.n_correct == 0;
  r.incorrect_empty = r.n_incorrect == 0;
  if (r.n_correct > 0) r.mean_entropy_correct = sum_correct / static_cast<double>(r.n_correct);
  if (r.n_incorrect > 0) r.mean_entropy_incorrect = sum_incorrect / static_cast<double>(r.n_incorrect);
  return r;
}

PairClassReport positive_pair_report(const WeakLabelMatrix& wlm, const Graph& g,
                                     std::span<const int> y_true, std::uint64_t seed) {
  const Index n = wlm.n_nodes();
  std::mt19937_64 rng(seed);
  PairClassReport r;
  Index same_top = 0;
  Index same_random = 0;
  Index n_random = 0;
  for (Index i = 0; i < n; ++i) {
    const int yi = y_true[static_cast<std::size_t>(i)];
    if (yi < 0 || wlm.coverage(i) == 0) continue;
    const Index j = top_positive_pair(wlm, i);
    if (y_true[static_cast<std::size_t>(j)] < 0) continue;
    ++r.n_anchors;
    if (y_true[static_cast<std::size_t>(j)] == yi) ++same_top;

    IndexList pool;
    for (Index k = 0; k < n; ++k) {
      if (k != i && y_true[static_cast<std::size_t>(k)] >= 0 && !g.adjacent(i, k)) pool.push_back(k);
    }
    if (pool.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const Index k = pool[pick(rng)];
    ++n_random;
    if (y_true[static_cast<std::size_t>(k)] == yi) ++same_random;
  }
  if (r.n_anchors > 0) r.top_pair_same_class = static_cast<double>(same_top) / static_cast<double>(r.n_anchors);
  if (n_random > 0) r.random_nonadjacent_same_class = static_cast<double>(same_random) / static_cast<double>(n_random);
  return r;
}

}  // namespace wsnet
