#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsnet/autodiff.hpp"
#include "wsnet/graph.hpp"
#include "wsnet/structure.hpp"
#include "wsnet/weak_labels.hpp"

namespace wsnet {

// ------------------------------------------------------------------ rho

/// How vote entropy enters the node weight.
enum class EntropyMode {
  kEntropy,                    // multiply by entropy(Λ_i) as written
  kOneMinusNormalizedEntropy,  // multiply by 1 - entropy(Λ_i) / ln C
};

struct RhoOptions {
  /// Map cosine similarity to (1 + cos) / 2 before normalising.
  bool cosine_shift = true;
  EntropyMode entropy_mode = EntropyMode::kOneMinusNormalizedEntropy;
  /// rho = 1 for every covered node (plain cross-entropy).
  bool uniform = false;
};

struct RhoComponents {
  Index cluster_size = 0;
  double centroid_similarity = 0.0;
  double entropy_term = 0.0;
};

struct RhoWeights {
  Vector rho;
  std::vector<RhoComponents> components;
  /// Similarity denominator was not positive; a uniform 1/N ratio was used.
  bool degenerate = false;
};

double entropy_term(const WeakLabelMatrix& wlm, Index node, EntropyMode mode);

/// rho_i = |Q_i| * s(h_i, h_Qi) / sum_j s(h_j, h_Qj) * entropy term, where s
/// is cosine similarity to the node's K-means centroid. All-abstain nodes
/// get rho = 0.
RhoWeights compute_rho(const Matrix& h, const Partition& clusters, const WeakLabelMatrix& wlm,
                       const RhoOptions& options = {});

/// Weights used before any clustering exists: the entropy term alone.
RhoWeights initial_rho(const WeakLabelMatrix& wlm, const RhoOptions& options = {});

// ------------------------------------------------------------------ L_WLCE

struct WlceDiagnostics {
  /// Entries whose probability fell below the 1e-12 clamp.
  Index clamped = 0;
};

/// (1/|nodes|) * sum_i rho_i * -log max(p_i[ỹ_i], 1e-12) over `nodes`, taking
/// row-wise log-probabilities. Nodes with ỹ = -1 contribute zero.
ad::Var wlce_loss(const ad::Var& log_probs, const AggregatedLabels& agg, const RhoWeights& rho,
                  std::span<const Index> nodes, WlceDiagnostics* diag = nullptr);

// ------------------------------------------------------------------ L_WLCon

enum class TemperatureMode {
  kInside,   // exp(h_i . h_j / tau)
  kTypeset,  // exp(h_i . h_j) / tau; the factor cancels in the ratio
};

struct ContrastBatch {
  IndexList anchors;
  IndexList positives;
  std::vector<IndexList> negatives;
  double tau = 0.5;
  /// Anchors whose non-neighbour pool was empty.
  Index n_fallback = 0;
};

/// Best weak-label partner of every anchor.
IndexList positive_pairs(const WeakLabelMatrix& wlm, std::span<const Index> anchors, std::uint64_t seed);

/// Positives from `positives`; r negatives per anchor drawn without
/// replacement from nodes not adjacent to it (excluding itself and its
/// positive). When that pool is empty every other node is eligible.
ContrastBatch build_contrast_batch(const Graph& g, std::span<const Index> anchors,
                                   std::span<const Index> positives, Index r, double tau, std::uint64_t seed);

/// Anchors every covered node; positives by weak-label similarity.
ContrastBatch build_contrast_batch(const WeakLabelMatrix& wlm, const Graph& g, Index r, double tau,
                                   std::uint64_t seed);

/// InfoNCE averaged over anchors, log-sum-exp stabilised.
ad::Var wlcon_loss(const ad::Var& h, const ContrastBatch& batch, TemperatureMode mode = TemperatureMode::kInside);

// ------------------------------------------------------------------ L_SCon

/// Sparse G x N mean-pooling operator for `part`.
SparseMatrix pooling_matrix(const Partition& part);

/// -(1/2N) [sum_i log σ(h_i·h_Bi) + sum_j log(1 - σ(h̃_j·h_Bj))], with h_B
/// the community mean of the real embeddings.
ad::Var scon_loss(const ad::Var& h, const ad::Var& h_corrupt, const Partition& communities);

// ------------------------------------------------------------------ total

struct AblationFlags {
  bool scon = true;
  bool wlce = true;
  bool wlcon = true;

  bool any() const { return scon || wlce || wlcon; }
  /// "WSNet", "-L_WLCE", "+L_SCon", ... or a flag list for other combinations.
  std::string label() const;
  bool operator==(const AblationFlags&) const = default;
};

/// Full model, each single removal, and each component alone.
const std::vector<AblationFlags>& ablation_configurations();

struct LossTerms {
  std::optional<ad::Var> scon;
  std::optional<ad::Var> wlce;
  std::optional<ad::Var> wlcon;
};

struct LossBreakdown {
  double l_scon = 0.0;
  double l_wlce = 0.0;
  double l_wlcon = 0.0;
  double total = 0.0;
};

struct TotalLoss {
  ad::Var total;
  LossBreakdown breakdown;
};

/// Unit-weight sum of the enabled terms; disabled terms contribute 0.
TotalLoss total_loss(const LossTerms& terms, const AblationFlags& flags);

}  // namespace wsnet
