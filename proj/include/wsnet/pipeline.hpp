#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wsnet/config.hpp"
#include "wsnet/graph.hpp"
#include "wsnet/losses.hpp"
#include "wsnet/metrics.hpp"
#include "wsnet/nn.hpp"
#include "wsnet/structure.hpp"
#include "wsnet/weak_labels.hpp"

namespace wsnet {

struct Split {
  IndexList train;
  IndexList val;
  IndexList test;
};

/// `n_folds` independent random train/val/test splits (not rotated folds).
/// Val and test sizes are round(n * fraction); train takes the rest.
std::vector<Split> make_splits(Index n, double train_fraction, double val_fraction, double test_fraction,
                               int n_folds, std::uint64_t seed);

/// Graph-level state shared by every fold of one run.
struct TrainingInputs {
  const Graph* graph = nullptr;
  const WeakLabelMatrix* weak_labels = nullptr;
  /// Ground truth, -1 for unknown. Empty when unavailable.
  LabelVector y_true;
  NormalizedAdjacency<double> adjacency;
  Partition communities;
};

/// Normalises the adjacency and detects communities once.
TrainingInputs prepare_inputs(const Graph& g, const WeakLabelMatrix& wlm, LabelVector y_true,
                              std::uint64_t seed);

struct EpochLog {
  int epoch = 0;
  LossBreakdown loss;
  double val_f1 = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  /// Parameters at the epoch with the best validation weighted F1 (the
  /// final ones when no validation labels exist).
  EncoderParams params;
  OptimizerState optimizer;
  int best_epoch = 0;
  double best_val_f1 = std::numeric_limits<double>::quiet_NaN();
  std::vector<EpochLog> curve;
  Index clamped_probabilities = 0;
  Index negative_fallbacks = 0;
};

/// Full-batch training on one split. Only training-split weak labels are
/// visible to losses and pair selection; test nodes are never read.
TrainResult train(const TrainingInputs& in, const Split& split, const TrainConfig& cfg, std::uint64_t seed);

ClassificationReport evaluate(const EncoderParams& params, const TrainingInputs& in, std::span<const Index> nodes);

struct RunReport {
  std::string label;
  std::string config_hash;
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  std::vector<int> best_epochs;
  std::vector<std::vector<EpochLog>> curves;
  std::vector<ClassificationReport> fold_reports;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  RunReport report;
  std::vector<TrainResult> folds;
  std::vector<Split> splits;
};

/// Trains one model per split and aggregates test weighted F1.
ExperimentResult run_experiment(const TrainingInputs& in, const TrainConfig& cfg, const std::string& label = "WSNet");

/// Same encoder and head, unweighted cross-entropy on majority-vote labels only.
TrainConfig baseline_config(const TrainConfig& cfg);
ExperimentResult majority_vote_baseline(const TrainingInputs& in, const TrainConfig& cfg);

struct SweepOptions {
  Index n_lfs = 10;
  double coverage = 0.7;
};

struct SweepRow {
  double accuracy = 0.0;
  double mv_label_accuracy = 0.0;
  RunReport wsnet;
  RunReport baseline;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double spearman_wsnet = 0.0;
};

/// For each LF accuracy: synthesise LFs, run WSNet and the majority-vote baseline.
SweepReport noise_sweep(const Graph& g, const LabelVector& y_true, std::span<const double> accuracies,
                        const TrainConfig& cfg, const SweepOptions& options = {});

struct AblationRow {
  AblationFlags flags;
  RunReport report;
};

/// The seven configurations of ablation_configurations().
std::vector<AblationRow> ablate(const TrainingInputs& in, const TrainConfig& cfg);

inline const std::vector<double> kTauGrid{0.1, 0.3, 0.5, 0.7, 1.0};
inline const std::vector<Index> kNegativesGrid{10, 25, 50, 100};

struct GridPoint {
  double tau = 0.0;
  Index r = 0;
  /// Mean over folds of the best validation weighted F1; the selection score.
  double mean_val_f1 = 0.0;
  RunReport report;
};

struct GridSearchReport {
  std::vector<GridPoint> points;
  std::size_t best = 0;
  /// `cfg` with the winning tau and r.
  TrainConfig best_config;
};

/// Exhaustive search over tau x r scored on validation labels only. Ties go
/// to the earlier grid point. Test F1 is recorded but never consulted.
GridSearchReport grid_search(const TrainingInputs& in, const TrainConfig& cfg, std::span<const double> taus = kTauGrid,
                             std::span<const Index> negatives = kNegativesGrid);

}  // namespace wsnet
