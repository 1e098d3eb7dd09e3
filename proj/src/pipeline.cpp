#include "wsnet/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <random>
#include <string>

namespace wsnet {

namespace {

std::span<const int> as_span(const LabelVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Runs fn(0..n-1) on up to `threads` workers. Each index owns its output slot.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  for (int start = 0; start < n; start += threads) {
    std::vector<std::future<void>> jobs;
    for (int i = start; i < std::min(n, start + threads); ++i) jobs.push_back(std::async(std::launch::async, fn, i));
    for (auto& j : jobs) j.get();
  }
}

double split_f1(const Eigen::VectorXi& predicted, const LabelVector& y_true, std::span<const Index> nodes,
                int n_classes) {
  std::vector<int> t, p;
  for (Index i : nodes) {
    if (y_true[i] < 0) continue;
    t.push_back(y_true[i]);
    p.push_back(predicted[i]);
  }
  return weighted_f1(t, p, n_classes);
}

Eigen::VectorXi argmax_rows(const Matrix& m) {
  Eigen::VectorXi out(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    m.row(i).maxCoeff(&best);
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace

std::vector<Split> make_splits(Index n, double train_fraction, double val_fraction, double test_fraction,
                               int n_folds, std::uint64_t seed) {
  if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction <= 0.0 ||
      std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw InvalidArgument("make_splits: fractions must be non-negative and sum to 1");
  }
  if (n_folds < 1) throw InvalidArgument("make_splits: need at least one fold");
  const auto n_val = static_cast<Index>(std::llround(static_cast<double>(n) * val_fraction));
  const auto n_test = static_cast<Index>(std::llround(static_cast<double>(n) * test_fraction));
  const Index n_train = n - n_val - n_test;
  if (n_train < 1 || n_test < 1 || (val_fraction > 0.0 && n_val < 1)) {
    throw InvalidArgument("make_splits: " + std::to_string(n) + " nodes are too few for non-empty splits");
  }
  std::vector<Split> folds;
  for (int f = 0; f < n_folds; ++f) {
    const IndexList perm = random_permutation(n, derive_seed(seed, SeedTag::kSplits, static_cast<std::uint64_t>(f)));
    Split s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    folds.push_back(std::move(s));
  }
  return folds;
}

TrainingInputs prepare_inputs(const Graph& g, const WeakLabelMatrix& wlm, LabelVector y_true, std::uint64_t seed) {
  if (wlm.n_nodes() != g.n_nodes()) {
    throw InvalidArgument("prepare_inputs: weak label matrix has " + std::to_string(wlm.n_nodes()) +
                          " rows, graph has " + std::to_string(g.n_nodes()) + " nodes");
  }
  if (y_true.size() != 0 && y_true.size() != g.n_nodes()) {
    throw InvalidArgument("prepare_inputs: label vector length does not match node count");
  }
  TrainingInputs in;
  in.graph = &g;
  in.weak_labels = &wlm;
  in.y_true = std::move(y_true);
  in.adjacency = normalize_adjacency(g);
  in.communities = detect_communities(g, derive_seed(seed, SeedTag::kCommunities));
  return in;
}

TrainResult train(const TrainingInputs& in, const Split& split, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Graph& g = *in.graph;
  const int n_classes = in.weak_labels->n_classes();
  if (split.train.empty()) throw InvalidArgument("train: empty training split");

  // Votes of validation and test nodes are masked before anything reads them.
  const WeakLabelMatrix visible = in.weak_labels->restricted_to(split.train);
  const AggregatedLabels agg = majority_vote(visible);
  IndexList anchors;
  for (Index i : split.train) {
    if (visible.coverage(i) > 0) anchors.push_back(i);
  }
  const IndexList positives =
      g.n_nodes() >= 2 ? positive_pairs(visible, anchors, derive_seed(seed, SeedTag::kContrast)) : IndexList{};

  bool have_val = false;
  if (in.y_true.size() != 0) {
    for (Index i : split.val) have_val = have_val || in.y_true[i] >= 0;
  }

  TrainResult result;
  EncoderParams params = EncoderParams::xavier({g.n_features(), cfg.hidden, cfg.embedding, n_classes},
                                               derive_seed(seed, SeedTag::kInit));
  Adam adam(cfg.adam, std::vector<const Matrix*>(std::as_const(params).tensors()));
  result.params = params;
  result.optimizer = adam.state();
  const Matrix& x = g.features();

  auto consider = [&](const Matrix& logits, int epoch) {
    const double f1 = split_f1(argmax_rows(logits), in.y_true, split.val, n_classes);
    if (std::isnan(result.best_val_f1) || f1 > result.best_val_f1) {
      result.best_val_f1 = f1;
      result.best_epoch = epoch;
      result.params = params;
      result.optimizer = adam.state();
    }
    return f1;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ad::Tape tape;
    const EncoderVars vars = attach(tape, params);
    EpochLog log;
    log.epoch = epoch;
    try {
      const ad::Var h = encode(in.adjacency, tape.constant(x), vars);
      const ad::Var logits = classify_logits(h, vars);
      if (have_val) log.val_f1 = consider(logits.value(), epoch);

      LossTerms terms;
      if (cfg.ablation.wlce) {
        RhoWeights rho;
        if (epoch == 0 || cfg.rho.uniform) {
          rho = initial_rho(visible, cfg.rho);
        } else {
          const auto clusters = kmeans(h.value(), n_classes, derive_seed(seed, SeedTag::kKMeans, epoch),
                                       cfg.kmeans_max_iter, cfg.kmeans_tol);
          rho = compute_rho(h.value(), clusters.partition, visible, cfg.rho);
        }
        WlceDiagnostics diag;
        terms.wlce = wlce_loss(ad::log_softmax_rows(logits), agg, rho, split.train, &diag);
        result.clamped_probabilities += diag.clamped;
      }
      if (cfg.ablation.wlcon) {
        if (anchors.empty()) {
          terms.wlcon = tape.constant(Matrix::Zero(1, 1));
        } else {
          const ContrastBatch batch = build_contrast_batch(
              g, anchors, positives, cfg.r, cfg.tau, derive_seed(seed, SeedTag::kContrast, epoch + 1));
          result.negative_fallbacks += batch.n_fallback;
          terms.wlcon = wlcon_loss(h, batch, cfg.temperature);
        }
      }
      if (cfg.ablation.scon) {
        const Matrix corrupted = corrupt_features(g, derive_seed(seed, SeedTag::kCorruption, epoch));
        const ad::Var h_corrupt = encode(in.adjacency, tape.constant(corrupted), vars);
        terms.scon = scon_loss(h, h_corrupt, in.communities);
      }
      const TotalLoss total = total_loss(terms, cfg.ablation);
      log.loss = total.breakdown;
      tape.backward(total.total);
    } catch (const NonFiniteError& e) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }

    std::vector<const Matrix*> grads;
    for (const ad::Var& v : vars.all()) grads.push_back(&v.grad());
    adam.step(params.tensors(), grads);
    result.curve.push_back(log);
  }

  if (!params.w1.allFinite() || !params.w2.allFinite() || !params.wc.allFinite()) {
    throw DivergenceError("training diverged: non-finite parameters after the last step");
  }
  if (have_val) {
    ad::Tape tape;
    const EncoderVars vars = attach(tape, params, false);
    consider(classify_logits(encode(in.adjacency, tape.constant(x), vars), vars).value(), cfg.epochs);
  } else {
    result.params = params;
    result.optimizer = adam.state();
    result.best_epoch = cfg.epochs;
  }
  return result;
}

ClassificationReport evaluate(const EncoderParams& params, const TrainingInputs& in, std::span<const Index> nodes) {
  if (nodes.empty()) throw InvalidArgument("evaluate: empty split");
  if (in.y_true.size() == 0) throw InvalidArgument("evaluate: no ground-truth labels");
  const Eigen::VectorXi predicted = predict_labels(in.adjacency, in.graph->features(), params);
  std::vector<int> t, p;
  for (Index i : nodes) {
    if (in.y_true[i] < 0) continue;
    t.push_back(in.y_true[i]);
    p.push_back(predicted[i]);
  }
  if (t.empty()) throw InvalidArgument("evaluate: split has no labelled nodes");
  return classification_report(t, p, in.weak_labels->n_classes());
}

ExperimentResult run_experiment(const TrainingInputs& in, const TrainConfig& cfg, const std::string& label) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.splits = make_splits(in.graph->n_nodes(), cfg.train_fraction, cfg.val_fraction, cfg.test_fraction,
                           cfg.n_folds, cfg.seed);
  out.folds.resize(out.splits.size());
  std::vector<ClassificationReport> reports(out.splits.size());
  parallel_for(static_cast<int>(out.splits.size()), cfg.threads, [&](int f) {
    const auto fold_seed = derive_seed(cfg.seed, SeedTag::kFold, static_cast<std::uint64_t>(f));
    out.folds[static_cast<std::size_t>(f)] = train(in, out.splits[static_cast<std::size_t>(f)], cfg, fold_seed);
    // Test nodes are read only here, after training has finished.
    reports[static_cast<std::size_t>(f)] =
        evaluate(out.folds[static_cast<std::size_t>(f)].params, in, out.splits[static_cast<std::size_t>(f)].test);
  });

  RunReport& r = out.report;
  r.label = label;
  r.config_hash = cfg.hash();
  for (std::size_t f = 0; f < out.folds.size(); ++f) {
    r.fold_f1.push_back(reports[f].weighted_f1);
    r.best_epochs.push_back(out.folds[f].best_epoch);
    r.curves.push_back(out.folds[f].curve);
  }
  r.fold_reports = std::move(reports);
  const MeanStd ms = mean_std(r.fold_f1);
  r.mean_f1 = ms.mean;
  r.std_f1 = ms.std;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TrainConfig baseline_config(const TrainConfig& cfg) {
  TrainConfig b = cfg;
  b.ablation = {false, true, false};
  b.rho.uniform = true;
  return b;
}

ExperimentResult majority_vote_baseline(const TrainingInputs& in, const TrainConfig& cfg) {
  return run_experiment(in, baseline_config(cfg), "Majority Vote");
}

SweepReport noise_sweep(const Graph& g, const LabelVector& y_true, std::span<const double> accuracies,
                        const TrainConfig& cfg, const SweepOptions& options) {
  if (accuracies.empty()) throw InvalidArgument("noise_sweep: empty accuracy list");
  int n_classes = y_true.maxCoeff() + 1;
  n_classes = std::max(n_classes, 2);
  SweepReport out;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < accuracies.size(); ++k) {
    LfSynthConfig lf;
    lf.n_lfs = options.n_lfs;
    lf.accuracy = accuracies[k];
    lf.coverage = options.coverage;
    lf.seed = derive_seed(cfg.seed, SeedTag::kSyntheticLfs, k);
    const WeakLabelMatrix wlm = generate_synthetic_lfs(as_span(y_true), n_classes, lf);
    const TrainingInputs in = prepare_inputs(g, wlm, y_true, cfg.seed);

    SweepRow row;
    row.accuracy = accuracies[k];
    const AggregatedLabels agg = majority_vote(wlm);
    Index covered = 0, correct = 0;
    for (Index i = 0; i < wlm.n_nodes(); ++i) {
      if (agg.labels[i] == kAbstain) continue;
      ++covered;
      if (agg.labels[i] == y_true[i]) ++correct;
    }
    row.mv_label_accuracy = covered > 0 ? static_cast<double>(correct) / static_cast<double>(covered) : 0.0;
    row.wsnet = run_experiment(in, cfg).report;
    row.baseline = majority_vote_baseline(in, cfg).report;
    xs.push_back(row.accuracy);
    ys.push_back(row.wsnet.mean_f1);
    out.rows.push_back(std::move(row));
  }
  out.spearman_wsnet = xs.size() >= 2 ? spearman(xs, ys) : 0.0;
  return out;
}

std::vector<AblationRow> ablate(const TrainingInputs& in, const TrainConfig& cfg) {
  std::vector<AblationRow> rows;
  for (const AblationFlags& flags : ablation_configurations()) {
    TrainConfig c = cfg;
    c.ablation = flags;
    rows.push_back({flags, run_experiment(in, c, flags.label()).report});
  }
  return rows;
}

GridSearchReport grid_search(const TrainingInputs& in, const TrainConfig& cfg, std::span<const double> taus,
                             std::span<const Index> negatives) {
  if (taus.empty() || negatives.empty()) throw InvalidArgument("grid_search: empty grid");
  GridSearchReport out;
  for (double tau : taus) {
    for (Index r : negatives) {
      TrainConfig c = cfg;
      c.tau = tau;
      c.r = r;
      c.validate();
      ExperimentResult res = run_experiment(in, c);
      GridPoint point;
      point.tau = tau;
      point.r = r;
      double sum = 0.0;
      for (const TrainResult& f : res.folds) {
        if (std::isnan(f.best_val_f1)) throw InvalidArgument("grid_search: validation split has no labels");
        sum += f.best_val_f1;
      }
      point.mean_val_f1 = sum / static_cast<double>(res.folds.size());
      point.report = std::move(res.report);
      if (out.points.empty() || point.mean_val_f1 > out.points[out.best].mean_val_f1) out.best = out.points.size();
      out.points.push_back(std::move(point));
    }
  }
  out.best_config = cfg;
  out.best_config.tau = out.points[out.best].tau;
  out.best_config.r = out.points[out.best].r;
  return out;
}

}  // namespace wsnet
