// Acceptance harness: one PASS/FAIL line per criterion with pinned
// tolerances. Criterion 11 runs the "properties" doctest suite compiled
// into this binary.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <set>
#include <unistd.h>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "toy.hpp"
#include "wsnet/cli.hpp"
#include "wsnet/common.hpp"
#include "wsnet/pipeline.hpp"
#include "wsnet/synthetic.hpp"

using namespace wsnet;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kGradSeconds = 5.0;
constexpr double kOracleTol = 1e-10;
constexpr double kPerfectF1 = 0.95;
constexpr double kPerfectSeconds = 300.0;
constexpr double kNoiseGap = 0.05;
constexpr double kSpearmanMin = 0.8;
constexpr double kPairGap = 0.15;
constexpr double kLfStatTol = 0.02;
constexpr Index kAgreementNodes = 1000;
constexpr Index kLfVotesMin = 100000;

constexpr std::uint64_t kSeed = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string fmt_sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::span<const int> as_span(const LabelVector& y) { return {y.data(), static_cast<std::size_t>(y.size())}; }

/// The default benchmark graph: SBM(300, 3, 0.10, 0.01), unit feature noise.
const SyntheticGraph& benchmark() {
  static const SyntheticGraph g = generate_sbm({300, 3, 0.10, 0.01, 1.0, derive_seed(kSeed, SeedTag::kSbm)});
  return g;
}

WeakLabelMatrix benchmark_lfs(double accuracy, double coverage, std::uint64_t index) {
  const auto& g = benchmark();
  return generate_synthetic_lfs(as_span(g.labels), 3,
                                {10, accuracy, coverage, derive_seed(kSeed, SeedTag::kSyntheticLfs, index)});
}

// ------------------------------------------------------------------ 1, 2

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const Graph g = toy::graph();
  const auto w = toy::weak_labels();
  const auto f = toy::frozen(w, g);
  const auto p = toy::params();
  const RhoWeights rho =
      compute_rho(embed(normalize_adjacency(g), g.features(), p), toy::halves(PartitionKind::kCluster), w);
  GradCheckOptions opts;
  opts.step = kGradStep;
  opts.tolerance = kGradTol;
  double worst = 0.0;
  std::string per_term;
  const char* names[] = {"wlce", "wlcon", "scon"};
  for (int which = 0; which < 3; ++which) {
    auto fn = [&](ad::Tape& t, std::span<const ad::Var> v) {
      const auto terms = toy::losses(t, v, g, w, f, rho);
      return which == 0 ? terms.wlce : which == 1 ? terms.wlcon : terms.scon;
    };
    const auto r = grad_check(fn, toy::param_list(p), opts);
    worst = std::max(worst, r.max_rel_error);
    per_term += std::string(" ") + names[which] + "=" + fmt_sci(r.max_rel_error);
  }
  const double secs = seconds_since(t0);
  return {worst <= kGradTol && secs < kGradSeconds,
          "max rel err" + per_term + " (<= " + fmt_sci(kGradTol) + "), r=2 tau=0.5, " + fmt(secs, 3) + " s (< " +
              fmt(kGradSeconds) + " s)"};
}

Outcome loss_oracles() {
  const Graph g = toy::graph();
  const auto w = toy::weak_labels();
  const auto f = toy::frozen(w, g);
  const auto p = toy::params();
  const Matrix h0 = embed(normalize_adjacency(g), g.features(), p);
  const RhoWeights rho = compute_rho(h0, toy::halves(PartitionKind::kCluster), w);

  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const Matrix* m : p.tensors()) vars.push_back(t.parameter(*m));
  const auto terms = toy::losses(t, vars, g, w, f, rho);
  const Matrix h = terms.h.value();
  const auto votes = toy::votes();
  std::vector<int> agg;
  for (const auto& row : votes) agg.push_back(oracle::majority(row, 2));
  const Matrix probs = oracle::softmax_rows(oracle::add_bias(oracle::matmul(h, p.wc), p.bc));
  const auto rho_ref = oracle::rho(h, {0, 0, 0, 1, 1, 1}, votes, 2, true, true);
  std::vector<long> anchors(f.anchors.begin(), f.anchors.end()), positives(f.positives.begin(), f.positives.end());
  std::vector<std::vector<long>> negatives;
  for (const auto& n : f.negatives) negatives.emplace_back(n.begin(), n.end());

  double e_rho = 0.0;
  for (Index i = 0; i < 6; ++i) e_rho = std::max(e_rho, std::abs(rho.rho[i] - rho_ref[static_cast<std::size_t>(i)]));
  const double e_wlce = std::abs(terms.wlce.scalar() - oracle::wlce(probs, agg, rho_ref, {0, 1, 2, 3, 4, 5}));
  const double e_wlcon = std::abs(terms.wlcon.scalar() - oracle::wlcon(h, anchors, positives, negatives, 0.5));
  const double e_scon = std::abs(terms.scon.scalar() - oracle::scon(h, terms.h_corrupt.value(), {0, 0, 0, 1, 1, 1}));
  const double worst = std::max({e_rho, e_wlce, e_wlcon, e_scon});
  return {worst <= kOracleTol, "abs err rho=" + fmt_sci(e_rho) + " wlce=" + fmt_sci(e_wlce) +
                                   " wlcon=" + fmt_sci(e_wlcon) + " scon=" + fmt_sci(e_scon) + " (<= " +
                                   fmt_sci(kOracleTol) + ")"};
}

// ------------------------------------------------------------------ 3

Outcome perfect_labels() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& g = benchmark();
  const WeakLabelMatrix wlm = benchmark_lfs(1.0, 1.0, 0);
  const TrainConfig cfg;
  const TrainingInputs in = prepare_inputs(g.graph, wlm, g.labels, cfg.seed);
  const RunReport r = run_experiment(in, cfg).report;
  const double secs = seconds_since(t0);
  return {r.mean_f1 >= kPerfectF1 && secs < kPerfectSeconds && cfg.epochs <= 200,
          "p_a=1.0 coverage=1.0: F1 " + fmt(r.mean_f1) + " +/- " + fmt(r.std_f1) + " over " +
              std::to_string(r.fold_f1.size()) + " folds (>= " + fmt(kPerfectF1) + "), " + std::to_string(cfg.epochs) +
              " epochs, " + fmt(secs, 3) + " s (< " + fmt(kPerfectSeconds) + " s)"};
}

// ------------------------------------------------------------------ 4, 5

const SweepReport& sweep() {
  static const SweepReport r = [] {
    const std::vector<double> levels{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    const auto& g = benchmark();
    return noise_sweep(g.graph, g.labels, levels, TrainConfig{}, {10, 0.7});
  }();
  return r;
}

void print_sweep(std::ostream& os) {
  os << "      p_a   mv_acc  wsnet_f1        baseline_f1\n";
  for (const auto& row : sweep().rows) {
    os << "      " << std::left << std::setw(5) << row.accuracy << " " << std::setw(7) << fmt(row.mv_label_accuracy, 3)
       << " " << std::setw(15) << (fmt(row.wsnet.mean_f1) + " +/- " + fmt(row.wsnet.std_f1, 2)) << " "
       << fmt(row.baseline.mean_f1) << " +/- " << fmt(row.baseline.std_f1, 2) << std::right << "\n";
  }
}

Outcome noise_robustness() {
  for (const auto& row : sweep().rows) {
    if (row.accuracy != 0.3) continue;
    const double gap = row.wsnet.mean_f1 - row.baseline.mean_f1;
    return {gap >= kNoiseGap, "p_a=0.3 coverage=0.7: WSNet " + fmt(row.wsnet.mean_f1) + " vs majority vote " +
                                  fmt(row.baseline.mean_f1) + ", gap " + fmt(gap, 3) + " (>= " + fmt(kNoiseGap) + ")"};
  }
  return {false, "sweep has no p_a=0.3 row"};
}

Outcome monotone_trend() {
  const double rho = sweep().spearman_wsnet;
  return {rho >= kSpearmanMin, "spearman(p_a, WSNet F1) over 6 levels = " + fmt(rho, 3) + " (>= " +
                                   fmt(kSpearmanMin) + ")"};
}

// ------------------------------------------------------------------ 6

std::vector<AblationRow> g_ablation;

Outcome ablation_ordering() {
  const auto& g = benchmark();
  const WeakLabelMatrix wlm = benchmark_lfs(0.4, 0.7, 40);
  const TrainConfig cfg;
  g_ablation = ablate(prepare_inputs(g.graph, wlm, g.labels, cfg.seed), cfg);
  auto f1 = [&](const std::string& label) {
    for (const auto& r : g_ablation)
      if (r.flags.label() == label) return r.report.mean_f1;
    throw std::runtime_error("missing ablation row " + label);
  };
  const double full = f1("WSNet"), no_wlcon = f1("-L_WLCon"), no_scon = f1("-L_SCon"), no_wlce = f1("-L_WLCE");
  const bool beats_wlcon = full > no_wlcon;
  const bool beats_scon = full > no_scon;
  const bool wlce_largest = (full - no_wlce) > (full - no_wlcon) && (full - no_wlce) > (full - no_scon);
  return {beats_wlcon && beats_scon && wlce_largest,
          "p_a=0.4: full " + fmt(full) + ", -L_WLCon " + fmt(no_wlcon) + (beats_wlcon ? " (<full)" : " (>=full)") +
              ", -L_SCon " + fmt(no_scon) + (beats_scon ? " (<full)" : " (>=full)") + ", -L_WLCE " + fmt(no_wlce) +
              (wlce_largest ? " (largest drop)" : " (not the largest drop)")};
}

void print_ablation(std::ostream& os) {
  for (const auto& r : g_ablation) {
    os << "      " << std::left << std::setw(9) << r.flags.label() << std::right << " " << fmt(r.report.mean_f1)
       << " +/- " << fmt(r.report.std_f1, 2) << "\n";
  }
}

// ------------------------------------------------------------------ 7, 8, 9

Outcome agreement_entropy() {
  const auto y = generate_sbm({3 * kAgreementNodes, 3, 0.01, 0.001, 1.0, derive_seed(kSeed, SeedTag::kSbm, 7)}).labels;
  const WeakLabelMatrix wlm =
      generate_synthetic_lfs(as_span(y), 3, {10, 0.8, 0.7, derive_seed(kSeed, SeedTag::kSyntheticLfs, 70)});
  const auto r = agreement_report(wlm, majority_vote(wlm), as_span(y));
  const bool enough = r.n_correct + r.n_incorrect >= kAgreementNodes && !r.correct_empty && !r.incorrect_empty;
  return {enough && r.mean_entropy_correct < r.mean_entropy_incorrect,
          "p_a=0.8, N=" + std::to_string(r.n_correct + r.n_incorrect) + ": mean entropy correct " +
              fmt(r.mean_entropy_correct) + " (n=" + std::to_string(r.n_correct) + ") < incorrect " +
              fmt(r.mean_entropy_incorrect) + " (n=" + std::to_string(r.n_incorrect) + ")"};
}

Outcome pair_class_rate() {
  const auto& g = benchmark();
  bool pass = true;
  std::string detail;
  std::uint64_t index = 80;
  for (double pa : {0.7, 0.9}) {
    const WeakLabelMatrix wlm = benchmark_lfs(pa, 0.7, index++);
    const auto r = positive_pair_report(wlm, g.graph, as_span(g.labels), derive_seed(kSeed, SeedTag::kPairReport));
    const double gap = r.top_pair_same_class - r.random_nonadjacent_same_class;
    pass = pass && gap >= kPairGap;
    if (!detail.empty()) detail += "; ";
    detail += "p_a=" + fmt(pa) + ": top pair " + fmt(r.top_pair_same_class, 3) + " vs random non-adjacent " +
              fmt(r.random_nonadjacent_same_class, 3) + ", gap " + fmt(gap, 3);
  }
  return {pass, detail + " (>= " + fmt(kPairGap) + ")"};
}

Outcome lf_statistics() {
  const Index n = 20000;
  LabelVector y(n);
  for (Index i = 0; i < n; ++i) y[i] = static_cast<int>(i % 4);
  bool pass = true;
  double worst_acc = 0.0, worst_abstain = 0.0;
  Index votes = 0;
  std::uint64_t index = 90;
  for (double pa : {0.1, 0.3, 0.7, 1.0}) {
    for (double coverage : {0.3, 0.7, 1.0}) {
      const WeakLabelMatrix w = generate_synthetic_lfs(as_span(y), 4,
                                                       {10, pa, coverage, derive_seed(kSeed, SeedTag::kSyntheticLfs, index++)});
      Index cast = 0, correct = 0;
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < w.n_lfs(); ++j) {
          if (w.vote(i, j) == kAbstain) continue;
          ++cast;
          correct += w.vote(i, j) == y[i];
        }
      }
      const Index total = n * w.n_lfs();
      votes = total;
      const double acc_err = std::abs(static_cast<double>(correct) / static_cast<double>(cast) - pa);
      const double abs_err = std::abs(1.0 - static_cast<double>(cast) / static_cast<double>(total) - (1.0 - coverage));
      worst_acc = std::max(worst_acc, acc_err);
      worst_abstain = std::max(worst_abstain, abs_err);
      pass = pass && acc_err < kLfStatTol && abs_err < kLfStatTol && total >= kLfVotesMin;
    }
  }
  return {pass, "12 (p_a, coverage) settings x " + std::to_string(votes) + " votes: max |acc - p_a| " +
                    fmt_sci(worst_acc) + ", max |abstain - (1 - coverage)| " + fmt_sci(worst_abstain) + " (< " +
                    fmt(kLfStatTol) + ")"};
}

// ------------------------------------------------------------------ 10

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("wsnet_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream out, err;
  auto cli = [&](std::vector<std::string> args) {
    const int code = run_cli(args, out, err);
    if (code != 0) throw std::runtime_error("wsnet " + args[0] + " exited with " + std::to_string(code) + ": " + err.str());
  };
  cli({"gen-synth", "--pa", "0.7", "--seed", "3", "--out", (root / "data").string()});
  cli({"train", "--data", (root / "data").string(), "--out", (root / "a").string()});
  cli({"train", "--data", (root / "data").string(), "--out", (root / "b").string()});

  bool same_curves = true;
  int folds = 0;
  for (; fs::exists(root / "a" / ("curves_fold" + std::to_string(folds) + ".csv")); ++folds) {
    const std::string name = "curves_fold" + std::to_string(folds) + ".csv";
    same_curves = same_curves && slurp(root / "a" / name) == slurp(root / "b" / name);
  }
  const auto a = nlohmann::json::parse(slurp(root / "a" / "report.json"));
  const auto b = nlohmann::json::parse(slurp(root / "b" / "report.json"));
  const bool same_f1 = a.at("fold_f1") == b.at("fold_f1") && a.at("mean_f1") == b.at("mean_f1");
  fs::remove_all(root);
  return {folds > 0 && same_curves && same_f1,
          std::to_string(folds) + " fold loss logs " + (same_curves ? "identical" : "DIFFER") + ", final F1 " +
              fmt(a.at("mean_f1").get<double>(), 6) + (same_f1 ? " identical" : " DIFFERS")};
}

// ------------------------------------------------------------------ 11

Outcome property_suite() {
  doctest::Context ctx;
  ctx.setOption("test-suite", "properties");
  ctx.setOption("minimal", true);
  ctx.setOption("no-intro", true);
  ctx.setOption("no-version", true);
  const int rc = ctx.run();
  return {rc == 0, std::string("doctest suite 'properties' (100 random instances per case) ") +
                       (rc == 0 ? "passed" : "FAILED")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wsnet acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  retain_heap_memory();
  set_warnings_enabled(false);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    std::function<void(std::ostream&)> extra;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness, nullptr},
      {2, "loss oracles", loss_oracles, nullptr},
      {3, "perfect-label sanity", perfect_labels, nullptr},
      {4, "noise robustness", noise_robustness, print_sweep},
      {5, "monotone trend", monotone_trend, nullptr},
      {6, "ablation ordering", ablation_ordering, print_ablation},
      {7, "agreement entropy", agreement_entropy, nullptr},
      {8, "positive-pair class rate", pair_class_rate, nullptr},
      {9, "weak-supervision statistics", lf_statistics, nullptr},
      {10, "determinism", determinism, nullptr},
      {11, "invariant suite", property_suite, nullptr},
  };

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << c.id << "] " << c.name << ": " << o.detail
              << "  (" << fmt(seconds_since(t0), 3) << " s)" << std::endl;
    if (c.extra) {
      try {
        c.extra(std::cout);
      } catch (const std::exception&) {
      }
    }
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
