#include "wsnet/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "wsnet/checkpoint.hpp"
#include "wsnet/dataset.hpp"
#include "wsnet/pipeline.hpp"
#include "wsnet/report.hpp"
#include "wsnet/synthetic.hpp"

namespace wsnet {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string data;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_data = true) {
  auto* data = cmd->add_option("--data", f.data, "Dataset directory");
  if (needs_data) data->required();
  cmd->add_option("--config", f.config, "Configuration file (INI)");
  cmd->add_option("--seed", f.seed, "Master seed; overrides the config file");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
}

TrainConfig resolve_config(const CommonFlags& f) {
  TrainConfig cfg = f.config.empty() ? TrainConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << std::setw(2) << j << '\n';
}

const WeakLabelMatrix& require_lfs(const DatasetBundle& b) {
  if (!b.weak_labels) throw DatasetError("dataset " + b.directory.string() + " has no lfs.csv");
  return *b.weak_labels;
}

const LabelVector& require_labels(const DatasetBundle& b) {
  if (!b.y_true) throw DatasetError("dataset " + b.directory.string() + " has no labels.txt");
  return *b.y_true;
}

std::string fmt_f1(double mean, double std) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << mean << " +/- " << std::setprecision(4) << std;
  return os.str();
}

std::vector<double> parse_list(const std::string& text, const std::string& flag = "--pa-list") {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

int cmd_gen_synth(const SbmConfig& sbm, const LfSynthConfig& lf, const std::string& out_dir, std::ostream& out) {
  const SyntheticGraph s = generate_sbm(sbm);
  const WeakLabelMatrix wlm =
      generate_synthetic_lfs(std::span<const int>(s.labels.data(), static_cast<std::size_t>(s.labels.size())),
                             sbm.n_classes, lf);
  write_dataset(out_dir, s.graph, &wlm, &s.labels, sbm.n_classes);
  out << "gen-synth: wrote " << s.graph.n_nodes() << " nodes, " << s.graph.edges().size() << " edges, "
      << wlm.n_lfs() << " LFs to " << out_dir << '\n';
  return kExitOk;
}

int cmd_train(const CommonFlags& f, std::ostream& out) {
  const TrainConfig cfg = resolve_config(f);
  const DatasetBundle b = load_dataset(f.data);
  LabelVector y = b.y_true ? *b.y_true : LabelVector();
  const TrainingInputs in = prepare_inputs(b.graph, require_lfs(b), y, cfg.seed);
  if (in.y_true.size() == 0) throw DatasetError("train: labels.txt is required to score the test split");
  const ExperimentResult res = run_experiment(in, cfg);

  fs::create_directories(f.out);
  for (std::size_t k = 0; k < res.folds.size(); ++k) {
    std::ofstream curve(fs::path(f.out) / ("curves_fold" + std::to_string(k) + ".csv"));
    write_loss_curve_csv(curve, res.folds[k].curve);
    save_checkpoint(fs::path(f.out) / ("checkpoint_fold" + std::to_string(k) + ".bin"),
                    {res.folds[k].params, res.folds[k].optimizer, res.folds[k].best_epoch, cfg.hash()});
  }
  {
    std::ofstream os(fs::path(f.out) / "communities.csv");
    write_partition_csv(os, in.communities, b.graph.node_ids());
  }
  {
    std::ofstream os(fs::path(f.out) / "config.ini");
    write_config(os, cfg);
  }
  write_json(fs::path(f.out) / "report.json", with_provenance(to_json(res.report), cfg, b.content_hashes));
  out << "train: weighted F1 " << fmt_f1(res.report.mean_f1, res.report.std_f1) << " over " << res.folds.size()
      << " folds (config " << cfg.hash() << ")\n";
  return kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::string& pa_list, const SweepOptions& opts, std::ostream& out) {
  const TrainConfig cfg = resolve_config(f);
  const std::vector<double> accuracies = parse_list(pa_list);
  const DatasetBundle b = load_dataset(f.data);
  const SweepReport r = noise_sweep(b.graph, require_labels(b), accuracies, cfg, opts);
  fs::create_directories(f.out);
  {
    std::ofstream os(fs::path(f.out) / "sweep.csv");
    write_sweep_csv(os, r);
  }
  write_json(fs::path(f.out) / "sweep.json", with_provenance(to_json(r), cfg, b.content_hashes));
  out << "sweep: " << r.rows.size() << " accuracy levels, spearman(p_a, F1) = " << r.spearman_wsnet << '\n';
  return kExitOk;
}

int cmd_ablate(const CommonFlags& f, std::ostream& out) {
  const TrainConfig cfg = resolve_config(f);
  const DatasetBundle b = load_dataset(f.data);
  const TrainingInputs in = prepare_inputs(b.graph, require_lfs(b), require_labels(b), cfg.seed);
  const std::vector<AblationRow> rows = ablate(in, cfg);
  fs::create_directories(f.out);
  {
    std::ofstream os(fs::path(f.out) / "ablation.csv");
    write_ablation_csv(os, rows);
  }
  write_json(fs::path(f.out) / "ablation.json", with_provenance(to_json(rows), cfg, b.content_hashes));
  out << "ablate: " << rows.size() << " configurations, full model " << fmt_f1(rows.back().report.mean_f1, rows.back().report.std_f1)
      << '\n';
  return kExitOk;
}

int cmd_tune(const CommonFlags& f, const std::string& tau_list, const std::string& r_list, std::ostream& out) {
  const TrainConfig cfg = resolve_config(f);
  const std::vector<double> taus = parse_list(tau_list, "--tau-list");
  std::vector<Index> rs;
  for (double r : parse_list(r_list, "--r-list")) {
    if (r != std::floor(r)) throw ConfigError("--r-list: " + std::to_string(r) + " is not an integer");
    rs.push_back(static_cast<Index>(r));
  }
  const DatasetBundle b = load_dataset(f.data);
  const TrainingInputs in = prepare_inputs(b.graph, require_lfs(b), require_labels(b), cfg.seed);
  const GridSearchReport r = grid_search(in, cfg, taus, rs);
  fs::create_directories(f.out);
  {
    std::ofstream os(fs::path(f.out) / "grid.csv");
    write_grid_csv(os, r);
  }
  {
    std::ofstream os(fs::path(f.out) / "tuned.ini");
    write_config(os, r.best_config);
  }
  write_json(fs::path(f.out) / "grid.json", with_provenance(to_json(r), cfg, b.content_hashes));
  const auto& best = r.points[r.best];
  out << "tune: " << r.points.size() << " grid points, best tau=" << best.tau << " r=" << best.r
      << " (validation F1 " << std::fixed << std::setprecision(4) << best.mean_val_f1 << ")\n";
  return kExitOk;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint, std::ostream& out) {
  const DatasetBundle b = load_dataset(f.data);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const LabelVector& y = require_labels(b);
  const auto norm = normalize_adjacency(b.graph);
  const Eigen::VectorXi pred = predict_labels(norm, b.graph.features(), ckpt.params);
  std::vector<int> t, p;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0) continue;
    t.push_back(y[i]);
    p.push_back(pred[i]);
  }
  const ClassificationReport r = classification_report(t, p, static_cast<int>(ckpt.params.wc.cols()));
  nlohmann::json body = to_json(r);
  body["checkpoint"] = checkpoint;
  body["provenance"] = {{"config_hash", ckpt.config_hash}, {"dataset_hashes", b.content_hashes}};
  fs::create_directories(f.out);
  write_json(fs::path(f.out) / "eval.json", body);
  out << "eval: weighted F1 " << std::fixed << std::setprecision(4) << r.weighted_f1 << " on " << r.total
      << " labelled nodes\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly supervised graph contrastive learning"};
  app.require_subcommand(1);

  SbmConfig sbm;
  LfSynthConfig lf;
  std::string synth_out = "synth";
  std::uint64_t synth_seed = 0;
  auto* gen = app.add_subcommand("gen-synth", "Generate a stochastic-block-model dataset with synthetic LFs");
  gen->add_option("--n-nodes", sbm.n_nodes)->capture_default_str();
  gen->add_option("--classes", sbm.n_classes)->capture_default_str();
  gen->add_option("--p-in", sbm.p_in)->capture_default_str();
  gen->add_option("--p-out", sbm.p_out)->capture_default_str();
  gen->add_option("--feature-noise", sbm.feature_noise)->capture_default_str();
  gen->add_option("--m", lf.n_lfs, "Number of labeling functions")->capture_default_str();
  gen->add_option("--pa", lf.accuracy, "LF accuracy")->capture_default_str();
  gen->add_option("--coverage", lf.coverage, "LF coverage")->capture_default_str();
  gen->add_option("--seed", synth_seed)->capture_default_str();
  gen->add_option("--out", synth_out, "Output dataset directory")->capture_default_str();

  CommonFlags train_flags, sweep_flags, ablate_flags, eval_flags;
  auto* train_cmd = app.add_subcommand("train", "Train and score over independent random splits");
  add_common(train_cmd, train_flags);

  std::string pa_list = "0.1,0.3,0.5,0.7,0.9,1.0";
  SweepOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "LF-accuracy sweep against the majority-vote baseline");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--pa-list", pa_list, "Comma-separated LF accuracies")->capture_default_str();
  sweep_cmd->add_option("--m", sweep_opts.n_lfs, "Synthetic LFs per level")->capture_default_str();
  sweep_cmd->add_option("--coverage", sweep_opts.coverage)->capture_default_str();

  auto* ablate_cmd = app.add_subcommand("ablate", "Loss-component ablation table");
  add_common(ablate_cmd, ablate_flags);

  CommonFlags tune_flags;
  std::string tau_list = "0.1,0.3,0.5,0.7,1.0", r_list = "10,25,50,100";
  auto* tune_cmd = app.add_subcommand("tune", "Grid search over tau and r scored on validation F1");
  add_common(tune_cmd, tune_flags);
  tune_cmd->add_option("--tau-list", tau_list, "Comma-separated temperatures")->capture_default_str();
  tune_cmd->add_option("--r-list", r_list, "Comma-separated negative counts")->capture_default_str();

  std::string checkpoint;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on every labelled node");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();

  std::vector<std::string> argv_store{"wsnet"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name() == "--help" && app.get_subcommands().size() == 1
                        ? std::string(app.get_subcommands().front()->get_name())
                        : std::string());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "wsnet: " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  try {
    if (*gen) {
      lf.seed = derive_seed(synth_seed, SeedTag::kSyntheticLfs);
      sbm.seed = derive_seed(synth_seed, SeedTag::kSbm);
      return cmd_gen_synth(sbm, lf, synth_out, out);
    }
    if (*train_cmd) return cmd_train(train_flags, out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, pa_list, sweep_opts, out);
    if (*ablate_cmd) return cmd_ablate(ablate_flags, out);
    if (*tune_cmd) return cmd_tune(tune_flags, tau_list, r_list, out);
    if (*eval_cmd) return cmd_eval(eval_flags, checkpoint, out);
  } catch (const ConfigError& e) {
    err << "wsnet: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const DivergenceError& e) {
    err << "wsnet: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "wsnet: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace wsnet
