#include "wsnet/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace wsnet {

using nlohmann::json;

json to_json(const ClassificationReport& r) {
  json classes = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    classes.push_back({{"class", c}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}});
  }
  json confusion = json::array();
  for (Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
    confusion.push_back(std::move(row));
  }
  return {{"weighted_f1", r.weighted_f1}, {"accuracy", r.accuracy}, {"total", r.total},
          {"per_class", std::move(classes)}, {"confusion", std::move(confusion)}};
}

json to_json(const RunReport& r) {
  json folds = json::array();
  for (const auto& fr : r.fold_reports) folds.push_back(to_json(fr));
  return {{"label", r.label},           {"config_hash", r.config_hash}, {"fold_f1", r.fold_f1},
          {"mean_f1", r.mean_f1},       {"std_f1", r.std_f1},           {"best_epochs", r.best_epochs},
          {"fold_reports", std::move(folds)}, {"wall_seconds", r.wall_seconds}};
}

json to_json(const SweepReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"accuracy", row.accuracy},
                    {"mv_label_accuracy", row.mv_label_accuracy},
                    {"wsnet", to_json(row.wsnet)},
                    {"baseline", to_json(row.baseline)}});
  }
  return {{"rows", std::move(rows)}, {"spearman_wsnet", r.spearman_wsnet}};
}

json to_json(const std::vector<AblationRow>& rows) {
  json table = json::array();
  for (const auto& row : rows) {
    table.push_back({{"config", row.flags.label()},
                   {"scon", row.flags.scon},
                   {"wlce", row.flags.wlce},
                   {"wlcon", row.flags.wlcon},
                   {"report", to_json(row.report)}});
  }
  return {{"rows", std::move(table)}};
}

json to_json(const GridSearchReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"tau", p.tau}, {"r", p.r}, {"mean_val_f1", p.mean_val_f1}, {"report", to_json(p.report)}});
  }
  const auto& best = r.points.at(r.best);
  return {{"points", std::move(points)}, {"best", {{"tau", best.tau}, {"r", best.r}}}};
}

void write_loss_curve_csv(std::ostream& os, const std::vector<EpochLog>& curve) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "epoch,l_scon,l_wlce,l_wlcon,total,val_f1\n";
  for (const auto& e : curve) {
    buf << e.epoch << ',' << e.loss.l_scon << ',' << e.loss.l_wlce << ',' << e.loss.l_wlcon << ',' << e.loss.total
        << ',';
    if (!std::isnan(e.val_f1)) buf << e.val_f1;
    buf << '\n';
  }
  os << buf.str();
}

void write_sweep_csv(std::ostream& os, const SweepReport& r) {
  std::ostringstream buf;
  buf << std::setprecision(10);
  buf << "accuracy,mv_label_accuracy,wsnet_mean_f1,wsnet_std_f1,baseline_mean_f1,baseline_std_f1\n";
  for (const auto& row : r.rows) {
    buf << row.accuracy << ',' << row.mv_label_accuracy << ',' << row.wsnet.mean_f1 << ',' << row.wsnet.std_f1 << ','
        << row.baseline.mean_f1 << ',' << row.baseline.std_f1 << '\n';
  }
  os << buf.str();
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  std::ostringstream buf;
  buf << std::setprecision(10);
  buf << "config,scon,wlce,wlcon,mean_f1,std_f1\n";
  for (const auto& row : rows) {
    buf << row.flags.label() << ',' << row.flags.scon << ',' << row.flags.wlce << ',' << row.flags.wlcon << ','
        << row.report.mean_f1 << ',' << row.report.std_f1 << '\n';
  }
  os << buf.str();
}

void write_grid_csv(std::ostream& os, const GridSearchReport& r) {
  std::ostringstream buf;
  buf << std::setprecision(10);
  buf << "tau,r,mean_val_f1,test_mean_f1,test_std_f1\n";
  for (const auto& p : r.points) {
    buf << p.tau << ',' << p.r << ',' << p.mean_val_f1 << ',' << p.report.mean_f1 << ',' << p.report.std_f1 << '\n';
  }
  os << buf.str();
}

json with_provenance(json body, const TrainConfig& cfg, const std::map<std::string, std::string>& dataset_hashes) {
  body["provenance"] = {{"config_hash", cfg.hash()}, {"dataset_hashes", dataset_hashes}};
  return body;
}

}  // namespace wsnet
