#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsnet/pipeline.hpp"

namespace wsnet {

nlohmann::json to_json(const ClassificationReport& r);
/// Metrics only: per-fold F1, mean/std, best epochs, per-class metrics.
nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const std::vector<AblationRow>& rows);
nlohmann::json to_json(const GridSearchReport& r);

/// `epoch,l_scon,l_wlce,l_wlcon,total,val_f1`
void write_loss_curve_csv(std::ostream& os, const std::vector<EpochLog>& curve);
/// `accuracy,mv_label_accuracy,wsnet_mean_f1,wsnet_std_f1,baseline_mean_f1,baseline_std_f1`
void write_sweep_csv(std::ostream& os, const SweepReport& r);
/// `config,scon,wlce,wlcon,mean_f1,std_f1`
void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows);
/// `tau,r,mean_val_f1,test_mean_f1,test_std_f1`
void write_grid_csv(std::ostream& os, const GridSearchReport& r);

/// Adds config hash and dataset hashes under "provenance".
nlohmann::json with_provenance(nlohmann::json body, const TrainConfig& cfg,
                               const std::map<std::string, std::string>& dataset_hashes);

}  // namespace wsnet
