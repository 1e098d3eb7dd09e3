#include "wsnet/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace wsnet {

namespace pt = boost::property_tree;

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

const char* to_string(TemperatureMode m) { return m == TemperatureMode::kInside ? "inside" : "typeset"; }

const char* to_string(EntropyMode m) {
  return m == EntropyMode::kEntropy ? "entropy" : "one_minus_normalized_entropy";
}

pt::ptree to_tree(const TrainConfig& c, bool include_runtime) {
  pt::ptree t;
  t.put("train.epochs", c.epochs);
  t.put("train.seed", c.seed);
  if (include_runtime) t.put("train.threads", c.threads);
  t.put("model.hidden", c.hidden);
  t.put("model.embedding", c.embedding);
  t.put("optimizer.lr", fmt_double(c.adam.lr));
  t.put("optimizer.beta1", fmt_double(c.adam.beta1));
  t.put("optimizer.beta2", fmt_double(c.adam.beta2));
  t.put("optimizer.eps", fmt_double(c.adam.eps));
  t.put("optimizer.weight_decay", fmt_double(c.adam.weight_decay));
  t.put("contrast.r", c.r);
  t.put("contrast.tau", fmt_double(c.tau));
  t.put("contrast.temperature", to_string(c.temperature));
  t.put("rho.cosine_shift", c.rho.cosine_shift);
  t.put("rho.entropy_mode", to_string(c.rho.entropy_mode));
  t.put("rho.uniform", c.rho.uniform);
  t.put("ablation.scon", c.ablation.scon);
  t.put("ablation.wlce", c.ablation.wlce);
  t.put("ablation.wlcon", c.ablation.wlcon);
  t.put("protocol.train_fraction", fmt_double(c.train_fraction));
  t.put("protocol.val_fraction", fmt_double(c.val_fraction));
  t.put("protocol.test_fraction", fmt_double(c.test_fraction));
  t.put("protocol.folds", c.n_folds);
  t.put("structure.kmeans_max_iter", c.kmeans_max_iter);
  t.put("structure.kmeans_tol", fmt_double(c.kmeans_tol));
  return t;
}

template <typename T>
T get(const pt::ptree& t, const std::string& key, T fallback) {
  // The defaulted overload swallows conversion failures; look up the raw
  // text and convert separately.
  if (!t.get_optional<std::string>(key)) return fallback;
  try {
    return t.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("config: cannot parse value of '" + key + "'");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  if (hidden < 1 || embedding < 1) throw ConfigError("config: hidden dimensions must be >= 1");
  if (!(adam.lr > 0.0)) throw ConfigError("config: lr must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("config: betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("config: eps must be positive");
  if (adam.weight_decay < 0.0) throw ConfigError("config: weight_decay must be non-negative");
  if (r < 1) throw ConfigError("config: r must be >= 1");
  if (!(tau > 0.0)) throw ConfigError("config: tau must be positive");
  if (!ablation.any()) throw ConfigError("config: at least one loss component must be enabled");
  if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction <= 0.0) {
    throw ConfigError("config: split fractions must be positive (validation may be zero)");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw ConfigError("config: split fractions must sum to 1");
  }
  if (n_folds < 1) throw ConfigError("config: folds must be >= 1");
  if (kmeans_max_iter < 1 || !(kmeans_tol >= 0.0)) throw ConfigError("config: invalid k-means settings");
}

std::string TrainConfig::canonical() const {
  std::set<std::string> lines;
  const pt::ptree t = to_tree(*this, false);
  for (const auto& [section, body] : t) {
    for (const auto& [key, value] : body) lines.insert(section + "." + key + "=" + value.data());
  }
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string TrainConfig::hash() const { return sha256_hex(canonical()).substr(0, 16); }

TrainConfig parse_config(std::istream& is) {
  pt::ptree t;
  try {
    pt::read_ini(is, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const pt::ptree known = to_tree(TrainConfig{}, true);
  for (const auto& [section, body] : t) {
    const auto sec = known.get_child_optional(section);
    if (!sec) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!sec->get_child_optional(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
  }

  TrainConfig c;
  c.epochs = get(t, "train.epochs", c.epochs);
  c.seed = get(t, "train.seed", c.seed);
  c.threads = get(t, "train.threads", c.threads);
  c.hidden = get(t, "model.hidden", c.hidden);
  c.embedding = get(t, "model.embedding", c.embedding);
  c.adam.lr = get(t, "optimizer.lr", c.adam.lr);
  c.adam.beta1 = get(t, "optimizer.beta1", c.adam.beta1);
  c.adam.beta2 = get(t, "optimizer.beta2", c.adam.beta2);
  c.adam.eps = get(t, "optimizer.eps", c.adam.eps);
  c.adam.weight_decay = get(t, "optimizer.weight_decay", c.adam.weight_decay);
  c.r = get(t, "contrast.r", c.r);
  c.tau = get(t, "contrast.tau", c.tau);
  const auto temperature = get<std::string>(t, "contrast.temperature", to_string(c.temperature));
  if (temperature == "inside") {
    c.temperature = TemperatureMode::kInside;
  } else if (temperature == "typeset") {
    c.temperature = TemperatureMode::kTypeset;
  } else {
    throw ConfigError("config: contrast.temperature must be inside or typeset");
  }
  c.rho.cosine_shift = get(t, "rho.cosine_shift", c.rho.cosine_shift);
  const auto entropy = get<std::string>(t, "rho.entropy_mode", to_string(c.rho.entropy_mode));
  if (entropy == "entropy") {
    c.rho.entropy_mode = EntropyMode::kEntropy;
  } else if (entropy == "one_minus_normalized_entropy") {
    c.rho.entropy_mode = EntropyMode::kOneMinusNormalizedEntropy;
  } else {
    throw ConfigError("config: rho.entropy_mode must be entropy or one_minus_normalized_entropy");
  }
  c.rho.uniform = get(t, "rho.uniform", c.rho.uniform);
  c.ablation.scon = get(t, "ablation.scon", c.ablation.scon);
  c.ablation.wlce = get(t, "ablation.wlce", c.ablation.wlce);
  c.ablation.wlcon = get(t, "ablation.wlcon", c.ablation.wlcon);
  c.train_fraction = get(t, "protocol.train_fraction", c.train_fraction);
  c.val_fraction = get(t, "protocol.val_fraction", c.val_fraction);
  c.test_fraction = get(t, "protocol.test_fraction", c.test_fraction);
  c.n_folds = get(t, "protocol.folds", c.n_folds);
  c.kmeans_max_iter = get(t, "structure.kmeans_max_iter", c.kmeans_max_iter);
  c.kmeans_tol = get(t, "structure.kmeans_tol", c.kmeans_tol);
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  return parse_config(is);
}

void write_config(std::ostream& os, const TrainConfig& cfg) {
  pt::write_ini(os, to_tree(cfg, true));
}

}  // namespace wsnet
