#include "wsnet/synthetic.hpp"

#include <random>

namespace wsnet {

SyntheticGraph generate_sbm(const SbmConfig& cfg) {
  if (cfg.n_nodes < 1) throw InvalidArgument("generate_sbm: need at least one node");
  if (cfg.n_classes < 2 || cfg.n_classes > cfg.n_nodes) {
    throw InvalidArgument("generate_sbm: class count must lie in [2, n_nodes]");
  }
  if (cfg.p_in < 0.0 || cfg.p_in > 1.0 || cfg.p_out < 0.0 || cfg.p_out > 1.0) {
    throw InvalidArgument("generate_sbm: edge probabilities must lie in [0, 1]");
  }
  if (cfg.feature_noise < 0.0) throw InvalidArgument("generate_sbm: feature noise must be non-negative");

  const Index n = cfg.n_nodes;
  LabelVector labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i * cfg.n_classes / n);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? cfg.p_in : cfg.p_out;
      if (unit(rng) < p) edges.emplace_back(u, v);
    }
  }

  std::normal_distribution<double> noise(0.0, cfg.feature_noise);
  Matrix x(n, cfg.n_classes);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < cfg.n_classes; ++c) {
      const double z = cfg.feature_noise > 0.0 ? noise(rng) : 0.0;
      x(i, c) = (labels[i] == c ? 1.0 : 0.0) + z;
    }
  }
  return {build_graph<double>(edges, std::move(x)), std::move(labels)};
}

}  // namespace wsnet
