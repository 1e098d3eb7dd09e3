#pragma once

#include <cstdint>

#include "wsnet/graph.hpp"
#include "wsnet/weak_labels.hpp"

namespace wsnet {

/// Planted-partition benchmark: equal contiguous blocks, features are the
/// one-hot class indicator plus isotropic Gaussian noise.
struct SbmConfig {
  Index n_nodes = 300;
  int n_classes = 3;
  double p_in = 0.10;
  double p_out = 0.01;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticGraph {
  Graph graph;
  LabelVector labels;
};

SyntheticGraph generate_sbm(const SbmConfig& cfg);

}  // namespace wsnet
