#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "wsnet/losses.hpp"
#include "wsnet/nn.hpp"

namespace wsnet {

/// Every tunable of one experiment. Serialised as an INI-style file:
///
///   [train]     epochs, seed, threads
///   [model]     hidden, embedding
///   [optimizer] lr, beta1, beta2, eps, weight_decay
///   [contrast]  r, tau, temperature = inside | typeset
///   [rho]       cosine_shift, entropy_mode = entropy | one_minus_normalized_entropy, uniform
///   [ablation]  scon, wlce, wlcon
///   [protocol]  train_fraction, val_fraction, test_fraction, folds
///   [structure] kmeans_max_iter, kmeans_tol
struct TrainConfig {
  int epochs = 200;
  std::uint64_t seed = 0;
  int threads = 1;

  Index hidden = 128;
  Index embedding = 64;

  AdamConfig adam;

  Index r = 50;
  double tau = 0.5;
  TemperatureMode temperature = TemperatureMode::kInside;

  RhoOptions rho;
  AblationFlags ablation;

  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  int n_folds = 5;

  int kmeans_max_iter = 100;
  double kmeans_tol = 1e-6;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
  /// Sorted `section.key=value` lines; excludes fields that cannot change results.
  std::string canonical() const;
  /// First 16 hex digits of SHA-256 over canonical().
  std::string hash() const;
};

TrainConfig parse_config(std::istream& is);
TrainConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& os, const TrainConfig& cfg);

}  // namespace wsnet
