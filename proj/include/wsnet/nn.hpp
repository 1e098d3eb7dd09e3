#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wsnet/autodiff.hpp"
#include "wsnet/graph.hpp"

namespace wsnet {

struct EncoderDims {
  Index input = 0;
  Index hidden = 128;
  Index embedding = 64;
  Index classes = 2;
};

/// Two graph-convolution layers followed by a linear classifier head.
/// Biases are stored as 1 x n rows.
struct EncoderParams {
  Matrix w1, b1;
  Matrix w2, b2;
  Matrix wc, bc;

  /// Xavier-uniform weights, zero biases.
  static EncoderParams xavier(const EncoderDims& dims, std::uint64_t seed);

  EncoderDims dims() const { return {w1.rows(), w1.cols(), w2.cols(), wc.cols()}; }
  std::vector<Matrix*> tensors() { return {&w1, &b1, &w2, &b2, &wc, &bc}; }
  std::vector<const Matrix*> tensors() const { return {&w1, &b1, &w2, &b2, &wc, &bc}; }
  static const std::vector<std::string>& names();
  /// Throws on non-finite entries or inconsistent shapes.
  void validate() const;
};

/// EncoderParams registered on a tape.
struct EncoderVars {
  ad::Var w1, b1, w2, b2, wc, bc;

  std::vector<ad::Var> all() const { return {w1, b1, w2, b2, wc, bc}; }
};

EncoderVars attach(ad::Tape& tape, const EncoderParams& params, bool requires_grad = true);

/// H = Â ReLU(Â X W1 + b1) W2 + b2
ad::Var encode(const NormalizedAdjacency<double>& adj, const ad::Var& features, const EncoderVars& p);
/// Logits H Wc + bc.
ad::Var classify_logits(const ad::Var& h, const EncoderVars& p);
/// Row-wise softmax of the logits, max-subtracted.
ad::Var classify(const ad::Var& h, const EncoderVars& p);

/// Forward-only helpers.
Matrix embed(const NormalizedAdjacency<double>& adj, const Matrix& features, const EncoderParams& params);
Matrix predict_proba(const NormalizedAdjacency<double>& adj, const Matrix& features,
                     const EncoderParams& params);
Eigen::VectorXi predict_labels(const NormalizedAdjacency<double>& adj, const Matrix& features,
                               const EncoderParams& params);

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
};

struct OptimizerState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  long step = 0;
};

/// Adam with L2 weight decay folded into the gradient.
class Adam {
 public:
  Adam(AdamConfig config, std::span<const Matrix* const> params);
  explicit Adam(OptimizerState state) : state_(std::move(state)) {}

  /// One update of every parameter from its gradient. Caller zeroes grads.
  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);
  const OptimizerState& state() const { return state_; }

 private:
  OptimizerState state_;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Entries per tensor checked; larger tensors are sampled.
  Index max_entries_per_tensor = 64;
  std::uint64_t seed = 0;
  /// Relative error denominator floor, guards entries whose gradient is ~0.
  double denominator_floor = 1e-6;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  Index n_checked = 0;
  std::size_t worst_tensor = 0;
  Index worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = false;
};

/// Builds a scalar loss from parameter vars. Must be deterministic: any
/// discrete selection it depends on has to be computed outside and captured.
using LossBuilder = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;

/// Central-difference check of reverse-mode gradients, relative error
/// |a - n| / max(|a|, |n|, floor).
GradCheckReport grad_check(const LossBuilder& loss_fn, std::vector<Matrix> params,
                           const GradCheckOptions& options = {});

}  // namespace wsnet
