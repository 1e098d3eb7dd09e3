#include "wsnet/nn.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace wsnet {

namespace {

Matrix xavier_uniform(Index fan_in, Index fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix w(fan_in, fan_out);
  for (Index j = 0; j < w.cols(); ++j) {
    for (Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
  }
  return w;
}

}  // namespace

EncoderParams EncoderParams::xavier(const EncoderDims& dims, std::uint64_t seed) {
  if (dims.input < 1 || dims.hidden < 1 || dims.embedding < 1 || dims.classes < 2) {
    throw InvalidArgument("EncoderParams: invalid dimensions");
  }
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.w1 = xavier_uniform(dims.input, dims.hidden, rng);
  p.b1 = Matrix::Zero(1, dims.hidden);
  p.w2 = xavier_uniform(dims.hidden, dims.embedding, rng);
  p.b2 = Matrix::Zero(1, dims.embedding);
  p.wc = xavier_uniform(dims.embedding, dims.classes, rng);
  p.bc = Matrix::Zero(1, dims.classes);
  return p;
}

const std::vector<std::string>& EncoderParams::names() {
  static const std::vector<std::string> kNames{"w1", "b1", "w2", "b2", "wc", "bc"};
  return kNames;
}

void EncoderParams::validate() const {
  const bool ok = b1.rows() == 1 && b1.cols() == w1.cols() && w2.rows() == w1.cols() && b2.rows() == 1 &&
                  b2.cols() == w2.cols() && wc.rows() == w2.cols() && bc.rows() == 1 && bc.cols() == wc.cols();
  if (!ok) throw InvalidArgument("EncoderParams: inconsistent shapes");
  for (const Matrix* m : tensors()) {
    if (!m->allFinite()) throw NonFiniteError("EncoderParams: non-finite entry");
  }
}

EncoderVars attach(ad::Tape& tape, const EncoderParams& params, bool requires_grad) {
  auto reg = [&](const Matrix& m) { return requires_grad ? tape.parameter(m) : tape.constant(m); };
  return {reg(params.w1), reg(params.b1), reg(params.w2), reg(params.b2), reg(params.wc), reg(params.bc)};
}

ad::Var encode(const NormalizedAdjacency<double>& adj, const ad::Var& features, const EncoderVars& p) {
  if (features.cols() != p.w1.rows()) {
    throw InvalidArgument("encode: features have " + std::to_string(features.cols()) + " columns, W1 expects " +
                          std::to_string(p.w1.rows()));
  }
  ad::Var h1 = ad::relu(ad::add_row(ad::spmm(adj.matrix, ad::matmul(features, p.w1)), p.b1));
  return ad::add_row(ad::spmm(adj.matrix, ad::matmul(h1, p.w2)), p.b2);
}

ad::Var classify_logits(const ad::Var& h, const EncoderVars& p) {
  return ad::add_row(ad::matmul(h, p.wc), p.bc);
}

ad::Var classify(const ad::Var& h, const EncoderVars& p) { return ad::softmax_rows(classify_logits(h, p)); }

Matrix embed(const NormalizedAdjacency<double>& adj, const Matrix& features, const EncoderParams& params) {
  ad::Tape tape;
  const EncoderVars vars = attach(tape, params, false);
  return encode(adj, tape.constant(features), vars).value();
}

Matrix predict_proba(const NormalizedAdjacency<double>& adj, const Matrix& features,
                     const EncoderParams& params) {
  ad::Tape tape;
  const EncoderVars vars = attach(tape, params, false);
  return classify(encode(adj, tape.constant(features), vars), vars).value();
}

Eigen::VectorXi predict_labels(const NormalizedAdjacency<double>& adj, const Matrix& features,
                               const EncoderParams& params) {
  const Matrix proba = predict_proba(adj, features, params);
  Eigen::VectorXi out(proba.rows());
  for (Index i = 0; i < proba.rows(); ++i) {
    Index best = 0;
    proba.row(i).maxCoeff(&best);
    out[i] = static_cast<int>(best);
  }
  return out;
}

Adam::Adam(AdamConfig config, std::span<const Matrix* const> params) {
  state_.config = config;
  for (const Matrix* p : params) {
    state_.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    state_.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != state_.first_moment.size() || grads.size() != params.size()) {
    throw InvalidArgument("Adam::step: parameter count does not match optimizer state");
  }
  const AdamConfig& c = state_.config;
  ++state_.step;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state_.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state_.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    const Matrix& g_raw = *grads[k];
    if (g_raw.rows() != p.rows() || g_raw.cols() != p.cols()) {
      throw InvalidArgument("Adam::step: missing or misshapen gradient for parameter " + std::to_string(k));
    }
    const Matrix g = g_raw + c.weight_decay * p;
    Matrix& m = state_.first_moment[k];
    Matrix& v = state_.second_moment[k];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.eps);
  }
}

GradCheckReport grad_check(const LossBuilder& loss_fn, std::vector<Matrix> params,
                           const GradCheckOptions& options) {
  auto evaluate = [&](bool with_grad, std::vector<Matrix>* grads) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    vars.reserve(params.size());
    for (const Matrix& p : params) vars.push_back(with_grad ? tape.parameter(p) : tape.constant(p));
    ad::Var loss = loss_fn(tape, vars);
    if (with_grad) {
      tape.backward(loss);
      for (const ad::Var& v : vars) grads->push_back(v.grad());
    }
    return loss.scalar();
  };

  std::vector<Matrix> analytic;
  evaluate(true, &analytic);

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (std::size_t t = 0; t < params.size(); ++t) {
    const Index size = params[t].size();
    IndexList entries(static_cast<std::size_t>(size));
    std::iota(entries.begin(), entries.end(), Index{0});
    if (size > options.max_entries_per_tensor) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(static_cast<std::size_t>(options.max_entries_per_tensor));
    }
    for (Index e : entries) {
      double& x = params[t].data()[e];
      const double saved = x;
      x = saved + options.step;
      const double plus = evaluate(false, nullptr);
      x = saved - options.step;
      const double minus = evaluate(false, nullptr);
      x = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[t].data()[e];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.n_checked;
      if (rel > report.max_rel_error || report.n_checked == 1) {
        report.max_rel_error = rel;
        report.worst_tensor = t;
        report.worst_entry = e;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace wsnet
