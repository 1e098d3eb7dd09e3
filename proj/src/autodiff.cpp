#include "wsnet/autodiff.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace wsnet::ad {

namespace {

std::atomic<std::uint64_t> g_generation{1};

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_tape(const Var& a, const Var& b, const char* op) {
  if (&a.tape() != &b.tape()) throw InvalidArgument(std::string(op) + ": operands on different tapes");
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  require_same_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + shape(a.value()) + " vs " +
                          shape(b.value()));
  }
}

double log_sigmoid_scalar(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix row_softmax(const Matrix& a) {
  Matrix out = a.colwise() - a.rowwise().maxCoeff();
  out = out.array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Var

const Matrix& Var::value() const { return tape().value_of(*this); }

const Matrix& Var::grad() const { return tape().node(*this).grad; }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw InvalidArgument("Var::scalar: value is " + shape(v));
  return v(0, 0);
}

bool Var::requires_grad() const { return tape().needs_grad(*this); }

bool Var::valid() const { return tape_ != nullptr && tape_->generation_ == generation_ && id_ < tape_->nodes_.size(); }

Tape& Var::tape() const {
  if (tape_ == nullptr) throw InvalidArgument("Var: not attached to a tape");
  if (tape_->generation_ != generation_) throw InvalidArgument("Var: graph already freed");
  return *tape_;
}

// ---------------------------------------------------------------- Tape

Tape::Tape() : generation_(g_generation.fetch_add(1)) {}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr, "constant"); }

Var Tape::parameter(Matrix value) {
  Var v = record(std::move(value), true, nullptr, "parameter");
  Node& n = nodes_[v.id_];
  n.leaf = true;
  n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return v;
}

Var Tape::record(Matrix value, bool requires_grad, Backprop backprop, const char* op) {
  if (in_backward_) throw InvalidArgument("Tape: cannot record during backward");
  if (!value.allFinite()) throw NonFiniteError(std::string(op) + ": non-finite value");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.leaf = backprop == nullptr;
  n.backprop = requires_grad ? std::move(backprop) : nullptr;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1, generation_);
}

const Tape::Node& Tape::node(const Var& v) const {
  if (v.tape_ != this) throw InvalidArgument("Tape: variable belongs to another tape");
  if (v.generation_ != generation_) throw InvalidArgument("Tape: graph already freed");
  return nodes_[v.id_];
}

const Matrix& Tape::value_of(const Var& v) const { return node(v).value; }

bool Tape::needs_grad(const Var& v) const { return node(v).requires_grad; }

void Tape::accumulate(const Var& target, const Matrix& delta) {
  const Node& n = node(target);
  if (!n.requires_grad) return;
  Matrix& adj = adjoints_[target.id_];
  if (adj.size() == 0) {
    adj = delta;
  } else {
    adj += delta;
  }
}

void Tape::backward(const Var& loss) {
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    throw InvalidArgument("backward: loss must be a scalar, got " + shape(root.value));
  }
  if (!root.requires_grad) return;
  adjoints_.assign(loss.id_ + 1, Matrix());
  adjoints_[loss.id_] = Matrix::Ones(1, 1);
  in_backward_ = true;
  try {
    for (std::size_t id = loss.id_ + 1; id-- > 0;) {
      if (adjoints_[id].size() == 0) continue;
      Node& n = nodes_[id];
      if (n.leaf) {
        n.grad += adjoints_[id];
      } else if (n.backprop) {
        n.backprop(*this, adjoints_[id]);
      }
      adjoints_[id] = Matrix();
    }
  } catch (...) {
    in_backward_ = false;
    adjoints_.clear();
    throw;
  }
  in_backward_ = false;
  adjoints_.clear();
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    if (n.leaf && n.requires_grad) n.grad.setZero();
  }
}

void Tape::clear() {
  nodes_.clear();
  adjoints_.clear();
  generation_ = g_generation.fetch_add(1);
}

// ---------------------------------------------------------------- ops

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: inner dimensions differ " + shape(a.value()) + " * " + shape(b.value()));
  }
  Tape& t = a.tape();
  Matrix out = a.value() * b.value();
  return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Tape& t, const Matrix& g) {
                    if (t.needs_grad(a)) t.accumulate(a, g * t.value_of(b).transpose());
                    if (t.needs_grad(b)) t.accumulate(b, t.value_of(a).transpose() * g);
                  },
                  "matmul");
}

Var spmm(std::shared_ptr<const SparseMatrix> s, const Var& x) {
  if (!s) throw InvalidArgument("spmm: null sparse matrix");
  if (s->cols() != x.rows()) {
    throw InvalidArgument("spmm: sparse " + std::to_string(s->rows()) + "x" + std::to_string(s->cols()) +
                          " times " + shape(x.value()));
  }
  Tape& t = x.tape();
  Matrix out = (*s) * x.value();
  return t.record(std::move(out), x.requires_grad(),
                  [s, x](Tape& t, const Matrix& g) { t.accumulate(x, s->transpose() * g); }, "spmm");
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tape& t = a.tape();
  return t.record(a.value() + b.value(), a.requires_grad() || b.requires_grad(),
                  [a, b](Tape& t, const Matrix& g) {
                    t.accumulate(a, g);
                    t.accumulate(b, g);
                  },
                  "add");
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tape& t = a.tape();
  return t.record(a.value() - b.value(), a.requires_grad() || b.requires_grad(),
                  [a, b](Tape& t, const Matrix& g) {
                    t.accumulate(a, g);
                    if (t.needs_grad(b)) t.accumulate(b, -g);
                  },
                  "sub");
}

Var add_row(const Var& a, const Var& row) {
  require_same_tape(a, row, "add_row");
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw InvalidArgument("add_row: row " + shape(row.value()) + " does not broadcast over " + shape(a.value()));
  }
  Tape& t = a.tape();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), a.requires_grad() || row.requires_grad(),
                  [a, row](Tape& t, const Matrix& g) {
                    t.accumulate(a, g);
                    if (t.needs_grad(row)) t.accumulate(row, g.colwise().sum());
                  },
                  "add_row");
}

Var scale(const Var& a, double factor) {
  Tape& t = a.tape();
  return t.record(a.value() * factor, a.requires_grad(),
                  [a, factor](Tape& t, const Matrix& g) { t.accumulate(a, g * factor); }, "scale");
}

Var relu(const Var& a) {
  Tape& t = a.tape();
  return t.record(a.value().cwiseMax(0.0), a.requires_grad(),
                  [a](Tape& t, const Matrix& g) {
                    t.accumulate(a, (t.value_of(a).array() > 0.0).select(g, 0.0).matrix());
                  },
                  "relu");
}

Var exp(const Var& a) {
  Tape& t = a.tape();
  Matrix out = a.value().array().exp().matrix();
  return t.record(out, a.requires_grad(),
                  [a, out](Tape& t, const Matrix& g) { t.accumulate(a, g.cwiseProduct(out)); }, "exp");
}

Var log(const Var& a) {
  Tape& t = a.tape();
  return t.record(a.value().array().log().matrix(), a.requires_grad(),
                  [a](Tape& t, const Matrix& g) { t.accumulate(a, g.cwiseQuotient(t.value_of(a))); },
                  "log");
}

Var sigmoid(const Var& a) {
  Tape& t = a.tape();
  Matrix out = a.value().unaryExpr(&sigmoid_scalar);
  return t.record(out, a.requires_grad(),
                  [a, out](Tape& t, const Matrix& g) {
                    t.accumulate(a, (g.array() * out.array() * (1.0 - out.array())).matrix());
                  },
                  "sigmoid");
}

Var log_sigmoid(const Var& a) {
  Tape& t = a.tape();
  return t.record(a.value().unaryExpr(&log_sigmoid_scalar), a.requires_grad(),
                  [a](Tape& t, const Matrix& g) {
                    // d/dx log sigmoid(x) = sigmoid(-x)
                    const Matrix s = (-t.value_of(a)).unaryExpr(&sigmoid_scalar);
                    t.accumulate(a, g.cwiseProduct(s));
                  },
                  "log_sigmoid");
}

Var softmax_rows(const Var& a) {
  Tape& t = a.tape();
  Matrix out = row_softmax(a.value());
  return t.record(out, a.requires_grad(),
                  [a, out](Tape& t, const Matrix& g) {
                    const Vector inner = g.cwiseProduct(out).rowwise().sum();
                    t.accumulate(a, (out.array() * (g.colwise() - inner).array()).matrix());
                  },
                  "softmax_rows");
}

Var log_softmax_rows(const Var& a) {
  Tape& t = a.tape();
  const Matrix& x = a.value();
  const Vector mx = x.rowwise().maxCoeff();
  const Matrix shifted = x.colwise() - mx;
  const Vector lse = shifted.array().exp().rowwise().sum().log().matrix();
  Matrix out = shifted.colwise() - lse;
  return t.record(out, a.requires_grad(),
                  [a, out](Tape& t, const Matrix& g) {
                    const Matrix p = out.array().exp().matrix();
                    const Vector gsum = g.rowwise().sum();
                    t.accumulate(a, g - (p.array().colwise() * gsum.array()).matrix());
                  },
                  "log_softmax_rows");
}

Var clamp_min(const Var& a, double lo) {
  Tape& t = a.tape();
  return t.record(a.value().cwiseMax(lo), a.requires_grad(),
                  [a, lo](Tape& t, const Matrix& g) {
                    t.accumulate(a, (t.value_of(a).array() > lo).select(g, 0.0).matrix());
                  },
                  "clamp_min");
}

Var sum(const Var& a) {
  Tape& t = a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), a.requires_grad(),
                  [a](Tape& t, const Matrix& g) {
                    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
                  },
                  "sum");
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw InvalidArgument("mean: empty operand");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var dot(const Var& a, const Var& b) {
  require_same_shape(a, b, "dot");
  Tape& t = a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().cwiseProduct(b.value()).sum();
  return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Tape& t, const Matrix& g) {
                    if (t.needs_grad(a)) t.accumulate(a, g(0, 0) * t.value_of(b));
                    if (t.needs_grad(b)) t.accumulate(b, g(0, 0) * t.value_of(a));
                  },
                  "dot");
}

Var row_dot(const Var& a, const Var& b) {
  require_same_shape(a, b, "row_dot");
  Tape& t = a.tape();
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Tape& t, const Matrix& g) {
                    if (t.needs_grad(a)) t.accumulate(a, (t.value_of(b).array().colwise() * g.col(0).array()).matrix());
                    if (t.needs_grad(b)) t.accumulate(b, (t.value_of(a).array().colwise() * g.col(0).array()).matrix());
                  },
                  "row_dot");
}

Var gather_rows(const Var& a, std::span<const Index> rows) {
  Tape& t = a.tape();
  const Matrix& x = a.value();
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= x.rows()) throw InvalidArgument("gather_rows: index out of range");
    out.row(static_cast<Index>(k)) = x.row(rows[k]);
  }
  IndexList idx(rows.begin(), rows.end());
  return t.record(std::move(out), a.requires_grad(),
                  [a, idx = std::move(idx)](Tape& t, const Matrix& g) {
                    Matrix d = Matrix::Zero(a.rows(), a.cols());
                    for (std::size_t k = 0; k < idx.size(); ++k) d.row(idx[k]) += g.row(static_cast<Index>(k));
                    t.accumulate(a, d);
                  },
                  "gather_rows");
}

Var gather_elements(const Var& a, std::span<const Index> rows, std::span<const Index> cols) {
  if (rows.size() != cols.size()) throw InvalidArgument("gather_elements: index lists differ in length");
  Tape& t = a.tape();
  const Matrix& x = a.value();
  Matrix out(static_cast<Index>(rows.size()), 1);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= x.rows() || cols[k] < 0 || cols[k] >= x.cols()) {
      throw InvalidArgument("gather_elements: index out of range");
    }
    out(static_cast<Index>(k), 0) = x(rows[k], cols[k]);
  }
  IndexList r(rows.begin(), rows.end());
  IndexList c(cols.begin(), cols.end());
  return t.record(std::move(out), a.requires_grad(),
                  [a, r = std::move(r), c = std::move(c)](Tape& t, const Matrix& g) {
                    Matrix d = Matrix::Zero(a.rows(), a.cols());
                    for (std::size_t k = 0; k < r.size(); ++k) d(r[k], c[k]) += g(static_cast<Index>(k), 0);
                    t.accumulate(a, d);
                  },
                  "gather_elements");
}

Var segment_logsumexp(const Var& v, std::span<const Index> offsets) {
  if (v.cols() != 1) throw InvalidArgument("segment_logsumexp: operand must be a column vector");
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != v.rows()) {
    throw InvalidArgument("segment_logsumexp: offsets must run from 0 to the vector length");
  }
  Tape& t = v.tape();
  const Matrix& x = v.value();
  const auto n_seg = static_cast<Index>(offsets.size() - 1);
  Matrix out(n_seg, 1);
  for (Index s = 0; s < n_seg; ++s) {
    const Index lo = offsets[static_cast<std::size_t>(s)];
    const Index len = offsets[static_cast<std::size_t>(s) + 1] - lo;
    if (len <= 0) throw InvalidArgument("segment_logsumexp: empty segment");
    const auto seg = x.col(0).segment(lo, len);
    const double mx = seg.maxCoeff();
    out(s, 0) = mx + std::log((seg.array() - mx).exp().sum());
  }
  IndexList off(offsets.begin(), offsets.end());
  return t.record(out, v.requires_grad(),
                  [v, out, off = std::move(off)](Tape& t, const Matrix& g) {
                    const Matrix& x = t.value_of(v);
                    Matrix d(x.rows(), 1);
                    for (std::size_t s = 0; s + 1 < off.size(); ++s) {
                      const Index lo = off[s];
                      const Index len = off[s + 1] - lo;
                      const auto si = static_cast<Index>(s);
                      d.col(0).segment(lo, len) =
                          g(si, 0) * (x.col(0).segment(lo, len).array() - out(si, 0)).exp().matrix();
                    }
                    t.accumulate(v, d);
                  },
                  "segment_logsumexp");
}

}  // namespace wsnet::ad
