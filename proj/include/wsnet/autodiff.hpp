#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "wsnet/common.hpp"

/// Dense reverse-mode differentiation over Eigen matrices.
///
/// A Tape records every operation of one forward pass as a node holding its
/// value and a closure that pushes an upstream adjoint to its parents.
/// Parameters are leaves with requires_grad; their `grad()` accumulates
/// across backward() calls until zero_grad(). Vectors are column matrices,
/// scalars are 1x1.
namespace wsnet::ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Accumulated gradient of a leaf. Zero-sized until the first backward().
  const Matrix& grad() const;
  double scalar() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const;
  bool valid() const;
  Tape& tape() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id, std::uint64_t generation)
      : tape_(tape), id_(id), generation_(generation) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
  std::uint64_t generation_ = 0;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Matrix& upstream)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Matrix value);

  /// Reverse sweep from a 1x1 `loss`; adds into every reachable leaf grad.
  void backward(const Var& loss);
  void zero_grad();
  /// Frees every node. Vars created before the call become invalid.
  void clear();
  std::size_t size() const { return nodes_.size(); }

  // Op-author interface.
  Var record(Matrix value, bool requires_grad, Backprop backprop, const char* op);
  const Matrix& value_of(const Var& v) const;
  bool needs_grad(const Var& v) const;
  void accumulate(const Var& target, const Matrix& delta);

 private:
  friend class Var;
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool leaf = false;
    Backprop backprop;
  };
  const Node& node(const Var& v) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
  std::uint64_t generation_;
  bool in_backward_ = false;
};

Var matmul(const Var& a, const Var& b);
/// S * x with a constant sparse S.
Var spmm(std::shared_ptr<const SparseMatrix> s, const Var& x);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// a + 1 * row, broadcasting a 1 x cols row over every row of a.
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double factor);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
/// log(sigmoid(a)), evaluated without overflow.
Var log_sigmoid(const Var& a);
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
/// max(a, lo) elementwise; zero gradient where clamped.
Var clamp_min(const Var& a, double lo);
Var sum(const Var& a);
Var mean(const Var& a);
/// Frobenius inner product, 1x1.
Var dot(const Var& a, const Var& b);
/// Column vector of row-wise inner products.
Var row_dot(const Var& a, const Var& b);
Var gather_rows(const Var& a, std::span<const Index> rows);
/// Column vector [a(rows[k], cols[k])]_k.
Var gather_elements(const Var& a, std::span<const Index> rows, std::span<const Index> cols);
/// Per-segment log-sum-exp of a column vector; segment s spans
/// [offsets[s], offsets[s+1]).
Var segment_logsumexp(const Var& v, std::span<const Index> offsets);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

}  // namespace wsnet::ad
