#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "toy.hpp"
#include "wsnet/losses.hpp"

using namespace wsnet;
namespace ad = wsnet::ad;

namespace {

WeakLabelMatrix wlm_from(const oracle::Votes& rows, int c) {
  VoteMatrix v(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) v(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return WeakLabelMatrix(v, c);
}

RhoWeights ones(Index n) {
  RhoWeights r;
  r.rho = Vector::Ones(n);
  return r;
}

}  // namespace

TEST_CASE("rho: identical embeddings and votes give the entropy term") {
  const auto w = wlm_from({{0, 1, 0}, {0, 1, 0}, {0, 1, 0}, {0, 1, 0}}, 2);
  const Matrix h = Matrix::Constant(4, 3, 0.5);
  const Partition one = canonicalize({0, 0, 0, 0}, PartitionKind::kCluster);
  RhoOptions raw;
  raw.entropy_mode = EntropyMode::kEntropy;
  const auto r = compute_rho(h, one, w, raw);
  const double e = oracle::entropy({0, 1, 0}, 2);
  for (Index i = 0; i < 4; ++i) CHECK(r.rho[i] == doctest::Approx(e).epsilon(1e-14));
  const auto r2 = compute_rho(h, one, w);
  for (Index i = 0; i < 4; ++i) CHECK(r2.rho[i] == doctest::Approx(1.0 - e / std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("rho: all-abstain nodes get zero") {
  const auto w = wlm_from({{0, 0}, {-1, -1}}, 2);
  const auto r = compute_rho(Matrix::Random(2, 2), canonicalize({0, 0}, PartitionKind::kCluster), w);
  CHECK(r.rho[1] == 0.0);
}

TEST_CASE("rho: four-node two-cluster instance matches the scalar oracle") {
  const oracle::Votes rows{{0, 0, 1}, {0, 0, 0}, {1, -1, 1}, {1, 0, -1}};
  const auto w = wlm_from(rows, 2);
  Matrix h(4, 2);
  h << 1.0, 0.2, 0.8, -0.3, -0.5, 1.0, -0.9, 0.4;
  const std::vector<long> cl{0, 0, 1, 1};
  const Partition part = canonicalize({0, 0, 1, 1}, PartitionKind::kCluster);
  for (bool shift : {true, false}) {
    for (EntropyMode mode : {EntropyMode::kEntropy, EntropyMode::kOneMinusNormalizedEntropy}) {
      RhoOptions o;
      o.cosine_shift = shift;
      o.entropy_mode = mode;
      const auto got = compute_rho(h, part, w, o);
      const auto want = oracle::rho(h, cl, rows, 2, shift, mode == EntropyMode::kOneMinusNormalizedEntropy);
      for (Index i = 0; i < 4; ++i) CHECK(std::abs(got.rho[i] - want[static_cast<std::size_t>(i)]) < 1e-12);
    }
  }
}

TEST_CASE("rho: zero embeddings fall back to a uniform ratio") {
  set_warnings_enabled(false);
  const auto w = wlm_from({{0, 0}, {1, 1}}, 2);
  RhoOptions o;
  o.cosine_shift = false;
  const auto r = compute_rho(Matrix::Zero(2, 2), canonicalize({0, 0}, PartitionKind::kCluster), w, o);
  set_warnings_enabled(true);
  CHECK(r.degenerate);
  CHECK(r.rho.allFinite());
}

TEST_CASE("wlce hand values") {
  const auto w = wlm_from({{0}, {1}}, 2);
  const auto agg = majority_vote(w);
  const IndexList nodes{0, 1};
  SUBCASE("perfect predictions give zero") {
    ad::Tape t;
    Matrix p(2, 2);
    p << 1.0, 1e-300, 1e-300, 1.0;
    const Matrix lp = p.array().log();
    CHECK(wlce_loss(t.constant(lp), agg, ones(2), nodes).scalar() == doctest::Approx(0.0));
  }
  SUBCASE("uniform two-class predictions give ln 2") {
    ad::Tape t;
    const Matrix lp = Matrix::Constant(2, 2, std::log(0.5));
    CHECK(wlce_loss(t.constant(lp), agg, ones(2), nodes).scalar() == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("clamped probabilities are counted") {
    ad::Tape t;
    Matrix lp(2, 2);
    lp << -40.0, 0.0, 0.0, -0.1;
    WlceDiagnostics d;
    const double l = wlce_loss(t.constant(lp), agg, ones(2), nodes, &d).scalar();
    CHECK(d.clamped == 1);
    CHECK(l == doctest::Approx((-std::log(1e-12) + 0.1) / 2.0));
  }
}

TEST_CASE("wlce on a random five-node case matches the loop oracle") {
  const oracle::Votes rows{{0, 2, 2}, {1, 1, -1}, {-1, -1, -1}, {2, 0, 0}, {1, 1, 1}};
  const auto w = wlm_from(rows, 3);
  const auto agg = majority_vote(w);
  Matrix logits(5, 3);
  logits << 0.3, -1.0, 2.0, 0.1, 0.2, 0.3, 1.0, 1.0, 1.0, -0.5, 0.7, 0.0, 2.5, -2.0, 0.4;
  const Matrix probs = oracle::softmax_rows(logits);
  RhoWeights rho;
  rho.rho = Vector(5);
  rho.rho << 0.5, 1.2, 0.0, 0.9, 0.3;
  const IndexList nodes{0, 1, 2, 3, 4};
  ad::Tape t;
  const double got = wlce_loss(ad::log_softmax_rows(t.constant(logits)), agg, rho, nodes).scalar();
  std::vector<int> labels(agg.labels.data(), agg.labels.data() + 5);
  const std::vector<double> r(rho.rho.data(), rho.rho.data() + 5);
  CHECK(std::abs(got - oracle::wlce(probs, labels, r, {0, 1, 2, 3, 4})) < 1e-12);
}

TEST_CASE("build_contrast_batch") {
  SUBCASE("star centre falls back to every other node") {
    set_warnings_enabled(false);
    const Graph g = build_graph<double>(std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}}, Matrix::Zero(5, 1));
    const IndexList a{0}, p{1};
    const auto b = build_contrast_batch(g, a, p, 10, 0.5, 3);
    set_warnings_enabled(true);
    CHECK(b.n_fallback == 1);
    CHECK(b.negatives[0].size() == 3);
  }
  SUBCASE("r larger than the pool takes the whole pool") {
    const Graph g = build_graph<double>(std::vector<Edge>{{0, 1}}, Matrix::Zero(5, 1));
    const IndexList a{0}, p{2};
    const auto b = build_contrast_batch(g, a, p, 10, 0.5, 3);
    IndexList neg = b.negatives[0];
    std::sort(neg.begin(), neg.end());
    CHECK(neg == IndexList{3, 4});
  }
  SUBCASE("fixed seed is repeatable, negatives are valid") {
    const Graph g = toy::graph();
    const auto w = toy::weak_labels();
    const auto b1 = build_contrast_batch(w, g, 2, 0.5, 9);
    const auto b2 = build_contrast_batch(w, g, 2, 0.5, 9);
    CHECK(b1.negatives == b2.negatives);
    CHECK(b1.positives == b2.positives);
    CHECK(b1.anchors == IndexList{0, 1, 2, 3, 5});
    for (std::size_t k = 0; k < b1.anchors.size(); ++k) {
      CHECK(b1.positives[k] != b1.anchors[k]);
      CHECK(b1.negatives[k].size() == 2);
      for (Index j : b1.negatives[k]) {
        CHECK(j != b1.anchors[k]);
        CHECK(j != b1.positives[k]);
        CHECK_FALSE(g.adjacent(b1.anchors[k], j));
      }
    }
  }
  SUBCASE("bad arguments") {
    const Graph g = toy::graph();
    const IndexList a{0}, p{1}, self{0};
    CHECK_THROWS_AS(build_contrast_batch(g, a, p, 0, 0.5, 1), InvalidArgument);
    CHECK_THROWS_AS(build_contrast_batch(g, a, p, 2, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(build_contrast_batch(g, a, self, 2, 0.5, 1), InvalidArgument);
  }
}

TEST_CASE("wlcon hand values") {
  ContrastBatch b;
  b.anchors = {0};
  b.positives = {1};
  b.negatives = {{2}};
  b.tau = 0.5;
  SUBCASE("equal dot products give ln 2") {
    ad::Tape t;
    Matrix h(3, 2);
    h << 1, 0, 0.5, 0.5, 0.5, -0.5;
    CHECK(wlcon_loss(t.constant(h), b).scalar() == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("dominant positive gives almost zero") {
    ad::Tape t;
    Matrix h(3, 1);
    h << 1.0, 20.0, -20.0;
    CHECK(wlcon_loss(t.constant(h), b).scalar() < 1e-30);
  }
  SUBCASE("typeset temperature cancels") {
    ad::Tape t;
    Matrix h(3, 2);
    h << 0.3, 0.2, -0.4, 0.9, 0.1, 0.1;
    const double a = wlcon_loss(t.constant(h), b, TemperatureMode::kTypeset).scalar();
    b.tau = 0.1;
    const double c = wlcon_loss(t.constant(h), b, TemperatureMode::kTypeset).scalar();
    CHECK(a == doctest::Approx(c));
    b.tau = 1.0;
    CHECK(wlcon_loss(t.constant(h), b, TemperatureMode::kInside).scalar() == doctest::Approx(a));
  }
}

TEST_CASE("wlcon three-anchor batch matches the scalar oracle") {
  Matrix h(6, 3);
  h << 0.2, -0.1, 0.7, 0.5, 0.5, -0.2, -0.3, 0.8, 0.1, 0.9, 0.0, 0.4, -0.6, -0.2, 0.3, 0.1, 0.3, -0.9;
  ContrastBatch b;
  b.anchors = {0, 2, 4};
  b.positives = {1, 3, 5};
  b.negatives = {{3, 4}, {0, 5}, {1, 2}};
  b.tau = 0.5;
  ad::Tape t;
  const double got = wlcon_loss(t.constant(h), b).scalar();
  const double want = oracle::wlcon(h, {0, 2, 4}, {1, 3, 5}, {{3, 4}, {0, 5}, {1, 2}}, 0.5);
  CHECK(std::abs(got - want) < 1e-12);
}

TEST_CASE("scon hand values") {
  const Partition p = canonicalize({0, 0, 1, 1}, PartitionKind::kCommunity);
  SUBCASE("orthogonal summaries give ln 2") {
    ad::Tape t;
    Matrix h(4, 2);
    h << 1, 1, -1, -1, 2, 0, -2, 0;  // every community mean is zero
    CHECK(scon_loss(t.constant(h), t.constant(h), p).scalar() == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("separated scores approach zero") {
    ad::Tape t;
    Matrix h(4, 1), hc(4, 1);
    h << 30, 30, -30, -30;
    hc << -30, -30, 30, 30;
    CHECK(scon_loss(t.constant(h), t.constant(hc), p).scalar() < 1e-100);
  }
}

TEST_CASE("scon six-node two-community case matches the loop oracle") {
  const Graph g = toy::graph();
  const auto p = toy::params();
  const Matrix h = embed(normalize_adjacency(g), g.features(), p);
  const Matrix hc = embed(normalize_adjacency(g), corrupt_features(g, 3), p);
  ad::Tape t;
  const double got = scon_loss(t.constant(h), t.constant(hc), toy::halves(PartitionKind::kCommunity)).scalar();
  CHECK(std::abs(got - oracle::scon(h, hc, {0, 0, 0, 1, 1, 1})) < 1e-12);
}

TEST_CASE("pooling_matrix averages members") {
  const SparseMatrix pm = pooling_matrix(canonicalize({0, 1, 0, 0}, PartitionKind::kCommunity));
  const Matrix d = pm;
  CHECK(d(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(d(1, 1) == 1.0);
  CHECK(d(0, 1) == 0.0);
}

TEST_CASE("total_loss and ablation flags") {
  ad::Tape t;
  LossTerms terms{t.constant(Matrix::Constant(1, 1, 0.5)), t.constant(Matrix::Constant(1, 1, 1.25)),
                  t.constant(Matrix::Constant(1, 1, 2.0))};
  CHECK(total_loss(terms, {true, true, true}).breakdown.total == 3.75);
  const auto only = total_loss(terms, {false, true, false});
  CHECK(only.breakdown.total == 1.25);
  CHECK(only.breakdown.l_scon == 0.0);
  CHECK(total_loss(terms, {false, true, true}).breakdown.total == 3.25);
  CHECK_THROWS_AS(total_loss(terms, {false, false, false}), InvalidArgument);
  CHECK_THROWS_AS(total_loss(LossTerms{}, {true, false, false}), InvalidArgument);

  const auto& configs = ablation_configurations();
  REQUIRE(configs.size() == 7);
  std::vector<std::string> labels;
  for (const auto& f : configs) labels.push_back(f.label());
  CHECK(labels == std::vector<std::string>{"-L_WLCon", "-L_WLCE", "-L_SCon", "+L_WLCon", "+L_WLCE", "+L_SCon",
                                           "WSNet"});
}

TEST_CASE("toy losses match the scalar oracles") {
  const Graph g = toy::graph();
  const auto w = toy::weak_labels();
  const auto f = toy::frozen(w, g);
  const auto p = toy::params();
  const Matrix h0 = embed(normalize_adjacency(g), g.features(), p);
  const RhoWeights rho = compute_rho(h0, toy::halves(PartitionKind::kCluster), w);

  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const Matrix* m : p.tensors()) vars.push_back(t.parameter(*m));
  const auto terms = toy::losses(t, vars, g, w, f, rho);

  const Matrix h = terms.h.value();
  const Matrix hc = terms.h_corrupt.value();
  const Matrix probs = oracle::softmax_rows(oracle::add_bias(oracle::matmul(h, p.wc), p.bc));
  const auto votes = toy::votes();
  std::vector<int> agg;
  for (const auto& row : votes) agg.push_back(oracle::majority(row, 2));
  const auto rho_ref = oracle::rho(h, {0, 0, 0, 1, 1, 1}, votes, 2, true, true);
  for (Index i = 0; i < 6; ++i) CHECK(std::abs(rho.rho[i] - rho_ref[static_cast<std::size_t>(i)]) < 1e-10);
  CHECK(std::abs(terms.wlce.scalar() - oracle::wlce(probs, agg, rho_ref, {0, 1, 2, 3, 4, 5})) < 1e-10);
  const std::vector<long> anchors(f.anchors.begin(), f.anchors.end());
  const std::vector<long> positives(f.positives.begin(), f.positives.end());
  std::vector<std::vector<long>> negatives;
  for (const auto& n : f.negatives) negatives.emplace_back(n.begin(), n.end());
  CHECK(std::abs(terms.wlcon.scalar() - oracle::wlcon(h, anchors, positives, negatives, 0.5)) < 1e-10);
  CHECK(std::abs(terms.scon.scalar() - oracle::scon(h, hc, {0, 0, 0, 1, 1, 1})) < 1e-10);
}

TEST_CASE("toy loss gradients pass the finite-difference check") {
  const Graph g = toy::graph();
  const auto w = toy::weak_labels();
  const auto f = toy::frozen(w, g);
  const auto p = toy::params();
  const RhoWeights rho =
      compute_rho(embed(normalize_adjacency(g), g.features(), p), toy::halves(PartitionKind::kCluster), w);
  for (int which = 0; which < 3; ++which) {
    auto fn = [&](ad::Tape& t, std::span<const ad::Var> v) {
      const auto terms = toy::losses(t, v, g, w, f, rho);
      return which == 0 ? terms.wlce : which == 1 ? terms.wlcon : terms.scon;
    };
    const auto r = grad_check(fn, toy::param_list(p));
    INFO("term " << which << " max relative error " << r.max_rel_error);
    CHECK(r.passed);
  }
}
