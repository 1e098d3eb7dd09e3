#include "wsnet/losses.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace wsnet {

double entropy_term(const WeakLabelMatrix& wlm, Index node, EntropyMode mode) {
  const double h = vote_entropy(wlm, node);
  if (mode == EntropyMode::kEntropy) return h;
  return 1.0 - h / std::log(static_cast<double>(wlm.n_classes()));
}

RhoWeights compute_rho(const Matrix& h, const Partition& clusters, const WeakLabelMatrix& wlm,
                       const RhoOptions& options) {
  const Index n = h.rows();
  if (clusters.n_nodes() != n || wlm.n_nodes() != n) {
    throw InvalidArgument("compute_rho: embeddings, clusters and weak labels disagree on node count");
  }
  RhoWeights out;
  out.rho = Vector::Zero(n);
  out.components.resize(static_cast<std::size_t>(n));
  if (options.uniform) {
    for (Index i = 0; i < n; ++i) out.rho[i] = wlm.coverage(i) > 0 ? 1.0 : 0.0;
    return out;
  }

  const Matrix centroids = pool_centroids(h, clusters);
  const IndexList sizes = clusters.group_sizes();
  Vector sim(n);
  for (Index i = 0; i < n; ++i) {
    const auto q = clusters.assignment[static_cast<std::size_t>(i)];
    const double norms = h.row(i).norm() * centroids.row(q).norm();
    if (norms == 0.0) {
      sim[i] = 0.0;
      continue;
    }
    const double cos = h.row(i).dot(centroids.row(q)) / norms;
    sim[i] = options.cosine_shift ? 0.5 * (1.0 + cos) : cos;
  }
  const double denom = sim.sum();
  out.degenerate = !(denom > 0.0) || !std::isfinite(denom);
  if (out.degenerate) warn("compute_rho: non-positive similarity denominator, using uniform ratio");

  for (Index i = 0; i < n; ++i) {
    auto& c = out.components[static_cast<std::size_t>(i)];
    c.cluster_size = sizes[static_cast<std::size_t>(clusters.assignment[static_cast<std::size_t>(i)])];
    c.centroid_similarity = sim[i];
    if (wlm.coverage(i) == 0) continue;
    c.entropy_term = entropy_term(wlm, i, options.entropy_mode);
    const double ratio = out.degenerate ? 1.0 / static_cast<double>(n) : sim[i] / denom;
    out.rho[i] = static_cast<double>(c.cluster_size) * ratio * c.entropy_term;
  }
  return out;
}

RhoWeights initial_rho(const WeakLabelMatrix& wlm, const RhoOptions& options) {
  const Index n = wlm.n_nodes();
  RhoWeights out;
  out.rho = Vector::Zero(n);
  out.components.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (wlm.coverage(i) == 0) continue;
    if (options.uniform) {
      out.rho[i] = 1.0;
      continue;
    }
    auto& c = out.components[static_cast<std::size_t>(i)];
    c.cluster_size = n;
    c.centroid_similarity = 1.0 / static_cast<double>(n);
    c.entropy_term = entropy_term(wlm, i, options.entropy_mode);
    out.rho[i] = c.entropy_term;
  }
  return out;
}

ad::Var wlce_loss(const ad::Var& log_probs, const AggregatedLabels& agg, const RhoWeights& rho,
                  std::span<const Index> nodes, WlceDiagnostics* diag) {
  if (nodes.empty()) throw InvalidArgument("wlce_loss: no nodes selected");
  const Index n_classes = log_probs.cols();
  IndexList rows, cols;
  std::vector<double> weights;
  for (Index i : nodes) {
    const int y = agg.labels[i];
    if (y == kAbstain || rho.rho[i] == 0.0) continue;
    if (y >= n_classes) throw InvalidArgument("wlce_loss: aggregated label outside class range");
    rows.push_back(i);
    cols.push_back(y);
    weights.push_back(rho.rho[i]);
  }
  constexpr double kMinProb = 1e-12;
  const double log_floor = std::log(kMinProb);
  ad::Var picked = ad::gather_elements(log_probs, rows, cols);
  if (diag != nullptr) diag->clamped += (picked.value().array() < log_floor).count();
  ad::Var clamped = ad::clamp_min(picked, log_floor);
  Matrix w(static_cast<Index>(weights.size()), 1);
  const double inv_n = 1.0 / static_cast<double>(nodes.size());
  for (std::size_t k = 0; k < weights.size(); ++k) w(static_cast<Index>(k), 0) = -weights[k] * inv_n;
  return ad::dot(clamped, log_probs.tape().constant(std::move(w)));
}

IndexList positive_pairs(const WeakLabelMatrix& wlm, std::span<const Index> anchors, std::uint64_t seed) {
  IndexList out;
  out.reserve(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    out.push_back(top_positive_pair(wlm, anchors[k], seed + k));
  }
  return out;
}

ContrastBatch build_contrast_batch(const Graph& g, std::span<const Index> anchors,
                                   std::span<const Index> positives, Index r, double tau, std::uint64_t seed) {
  if (r < 1) throw InvalidArgument("build_contrast_batch: r must be at least 1");
  if (!(tau > 0.0)) throw InvalidArgument("build_contrast_batch: tau must be positive");
  if (anchors.size() != positives.size()) {
    throw InvalidArgument("build_contrast_batch: anchors and positives differ in length");
  }
  const Index n = g.n_nodes();
  ContrastBatch batch;
  batch.tau = tau;
  batch.anchors.assign(anchors.begin(), anchors.end());
  batch.positives.assign(positives.begin(), positives.end());
  batch.negatives.resize(anchors.size());

  std::mt19937_64 rng(seed);
  IndexList pool;
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const Index i = anchors[k];
    const Index pos = positives[k];
    if (pos == i) throw InvalidArgument("build_contrast_batch: positive equals anchor");
    for (Index j : g.neighbors(i)) blocked[static_cast<std::size_t>(j)] = 1;
    pool.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i && j != pos && !blocked[static_cast<std::size_t>(j)]) pool.push_back(j);
    }
    for (Index j : g.neighbors(i)) blocked[static_cast<std::size_t>(j)] = 0;
    if (pool.empty()) {
      ++batch.n_fallback;
      for (Index j = 0; j < n; ++j) {
        if (j != i && j != pos) pool.push_back(j);
      }
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(r), pool.size());
    for (std::size_t s = 0; s < take; ++s) {
      std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
      std::swap(pool[s], pool[pick(rng)]);
    }
    batch.negatives[k].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  if (batch.n_fallback > 0) {
    warn("build_contrast_batch: " + std::to_string(batch.n_fallback) +
         " anchor(s) have no non-adjacent nodes; sampling negatives from all nodes");
  }
  return batch;
}

ContrastBatch build_contrast_batch(const WeakLabelMatrix& wlm, const Graph& g, Index r, double tau,
                                   std::uint64_t seed) {
  IndexList anchors;
  for (Index i = 0; i < wlm.n_nodes(); ++i) {
    if (wlm.coverage(i) > 0) anchors.push_back(i);
  }
  const IndexList positives = positive_pairs(wlm, anchors, seed);
  return build_contrast_batch(g, anchors, positives, r, tau, seed);
}

ad::Var wlcon_loss(const ad::Var& h, const ContrastBatch& batch, TemperatureMode mode) {
  if (batch.anchors.empty()) throw InvalidArgument("wlcon_loss: empty contrast batch");
  IndexList lhs, rhs, offsets{0}, pos_at, zeros;
  for (std::size_t k = 0; k < batch.anchors.size(); ++k) {
    const Index i = batch.anchors[k];
    pos_at.push_back(static_cast<Index>(lhs.size()));
    zeros.push_back(0);
    lhs.push_back(i);
    rhs.push_back(batch.positives[k]);
    for (Index j : batch.negatives[k]) {
      lhs.push_back(i);
      rhs.push_back(j);
    }
    offsets.push_back(static_cast<Index>(lhs.size()));
  }
  ad::Var dots = ad::row_dot(ad::gather_rows(h, lhs), ad::gather_rows(h, rhs));
  // Typeset form: the 1/tau factors multiply every term and cancel.
  ad::Var logits = mode == TemperatureMode::kInside ? ad::scale(dots, 1.0 / batch.tau) : dots;
  ad::Var lse = ad::segment_logsumexp(logits, offsets);
  ad::Var pos = ad::gather_elements(logits, pos_at, zeros);
  return ad::mean(ad::sub(lse, pos));
}

SparseMatrix pooling_matrix(const Partition& part) {
  const IndexList sizes = part.group_sizes();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(part.assignment.size());
  for (std::size_t i = 0; i < part.assignment.size(); ++i) {
    const Index g = part.assignment[i];
    triplets.emplace_back(g, static_cast<Index>(i), 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(g)]));
  }
  SparseMatrix p(part.n_groups, part.n_nodes());
  p.setFromTriplets(triplets.begin(), triplets.end());
  p.makeCompressed();
  return p;
}

ad::Var scon_loss(const ad::Var& h, const ad::Var& h_corrupt, const Partition& communities) {
  if (communities.n_nodes() != h.rows() || h_corrupt.rows() != h.rows()) {
    throw InvalidArgument("scon_loss: embeddings and communities disagree on node count");
  }
  auto pool = std::make_shared<const SparseMatrix>(pooling_matrix(communities));
  ad::Var summaries = ad::spmm(pool, h);
  ad::Var per_node = ad::gather_rows(summaries, communities.assignment);
  ad::Var real = ad::row_dot(h, per_node);
  ad::Var fake = ad::row_dot(h_corrupt, per_node);
  // log(1 - σ(x)) = log σ(-x)
  ad::Var total = ad::add(ad::sum(ad::log_sigmoid(real)), ad::sum(ad::log_sigmoid(ad::scale(fake, -1.0))));
  return ad::scale(total, -1.0 / (2.0 * static_cast<double>(h.rows())));
}

std::string AblationFlags::label() const {
  const int on = int(scon) + int(wlce) + int(wlcon);
  if (on == 3) return "WSNet";
  if (on == 2) return !wlcon ? "-L_WLCon" : !wlce ? "-L_WLCE" : "-L_SCon";
  if (on == 1) return wlcon ? "+L_WLCon" : wlce ? "+L_WLCE" : "+L_SCon";
  return "none";
}

const std::vector<AblationFlags>& ablation_configurations() {
  static const std::vector<AblationFlags> kConfigs{
      {true, true, false},   // -L_WLCon
      {true, false, true},   // -L_WLCE
      {false, true, true},   // -L_SCon
      {false, false, true},  // +L_WLCon
      {false, true, false},  // +L_WLCE
      {true, false, false},  // +L_SCon
      {true, true, true},    // WSNet
  };
  return kConfigs;
}

TotalLoss total_loss(const LossTerms& terms, const AblationFlags& flags) {
  if (!flags.any()) throw InvalidArgument("total_loss: every loss component is disabled");
  auto take = [](bool enabled, const std::optional<ad::Var>& term, const char* name) -> const ad::Var* {
    if (!enabled) return nullptr;
    if (!term) throw InvalidArgument(std::string("total_loss: enabled term ") + name + " was not computed");
    return &*term;
  };
  const ad::Var* parts[] = {take(flags.scon, terms.scon, "L_SCon"), take(flags.wlce, terms.wlce, "L_WLCE"),
                            take(flags.wlcon, terms.wlcon, "L_WLCon")};
  TotalLoss out;
  double values[3] = {0.0, 0.0, 0.0};
  std::optional<ad::Var> acc;
  for (int k = 0; k < 3; ++k) {
    if (parts[k] == nullptr) continue;
    values[k] = parts[k]->scalar();
    acc = acc ? ad::add(*acc, *parts[k]) : *parts[k];
  }
  out.total = *acc;
  out.breakdown.l_scon = values[0];
  out.breakdown.l_wlce = values[1];
  out.breakdown.l_wlcon = values[2];
  out.breakdown.total = out.total.scalar();
  return out;
}

}  // namespace wsnet
