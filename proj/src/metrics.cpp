#include "wsnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace wsnet {

ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           int n_classes) {
  if (y_true.size() != y_pred.size()) throw InvalidArgument("classification_report: length mismatch");
  ClassificationReport r;
  r.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    const int t = y_true[k];
    const int p = y_pred[k];
    if (t < 0) continue;
    if (t >= n_classes || p < 0 || p >= n_classes) {
      throw InvalidArgument("classification_report: label outside [0, " + std::to_string(n_classes) + ")");
    }
    ++r.confusion(t, p);
  }
  r.total = r.confusion.sum();
  if (r.total == 0) throw InvalidArgument("classification_report: no labelled entries");
  r.accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(r.total);
  r.per_class.resize(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    auto& m = r.per_class[static_cast<std::size_t>(c)];
    const double tp = r.confusion(c, c);
    const double predicted = r.confusion.col(c).sum();
    m.support = r.confusion.row(c).sum();
    m.precision = predicted > 0 ? tp / predicted : 0.0;
    m.recall = m.support > 0 ? tp / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.weighted_f1 += static_cast<double>(m.support) / static_cast<double>(r.total) * m.f1;
  }
  return r;
}

double weighted_f1(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  return classification_report(y_true, y_pred, n_classes).weighted_f1;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("mean_std: empty input");
  MeanStd out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman: need two equal-length series");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace wsnet
