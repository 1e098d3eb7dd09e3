#pragma once

#include <span>
#include <vector>

#include "wsnet/common.hpp"

namespace wsnet {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Index support = 0;
};

struct ClassificationReport {
  /// rows = true class, cols = predicted class
  Eigen::MatrixXi confusion;
  std::vector<ClassMetrics> per_class;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  Index total = 0;
};

/// Per-class precision/recall/F1 and the support-weighted F1. Entries with a
/// negative true label are ignored; undefined ratios count as 0.
ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           int n_classes);

double weighted_f1(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

/// Population mean and standard deviation.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

/// Spearman rank correlation, average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace wsnet
