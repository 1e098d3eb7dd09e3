#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsnet/graph.hpp"
#include "wsnet/weak_labels.hpp"

namespace wsnet {

/// A dataset directory:
///
///   edges.tsv     `u<TAB>v` per line, 0-based              (required)
///   features.csv  one comma-separated row per node, no header (required)
///   lfs.csv       N x m integer votes, -1 = abstain          (optional)
///   labels.txt    one integer per line, -1 = unknown         (optional)
///   meta          `n_classes = C`                            (optional)
struct DatasetBundle {
  Graph graph;
  std::optional<WeakLabelMatrix> weak_labels;
  std::optional<LabelVector> y_true;
  int n_classes = 2;
  std::filesystem::path directory;
  /// file name -> SHA-256 of its bytes
  std::map<std::string, std::string> content_hashes;
};

std::vector<Edge> read_edge_list(std::istream& is, const std::string& source = "edges.tsv");
Matrix read_feature_csv(std::istream& is, const std::string& source = "features.csv");
VoteMatrix read_vote_csv(std::istream& is, const std::string& source = "lfs.csv");
LabelVector read_labels(std::istream& is, const std::string& source = "labels.txt");

/// Validates every file against the feature row count and the class count;
/// errors name the file and line.
DatasetBundle load_dataset(const std::filesystem::path& dir);

void write_dataset(const std::filesystem::path& dir, const Graph& g, const WeakLabelMatrix* wlm,
                   const LabelVector* y_true, int n_classes);

}  // namespace wsnet
