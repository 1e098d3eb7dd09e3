#include "wsnet/dataset.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace wsnet {

namespace fs = std::filesystem;

namespace {

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line) + ": "; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& context) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DatasetError(context + "cannot parse '" + text + "' as a number");
  }
  return value;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw DatasetError("cannot open " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

std::vector<Edge> read_edge_list(std::istream& is, const std::string& source) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), '\t');
    if (fields.size() != 2) throw DatasetError(where(source, lineno) + "expected 'u<TAB>v'");
    edges.emplace_back(parse_number<Index>(fields[0], where(source, lineno)),
                       parse_number<Index>(fields[1], where(source, lineno)));
  }
  return edges;
}

Matrix read_feature_csv(std::istream& is, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& f : split(trim(line), ',')) row.push_back(parse_number<double>(f, where(source, lineno)));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DatasetError(where(source, lineno) + "row has " + std::to_string(row.size()) + " columns, expected " +
                         std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetError(source + ": no feature rows");
  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return x;
}

VoteMatrix read_vote_csv(std::istream& is, const std::string& source) {
  std::vector<std::vector<int>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<int> row;
    for (const auto& f : split(trim(line), ',')) row.push_back(parse_number<int>(f, where(source, lineno)));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DatasetError(where(source, lineno) + "row has " + std::to_string(row.size()) + " columns, expected " +
                         std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return VoteMatrix(0, 0);
  VoteMatrix v(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) v(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return v;
}

LabelVector read_labels(std::istream& is, const std::string& source) {
  std::vector<int> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    values.push_back(parse_number<int>(trim(line), where(source, lineno)));
  }
  return Eigen::Map<const LabelVector>(values.data(), static_cast<Index>(values.size()));
}

DatasetBundle load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError("dataset directory " + dir.string() + " does not exist");
  std::map<std::string, std::string> hashes;
  auto open = [&](const std::string& name, bool required) -> std::optional<std::string> {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      if (required) throw DatasetError("dataset " + dir.string() + " is missing required file " + name);
      return std::nullopt;
    }
    std::string bytes = slurp(p);
    hashes[name] = sha256_hex(bytes);
    return bytes;
  };

  const std::string edges_text = *open("edges.tsv", true);
  const std::string features_text = *open("features.csv", true);
  std::istringstream edges_in(edges_text), features_in(features_text);
  const std::vector<Edge> edges = read_edge_list(edges_in);
  Matrix x = read_feature_csv(features_in);
  const Index n = x.rows();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [u, v] = edges[k];
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw DatasetError("edges.tsv: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") references a node outside the " + std::to_string(n) + " feature rows");
    }
  }

  std::optional<int> declared_classes;
  if (auto meta = open("meta", false)) {
    std::istringstream is(*meta);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw DatasetError(where("meta", lineno) + "expected key = value");
      const auto key = trim(t.substr(0, eq));
      const auto value = trim(t.substr(eq + 1));
      if (key == "n_classes") {
        declared_classes = parse_number<int>(value, where("meta", lineno));
      } else {
        throw DatasetError(where("meta", lineno) + "unknown key '" + key + "'");
      }
    }
  }

  std::optional<VoteMatrix> votes;
  if (auto text = open("lfs.csv", false)) {
    std::istringstream is(*text);
    votes = read_vote_csv(is);
    if (votes->rows() != n) {
      throw DatasetError("lfs.csv has " + std::to_string(votes->rows()) + " rows but features.csv has " +
                         std::to_string(n) + " rows");
    }
  }
  std::optional<LabelVector> labels;
  if (auto text = open("labels.txt", false)) {
    std::istringstream is(*text);
    labels = read_labels(is);
    if (labels->size() != n) {
      throw DatasetError("labels.txt has " + std::to_string(labels->size()) + " rows but features.csv has " +
                         std::to_string(n) + " rows");
    }
  }

  int n_classes = 2;
  if (declared_classes) {
    if (*declared_classes < 2) throw DatasetError("meta: n_classes must be at least 2");
    n_classes = *declared_classes;
  } else {
    int top = 1;
    if (votes && votes->size() > 0) top = std::max(top, votes->maxCoeff());
    if (labels && labels->size() > 0) top = std::max(top, labels->maxCoeff());
    n_classes = top + 1;
  }
  if (votes) {
    for (Index i = 0; i < votes->rows(); ++i) {
      for (Index j = 0; j < votes->cols(); ++j) {
        const int v = (*votes)(i, j);
        if (v < kAbstain || v >= n_classes) {
          throw DatasetError("lfs.csv: vote " + std::to_string(v) + " at row " + std::to_string(i + 1) +
                             ", column " + std::to_string(j + 1) + " outside [-1, " + std::to_string(n_classes) +
                             ")");
        }
      }
    }
  }
  if (labels) {
    for (Index i = 0; i < labels->size(); ++i) {
      if ((*labels)[i] < -1 || (*labels)[i] >= n_classes) {
        throw DatasetError("labels.txt:" + std::to_string(i + 1) + ": label " + std::to_string((*labels)[i]) +
                           " outside [-1, " + std::to_string(n_classes) + ")");
      }
    }
  }

  DatasetBundle b{build_graph<double>(edges, std::move(x)), std::nullopt, std::move(labels), n_classes, dir,
                  std::move(hashes)};
  if (votes) b.weak_labels.emplace(std::move(*votes), n_classes);
  return b;
}

void write_dataset(const fs::path& dir, const Graph& g, const WeakLabelMatrix* wlm, const LabelVector* y_true,
                   int n_classes) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "edges.tsv");
    for (const auto& [u, v] : g.edges()) os << u << '\t' << v << '\n';
  }
  {
    std::ofstream os(dir / "features.csv");
    os << std::setprecision(17);
    const Matrix& x = g.features();
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) os << (j ? "," : "") << x(i, j);
      os << '\n';
    }
  }
  if (wlm != nullptr) {
    std::ofstream os(dir / "lfs.csv");
    for (Index i = 0; i < wlm->n_nodes(); ++i) {
      for (Index j = 0; j < wlm->n_lfs(); ++j) os << (j ? "," : "") << wlm->vote(i, j);
      os << '\n';
    }
  }
  if (y_true != nullptr) {
    std::ofstream os(dir / "labels.txt");
    for (Index i = 0; i < y_true->size(); ++i) os << (*y_true)[i] << '\n';
  }
  std::ofstream os(dir / "meta");
  os << "n_classes = " << n_classes << '\n';
}

}  // namespace wsnet
