#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "wsnet/graph.hpp"

using namespace wsnet;

TEST_CASE("build_graph drops duplicates and self loops") {
  const std::vector<Edge> e{{0, 1}, {1, 0}, {1, 1}};
  const Graph g = build_graph<double>(e, Matrix::Ones(2, 1));
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0] == Edge{0, 1});
  CHECK(g.adjacent(1, 0));
  CHECK(g.degree(0) == 1);
}

TEST_CASE("build_graph keeps isolated nodes") {
  const Graph g = build_graph<double>(std::vector<Edge>{}, Matrix::Zero(3, 2));
  CHECK(g.n_nodes() == 3);
  CHECK(g.edges().empty());
  for (Index i = 0; i < 3; ++i) CHECK(g.degree(i) == 0);
}

TEST_CASE("build_graph errors") {
  CHECK_THROWS_AS(build_graph<double>(std::vector<Edge>{{0, 3}}, Matrix::Zero(3, 1)), InvalidArgument);
  CHECK_THROWS_AS(build_graph<double>(std::vector<Edge>{}, Matrix::Zero(0, 1)), InvalidArgument);
  const std::vector<std::vector<double>> ragged{{1.0, 2.0}, {3.0}};
  CHECK_THROWS_AS(build_graph<double>(std::vector<Edge>{}, ragged), InvalidArgument);
}

TEST_CASE("neighbours are sorted") {
  const Graph g = build_graph<double>(std::vector<Edge>{{2, 0}, {0, 3}, {1, 0}}, Matrix::Zero(4, 1));
  const auto nb = g.neighbors(0);
  CHECK(std::vector<Index>(nb.begin(), nb.end()) == std::vector<Index>{1, 2, 3});
}

TEST_CASE("normalize_adjacency hand values") {
  SUBCASE("isolated node") {
    const Graph g = build_graph<double>(std::vector<Edge>{}, Matrix::Zero(1, 1));
    CHECK(Matrix(*normalize_adjacency(g)) (0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("single edge") {
    const Graph g = build_graph<double>(std::vector<Edge>{{0, 1}}, Matrix::Zero(2, 1));
    const Matrix a = *normalize_adjacency(g);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("path") {
    const Graph g = build_graph<double>(std::vector<Edge>{{0, 1}, {1, 2}}, Matrix::Zero(3, 1));
    const Matrix a = *normalize_adjacency(g);
    CHECK(a(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    CHECK(a(0, 2) == 0.0);
  }
}

TEST_CASE("normalize_adjacency matches dense oracle") {
  const std::vector<std::pair<long, long>> raw{{0, 1}, {0, 4}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {5, 6}};
  std::vector<Edge> e(raw.begin(), raw.end());
  const Graph g = build_graph<double>(e, Matrix::Zero(8, 1));
  const Matrix got = *normalize_adjacency(g);
  const Matrix want = oracle::normalized_adjacency(oracle::dense_adjacency(8, raw));
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("corrupt_features") {
  SUBCASE("identical rows are unchanged") {
    const Graph g = build_graph<double>(std::vector<Edge>{}, Matrix::Constant(5, 2, 3.0));
    CHECK(corrupt_features(g, 9) == g.features());
  }
  SUBCASE("deterministic") {
    Matrix x(3, 1);
    x << 1, 2, 3;
    const Graph g = build_graph<double>(std::vector<Edge>{}, x);
    CHECK(corrupt_features(g, 4) == corrupt_features(g, 4));
  }
  SUBCASE("rows are a permutation of the input") {
    Matrix x(4, 2);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    const Graph g = build_graph<double>(std::vector<Edge>{}, x);
    const Matrix y = corrupt_features(g, 17);
    auto sorted_rows = [](const Matrix& m) {
      std::vector<std::vector<double>> rows;
      for (Index i = 0; i < m.rows(); ++i) rows.push_back({m(i, 0), m(i, 1)});
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    CHECK(sorted_rows(x) == sorted_rows(y));
  }
  SUBCASE("needs two nodes") {
    const Graph g = build_graph<double>(std::vector<Edge>{}, Matrix::Zero(1, 1));
    CHECK_THROWS_AS(corrupt_features(g, 0), InvalidArgument);
  }
}

TEST_CASE("float graphs build and normalise") {
  const Eigen::MatrixXf x = Eigen::MatrixXf::Ones(2, 1);
  const auto g = build_graph<float>(std::vector<Edge>{{0, 1}}, x);
  CHECK(Eigen::MatrixXf(*normalize_adjacency(g))(0, 1) == doctest::Approx(0.5f));
}
