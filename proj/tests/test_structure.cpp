#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "netprec/structure.hpp"
#include "test_util.hpp"

using namespace netprec;

TEST_CASE("from_adjacency keeps the diagonal even with a zero matrix") {
  const GraphStructure g = from_adjacency(DenseMatrix(3, 3));
  REQUIRE(g.p() == 3);
  CHECK(g.support(0) == std::vector<std::size_t>{0});
  CHECK(g.support(1) == std::vector<std::size_t>{1});
  CHECK(g.support(2) == std::vector<std::size_t>{2});
  CHECK(g.edge_count() == 0);
}

TEST_CASE("from_adjacency on the band-1 graph") {
  DenseMatrix a(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 1.0;
  const GraphStructure g = from_adjacency(a);
  CHECK(g.support(0) == std::vector<std::size_t>{0, 1});
  CHECK(g.support(1) == std::vector<std::size_t>{0, 1, 2});
  CHECK(g.support(2) == std::vector<std::size_t>{1, 2});
  CHECK(g.edge_count() == 2);
  CHECK(g.max_support_size() == 3);
}

TEST_CASE("from_adjacency validation") {
  DenseMatrix asym(3, 3);
  asym(0, 1) = 1.0;  // missing the mirror entry
  CHECK_THROWS_AS(from_adjacency(asym), NotSymmetric);
  CHECK_THROWS_AS(from_adjacency(DenseMatrix(2, 3)), NotSquare);
  DenseMatrix bad(2, 2);
  bad(0, 1) = bad(1, 0) = 2.0;
  CHECK_THROWS_AS(from_adjacency(bad), NotBinary);
}

TEST_CASE("structure constructor enforces the support invariants") {
  CHECK_THROWS_AS(GraphStructure(2, {{0}, {0}}), ConfigError);           // 1 lacks itself
  CHECK_THROWS_AS(GraphStructure(2, {{0, 0}, {1}}), ConfigError);        // not increasing
  CHECK_THROWS_AS(GraphStructure(2, {{0, 5}, {1}}), IndexOutOfRange);    // out of range
  CHECK_THROWS_AS(GraphStructure(2, {{0, 1}, {1}}), NotSymmetric);       // one-sided edge
  CHECK_THROWS_AS(GraphStructure(3, {{0}, {1}}), DimensionMismatch);     // wrong count
}

TEST_CASE("selection locates the pivot") {
  const GraphStructure diag = from_adjacency(DenseMatrix(3, 3));
  const SelectionMap m = selection(diag, 2);
  CHECK(m.support == std::vector<std::size_t>{2});
  CHECK(m.pivot == 0);

  DenseMatrix a(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 1.0;
  const SelectionMap mid = selection(from_adjacency(a), 1);
  CHECK(mid.support == std::vector<std::size_t>{0, 1, 2});
  CHECK(mid.pivot == 1);

  CHECK_THROWS_AS(selection(diag, 5), IndexOutOfRange);
}

TEST_CASE("extract_submatrix picks support rows and columns") {
  const SelectionMap map{0, {0, 2}, 0};
  CHECK(max_abs_diff(extract_submatrix(DenseMatrix::identity(3), map),
                     DenseMatrix::identity(2)) == 0.0);

  const DenseMatrix s(3, 3, {1, 2, 3, 2, 5, 6, 3, 6, 9});
  const DenseMatrix sub = extract_submatrix(s, map);
  CHECK(sub == DenseMatrix(2, 2, {1, 3, 3, 9}));

  CHECK_THROWS_AS(extract_submatrix(DenseMatrix(2, 3), map), DimensionMismatch);
  const SelectionMap big{0, {0, 7}, 0};
  CHECK_THROWS_AS(extract_submatrix(DenseMatrix::identity(3), big), DimensionMismatch);
}

TEST_CASE("scatter_column places values on the support") {
  CHECK(scatter_column({5.0}, SelectionMap{2, {2}, 0}, 4) ==
        std::vector<double>{0.0, 0.0, 5.0, 0.0});
  CHECK(scatter_column({1.0, 2.0, 3.0}, SelectionMap{0, {0, 1, 2}, 0}, 3) ==
        std::vector<double>{1.0, 2.0, 3.0});
  CHECK(scatter_column({1.0, 2.0}, SelectionMap{0, {0, 2}, 0}, 3) ==
        std::vector<double>{1.0, 0.0, 2.0});
  CHECK_THROWS_AS(scatter_column({1.0}, SelectionMap{0, {0, 2}, 0}, 3), DimensionMismatch);
  CHECK_THROWS_AS(scatter_column({1.0, 2.0}, SelectionMap{0, {0, 9}, 0}, 3), DimensionMismatch);
}

TEST_CASE("property: extract after scatter is the bitwise identity") {
  std::mt19937 gen(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t p = 2 + gen() % 20;
    // Random support containing a random pivot column.
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < p; ++j)
      if (gen() % 2 == 0) support.push_back(j);
    const std::size_t i = support.empty() ? 0 : support[gen() % support.size()];
    if (support.empty()) support.push_back(0);
    const SelectionMap map{i, support, 0};

    std::vector<double> values(support.size());
    for (double& v : values) v = normal(gen);
    const std::vector<double> scattered = scatter_column(values, map, p);

    // Gather back through the support indices.
    for (std::size_t k = 0; k < support.size(); ++k) {
      CHECK(scattered[support[k]] == values[k]);
    }
    // Off-support entries are exactly zero.
    std::size_t k = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (k < support.size() && support[k] == j) {
        ++k;
        continue;
      }
      CHECK(scattered[j] == 0.0);
    }
  }
}

TEST_CASE("property: adjacency round trip preserves symmetric membership") {
  std::mt19937 gen(78);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t p = 2 + gen() % 15;
    DenseMatrix a(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j)
        if (gen() % 3 == 0) a(i, j) = a(j, i) = 1.0;
    const GraphStructure g = from_adjacency(a);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j : g.support(i)) {
        const auto& sj = g.support(j);
        CHECK(std::binary_search(sj.begin(), sj.end(), i));
      }
  }
}
