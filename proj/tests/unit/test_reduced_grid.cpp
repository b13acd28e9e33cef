#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "probetopo/reduced_grid.hpp"
#include "probetopo/resistance.hpp"

using namespace probetopo;
using fixtures::error_of;

TEST_CASE("Y tree reduced grid") {
  const auto g = fixtures::y_tree();
  const std::vector<NodeId> p{2, 3};
  const auto grid = reduce_grid(g, p);
  CHECK(grid.nodes == std::vector<NodeId>{1, 2, 3});
  CHECK(grid.internal == std::vector<NodeId>{1});
  CHECK(grid.top == 1);
  CHECK(grid.top_resistance == doctest::Approx(1.0));
  REQUIRE(grid.lines.size() == 2);
  for (const auto& l : grid.lines) {
    CHECK(l.from == 1);
    CHECK(l.r == doctest::Approx(l.to == 2 ? 2.0 : 3.0));
  }
  const Eigen::MatrixXd rr = grid.probing_block(p);
  const Eigen::MatrixXd r = resistance_matrix(g).block(p, p);
  CHECK((rr - r).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("path reduced grid is a single node") {
  const std::vector<NodeId> p{2};
  const auto grid = reduce_grid(fixtures::path_tree(), p);
  CHECK(grid.nodes == std::vector<NodeId>{2});
  CHECK(grid.lines.empty());
  CHECK(grid.internal.empty());
  CHECK(grid.top == 2);
  CHECK(grid.top_resistance == doctest::Approx(3.0));
  const auto f = grid.as_feeder();
  CHECK(f.size() == 2);
  CHECK(f.line_resistance(2) == doctest::Approx(3.0));
}

TEST_CASE("substation can be an internal identifiable node") {
  const auto g = build_feeder({{0, 1, 1.0, 1.0}, {0, 2, 2.0, 1.0}});
  const std::vector<NodeId> p{1, 2};
  const auto grid = reduce_grid(g, p);
  CHECK(grid.top == 0);
  CHECK(grid.internal == std::vector<NodeId>{0});
  CHECK(grid.top_resistance == 0.0);
  CHECK(grid.lines.size() == 2);
}

TEST_CASE("reduce_grid errors") {
  const auto g = fixtures::y_tree();
  CHECK(error_of([&] { reduce_grid(g, std::vector<NodeId>{2}); }) == ErrorCode::LeafNotProbed);
  CHECK(error_of([&] { reduce_grid(g, std::vector<NodeId>{2, 3, 7}); }) ==
        ErrorCode::UnknownNode);
  CHECK(error_of([&] { reduce_grid(g, std::vector<NodeId>{0, 2, 3}); }) ==
        ErrorCode::AssumptionViolated);
  CHECK(error_of([&] { reduce_grid(g, std::vector<NodeId>{}); }) == ErrorCode::EmptyPartition);
}

TEST_CASE("37-bus reduced grid with every leaf probed") {
  const auto g = fixtures::ieee37();
  const auto leaves = g.leaves();
  const auto grid = reduce_grid(g, leaves);
  CHECK(grid.probing == leaves);
  CHECK(grid.internal.size() == 12);
  CHECK(grid.nodes.size() == 27);
  CHECK(grid.lines.size() == 26);
  CHECK(grid.top == 702);
  const Eigen::MatrixXd rr = grid.probing_block(leaves);
  const Eigen::MatrixXd r = resistance_matrix(g).block(leaves, leaves);
  CHECK((rr - r).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reduced grid properties on random trees") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto lines = oracle::random_tree(rng, std::uniform_int_distribution<int>(2, 30)(rng));
    const oracle::Tree t(lines);
    const auto g = build_feeder(lines);
    const auto p = oracle::random_probing(rng, t, 0.3);
    const auto grid = reduce_grid(g, p);

    // Internal nodes branch into at least two probed subtrees.
    for (NodeId i : grid.internal) {
      int children = 0;
      for (const auto& l : grid.lines) children += l.from == i;
      CHECK(children >= 2);
      CHECK_FALSE(std::binary_search(p.begin(), p.end(), i));
    }
    // Lines carry path sums.
    for (const auto& l : grid.lines) {
      CHECK(l.r == doctest::Approx(t.path_resistance(l.from, l.to)).epsilon(1e-12));
    }
    CHECK(grid.top_resistance == doctest::Approx(t.path_resistance(0, grid.top)));
    // R^r_PP = R_PP against the inverse Laplacian.
    const Eigen::MatrixXd inv = oracle::laplacian_inverse(lines);
    const Eigen::MatrixXd rr = grid.probing_block(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        const auto a = std::lower_bound(t.buses.begin(), t.buses.end(), p[i]) - t.buses.begin();
        const auto b = std::lower_bound(t.buses.begin(), t.buses.end(), p[j]) - t.buses.begin();
        CHECK(std::abs(rr(i, j) - inv(a, b)) <= 1e-9 * std::abs(inv(a, b)));
      }
    }
  }
}
