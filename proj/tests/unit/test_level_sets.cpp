#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "probetopo/level_sets.hpp"
#include "probetopo/resistance.hpp"

using namespace probetopo;
using fixtures::error_of;
using Sets = std::vector<std::vector<NodeId>>;

TEST_CASE("Y tree level sets of node 2") {
  const auto fam = level_sets(fixtures::y_tree(), 2);
  CHECK(fam.owner == 2);
  CHECK(fam.first_depth == 0);
  CHECK(fam.depth() == 2);
  CHECK(fam.at_depth(2) == std::vector<NodeId>{2});
  CHECK(fam.at_depth(1) == std::vector<NodeId>{1, 3});
  CHECK(fam.at_depth(0) == std::vector<NodeId>{0});
  CHECK(fam.values == std::vector<double>{0.0, 1.0, 3.0});
  CHECK(fam.value_at_depth(2) == 3.0);
  CHECK_FALSE(fam.has_depth(3));
}

TEST_CASE("substation level set is the whole feeder") {
  const auto fam = level_sets(fixtures::y_tree(), 0);
  CHECK(fam.sets == Sets{{0, 1, 2, 3}});
  CHECK(error_of([] { level_sets(fixtures::y_tree(), 9); }) == ErrorCode::UnknownNode);
}

TEST_CASE("metered level sets and the observed view") {
  const auto g = fixtures::y_tree();
  const std::vector<NodeId> p{2, 3};
  const auto metered = metered_level_sets(g, 2, p);
  CHECK(metered.metered);
  CHECK(metered.sets == Sets{{}, {3}, {2}});
  const auto view = observed_metered_view(metered);
  CHECK(view.first_depth == 1);
  CHECK(view.sets == Sets{{3}, {2}});
  CHECK(view.values == std::vector<double>{1.0, 3.0});
  CHECK(view.at_depth(1) == std::vector<NodeId>{3});
}

TEST_CASE("level sets match the brute-force oracle on random trees") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto lines = oracle::random_tree(rng, 25);
    const oracle::Tree t(lines);
    const auto g = build_feeder(lines);
    const auto R = resistance_matrix(g);
    for (NodeId m : t.buses) {
      const auto fam = level_sets(g, m);
      CHECK(fam.sets == t.level_sets(m));
      for (std::size_t k = 0; k < fam.sets.size(); ++k) {
        const NodeId member = fam.sets[k].back();
        const double expected = member == 0 ? 0.0 : R.at(member, m);
        CHECK(fam.values[k] == doctest::Approx(expected));
      }
    }
  }
}
