#include <gtest/gtest.h>

#include <random>

#include "hnncert/expansion.hpp"
#include "oracles.hpp"

using namespace hnncert;

namespace {

GraphMap rose_map(std::vector<std::string> const& images) {
  int               rank = static_cast<int>(images.size());
  std::vector<Word> ws;
  for (auto const& s : images) {
    ws.push_back(parse_word(s, rank));
  }
  return GraphMap::from_endomorphism(Endomorphism(rank, ws));
}

// Theta graph u => v with three arcs; the first arc is fixed, the other two
// wrap around it.
GraphMap theta_map() {
  Graph g(2);
  g.add_edge(0, 1);
  g.add_edge(0, 1);
  g.add_edge(0, 1);
  return GraphMap(g, {0, 1}, {{0}, {2, 1, 2}, {4, 1, 4}});
}

int power_of(ExpansionVerdict const& v) {
  auto const* p = std::get_if<ExpansionPower>(&v);
  return p ? p->power : -1;
}

}  // namespace

TEST(InvariantForest, Examples) {
  EXPECT_TRUE(maximal_invariant_forest(rose_map({"ab", "a"})).empty());
  EXPECT_TRUE(maximal_invariant_forest(GraphMap::identity(Graph::rose(3))).empty());
  auto F = maximal_invariant_forest(theta_map());
  EXPECT_TRUE(F.unique);
  EXPECT_EQ(F.edges, (std::vector<char>{1, 0, 0}));
}

TEST(InvariantForest, IrreducibleMeansEmpty) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Word> ims;
    for (int i = 0; i < 2; ++i) {
      ims.push_back(Word::reduced(oracle::random_reduced(rng, 2, 1 + trial % 4), 2));
    }
    auto f = GraphMap::from_endomorphism(Endomorphism(2, ims));
    if (is_irreducible_matrix(transition_matrix(f))) {
      EXPECT_TRUE(maximal_invariant_forest(f).empty());
    }
  }
}

TEST(Collapse, Examples) {
  auto f = rose_map({"ab", "ba"});
  EXPECT_EQ(collapse_forest(f, maximal_invariant_forest(f)).map, f);
  auto t = theta_map();
  auto c = collapse_forest(t, maximal_invariant_forest(t));
  EXPECT_TRUE(c.map.graph().is_rose());
  EXPECT_TRUE(is_immersion(t));
  EXPECT_TRUE(c.immersion_preserved);
  EXPECT_EQ(c.map.to_endomorphism(), Endomorphism(2, {parse_word("aa", 2), parse_word("bb", 2)}));
}

TEST(Collapse, Errors) {
  Graph tree(2);
  tree.add_edge(0, 1);
  auto            id = GraphMap::identity(tree);
  InvariantForest all{{1}, true};
  EXPECT_THROW(collapse_forest(id, all), PreconditionError);
  InvariantForest bogus{{0, 1, 0}, true};  // arc 1 maps across arc 0
  EXPECT_THROW(collapse_forest(theta_map(), bogus), PreconditionError);
}

TEST(ExpansionPower, Examples) {
  EXPECT_EQ(power_of(expansion_power(rose_map({"ab", "a"}))), 3);
  EXPECT_EQ(power_of(expansion_power(rose_map({"aa"}))), 2);
  EXPECT_TRUE(std::holds_alternative<PeriodicLoop>(expansion_power(rose_map({"b", "a"}))));
  auto id = expansion_power(GraphMap::identity(Graph::rose(2)));
  ASSERT_TRUE(std::holds_alternative<PeriodicLoop>(id));
  EXPECT_EQ(std::get<PeriodicLoop>(id).period, 1);
  EXPECT_THROW(expansion_power(rose_map({"ab", "Ba"})), PreconditionError);
}

TEST(ExpansionPower, PerEdgeCounts) {
  auto v = expansion_power(rose_map({"ab", "a"}));
  ASSERT_TRUE(std::holds_alternative<ExpansionPower>(v));
  EXPECT_EQ(std::get<ExpansionPower>(v).per_edge, (std::vector<int>{2, 3}));
}

TEST(ExpansionPower, TargetFactor) {
  // l(f^n(a)) for a -> ab, b -> a runs 1, 2, 3, 5, 8, 13
  EXPECT_EQ(power_of(expansion_power(rose_map({"ab", "a"}), 64, Rational{12, 1})), 6);
  EXPECT_EQ(power_of(expansion_power(rose_map({"ab", "a"}), 64, Rational{9, 2})), 4);
}

TEST(ExpansionPower, ForestCase) {
  auto v = expansion_power(theta_map());
  ASSERT_TRUE(std::holds_alternative<ExpansionPower>(v));
  auto const& p = std::get<ExpansionPower>(v);
  EXPECT_EQ(p.forest_edges, 1);
  EXPECT_EQ(p.inner_power, 2);
  EXPECT_EQ(p.k, 2);
  // direct iteration on every short immersed loop of the theta graph
  auto const  t = theta_map();
  auto const& g = t.graph();
  for (std::vector<OrientedEdge> loop : {std::vector<OrientedEdge>{0, 3}, {2, 5}, {0, 5}, {2, 1, 4, 1},
                                         std::vector<OrientedEdge>{0, 3, 4, 3}}) {
    ASSERT_TRUE(is_cyclically_tight(loop));
    check_closed(g, loop);
    EXPECT_GE(iterate_loop_length(theta_map(), loop, p.power), 3 * path_length(g, loop));
  }
}

TEST(ExpansionPower, SoundOnRandomLoops) {
  std::mt19937_64 rng(67);
  for (auto const& f : {rose_map({"aa"}), rose_map({"ab", "ba"}), rose_map({"aab", "ba"}), rose_map({"abaB", "Abb"})}) {
    ASSERT_TRUE(is_immersion(f));
    int n    = power_of(expansion_power(f));
    int rank = f.graph().num_edges();
    ASSERT_GT(n, 0);
    for (int trial = 0; trial < 200; ++trial) {
      auto loop = word_path(Word::reduced(oracle::random_cyclically_reduced(rng, rank, 1 + trial % 30), rank)).edges;
      EXPECT_GE(iterate_loop_length(f, loop, n), 3 * static_cast<std::int64_t>(loop.size()));
    }
  }
}

TEST(ExpansionPower, WeightedLengths) {
  Graph g(1);
  g.add_edge(0, 0, 2);
  g.add_edge(0, 0, 1);
  GraphMap f(g, {0}, {{0, 2}, {2, 0}});
  // a -> ab (length 3 from 2), b -> ba (length 3 from 1)
  auto v = expansion_power(f);
  ASSERT_TRUE(std::holds_alternative<ExpansionPower>(v));
  EXPECT_EQ(std::get<ExpansionPower>(v).per_edge, (std::vector<int>{2, 1}));
}
