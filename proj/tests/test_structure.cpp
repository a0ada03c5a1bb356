#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "morphcx/structure.hpp"

using namespace morphcx;

namespace {

/// Scores chosen so slot B is cheap from A and everything else is costly.
ScoreTable two_slot_scores() {
  ScoreTable t;
  t.insert("", "ROOT", "A", "a", -2);
  t.insert("", "ROOT", "B", "b", -6);
  t.insert("a", "A", "B", "b", -0.5);
  t.insert("b", "B", "A", "a", -3);
  return t;
}

}  // namespace

TEST(ComputeWeights, MeansOfStubScores) {
  const SlotInventory inv({"A", "B"});
  const std::vector<Paradigm> dev{{"x", {{"A", "a"}, {"B", "b"}}}, {"y", {{"A", "a"}}}};
  const auto w = compute_weights(two_slot_scores(), inv, dev);
  EXPECT_EQ(w.root(0), -2);
  EXPECT_EQ(w.root(1), -6);
  EXPECT_EQ(w.edge(1, 0), -0.5);
  EXPECT_EQ(w.edge(0, 1), -3);
  EXPECT_EQ(w.root_count(0), 2u);
  EXPECT_EQ(w.edge_count(1, 0), 1u);
  EXPECT_TRUE(w.flags.empty());
}

TEST(ComputeWeights, UnsupportedCellsAreFilledAndFlagged) {
  ScoreTable t;
  t.insert("", "ROOT", "A", "a", -2);
  t.insert("", "ROOT", "B", "b", -5);
  const SlotInventory inv({"A", "B", "C"});
  const std::vector<Paradigm> dev{{"x", {{"A", "a"}}}, {"y", {{"B", "b"}}}};
  const auto w = compute_weights(t, inv, dev);
  EXPECT_EQ(w.root(2), -5);
  EXPECT_EQ(w.edge(0, 1), -2);
  EXPECT_EQ(w.edge(2, 0), -5);
  EXPECT_FALSE(w.flags.empty());
  EXPECT_THROW(compute_weights(t, inv, {}), DataError);
}

TEST(ComputeWeights, MissingScoreNamesTuple) {
  ScoreTable t;
  t.insert("", "ROOT", "A", "a", -2);
  const SlotInventory inv({"A", "B"});
  const std::vector<Paradigm> dev{{"x", {{"A", "a"}, {"B", "b"}}}};
  EXPECT_THROW(compute_weights(t, inv, dev), LookupError);
}

TEST(MaxArborescence, TwoSlotExample) {
  WeightMatrix w(2);
  w.root(0) = -2;
  w.root(1) = -6;
  w.edge(1, 0) = -0.5;
  w.edge(0, 1) = -3;
  const auto t = max_arborescence(w);
  EXPECT_EQ(t.root, 0u);
  EXPECT_EQ(t.parent[1], 0u);
  EXPECT_EQ(tree_score(t, w), -2.5);
}

TEST(MaxArborescence, SingleSlot) {
  WeightMatrix w(1);
  w.root(0) = -3;
  const auto t = max_arborescence(w);
  EXPECT_TRUE(t.valid());
  EXPECT_EQ(tree_score(t, w), -3);
}

TEST(MaxArborescence, MatchesExhaustiveSearch) {
  std::mt19937 gen(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 5;
    // Narrow ranges force many ties.
    const auto w = oracle::random_weights(gen, n, trial % 2 ? 8 : 4096);
    const auto t = max_arborescence(w);
    ASSERT_TRUE(t.valid());
    EXPECT_EQ(tree_score(t, w), oracle::brute_force_arborescence(w)) << "trial " << trial;
  }
}

TEST(MaxArborescence, RaisingAnEdgeNeverLowersTheOptimum) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 4;
    auto w = oracle::random_weights(gen, n);
    const double before = tree_score(max_arborescence(w), w);
    const std::size_t i = gen() % n;
    std::size_t j = gen() % n;
    if (j == i) j = (j + 1) % n;
    w.edge(i, j) += 1.0;
    EXPECT_GE(tree_score(max_arborescence(w), w), before);
  }
}

TEST(MaxArborescence, TiesPreferLowestRoot) {
  WeightMatrix w(3);  // all zero
  const auto t = max_arborescence(w);
  EXPECT_EQ(t.root, 0u);
}

TEST(MaxArborescence, ThreadCountDoesNotMatter) {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = oracle::random_weights(gen, 6, 16);
    EXPECT_EQ(max_arborescence(w, 1), max_arborescence(w, 4));
  }
}

TEST(MaxArborescence, RejectsNonFiniteWeights) {
  WeightMatrix w(2);
  w.edge(0, 1) = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(max_arborescence(w), Error);
}

TEST(TreeScore, EqualsDevLogLikelihoodOnFullParadigms) {
  // With every dev paradigm full, the score of any tree is the mean dev
  // log-likelihood of the tree-factored joint.
  std::mt19937 gen(2);
  const SlotInventory inv({"A", "B", "C"});
  ScoreTable t;
  std::vector<Paradigm> dev;
  for (int k = 0; k < 5; ++k) {
    Paradigm p{"l" + std::to_string(k), {}};
    for (const auto& s : inv.slots()) p.entries[s] = s + std::to_string(k);
    for (const auto& [ts, tf] : p.entries) {
      t.insert("", "ROOT", ts, tf, -static_cast<double>(gen() % 64) / 8);
      for (const auto& [ss, sf] : p.entries) {
        if (ss != ts) t.insert(sf, ss, ts, tf, -static_cast<double>(gen() % 64) / 8);
      }
    }
    dev.push_back(p);
  }
  const auto w = compute_weights(t, inv, dev);
  for (const auto& tree : {Arborescence::chain(3), Arborescence::star(3, 1), max_arborescence(w)}) {
    double ll = 0;
    for (const auto& p : dev) ll += joint_logprob(t, inv, tree, p);
    EXPECT_NEAR(tree_score(tree, w), ll / 5, 1e-12);
  }
}

TEST(Serialization, WeightsAndTreeRoundTrip) {
  std::mt19937 gen(8);
  const SlotInventory inv({"N;SG", "N;PL", "N;DAT;PL"});
  auto w = oracle::random_weights(gen, 3);
  w.flags.push_back("note");
  const auto [w2, inv2] = weights_from_json(nlohmann::json::parse(weights_to_json(w, inv).dump()));
  EXPECT_EQ(w2, w);
  EXPECT_EQ(inv2, inv);
  const auto t = max_arborescence(w);
  const auto [t2, inv3] = tree_from_json(tree_to_json(t, inv, &w));
  EXPECT_EQ(t2, t);
  const auto dot = tree_to_dot(t, inv, &w);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_EQ(std::count(dot.begin(), dot.end(), '>'), 3);
}
