#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "morphcx/platbaseline.hpp"
#include "morphcx/strmodel.hpp"

using namespace morphcx;

namespace {

Plat load(const std::string& name) {
  std::ifstream in(std::string(MORPHCX_DATA_DIR) + "/" + name);
  EXPECT_TRUE(in) << name;
  return parse_plat(in);
}

}  // namespace

TEST(ParsePlat, GreekTable) {
  const auto g = load("greek_plat.tsv");
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(g.class_count(), 8u);
  EXPECT_EQ(g.slot_count(), 8u);
  EXPECT_EQ(g.exponents[0][0], "os");
  EXPECT_EQ(g.exponents[1][1], "");
  EXPECT_DOUBLE_EQ(g.weights[3], 0.125);
}

TEST(ParsePlat, WeightsAndErrors) {
  std::istringstream in("class\tweight\tA\tB\nx\t3\t-a\t∅\ny\t1\t-b\t-\n");
  const auto p = parse_plat(in);
  EXPECT_DOUBLE_EQ(p.weights[0], 0.75);
  EXPECT_EQ(p.exponents[1][1], "");
  std::istringstream ragged("class\tA\tB\nx\ta\n");
  EXPECT_THROW(parse_plat(ragged), ParseError);
  std::istringstream empty("class\tA\n");
  EXPECT_THROW(parse_plat(empty), ParseError);
}

TEST(CondDist, GreekExamples) {
  const auto g = load("greek_plat.tsv");
  const auto gen_sg = g.slot_index("gen;sg");
  const auto nom_sg = g.slot_index("nom;sg");
  const auto acc_pl = g.slot_index("acc;pl");
  EXPECT_EQ(cond_dist(g, gen_sg, acc_pl, "i"), (CondDist{{"us", 1.0}}));
  const auto d = cond_dist(g, nom_sg, acc_pl, "a");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d.at(""), 2.0 / 3);
  EXPECT_DOUBLE_EQ(d.at("o"), 1.0 / 3);
  EXPECT_NEAR(entropy_bits(d), 0.918296, 1e-6);
  EXPECT_THROW(cond_dist(g, nom_sg, acc_pl, "xyz"), LookupError);
}

TEST(CondEntropy, MatchesBruteForce) {
  const auto g = load("greek_plat.tsv");
  EXPECT_NEAR(avg_cond_entropy(g), oracle::brute_avg_cond_entropy(g), 1e-9);
  std::mt19937 gen(99);
  for (int t = 0; t < 100; ++t) {
    const auto p = oracle::random_plat(gen, 2 + t % 9, 2 + t % 6, 1 + t % 4, t % 2);
    EXPECT_NEAR(avg_cond_entropy(p), oracle::brute_avg_cond_entropy(p), 1e-9);
    EXPECT_NEAR(cond_entropy(p, 0, 1), oracle::brute_cond_entropy(p, 0, 1), 1e-9);
  }
}

TEST(CondEntropy, ConstantPlatIsZero) {
  std::istringstream in("class\tA\tB\tC\nx\ta\tb\tc\ny\ta\tb\tc\n");
  EXPECT_EQ(avg_cond_entropy(parse_plat(in)), 0.0);
}

TEST(CondEntropy, Errors) {
  const auto g = load("english_past_plat.tsv");
  EXPECT_THROW(cond_entropy(g, 0, 0), DataError);
  std::istringstream in("class\tA\nx\ta\n");
  EXPECT_THROW(avg_cond_entropy(parse_plat(in)), DataError);
}

TEST(Critique, JointEntropyCanExceedTheAverage) {
  // Two equiprobable classes distinct in every slot: any one form fixes
  // the class, so every H(i|j) is 0, yet a whole paradigm carries a bit.
  std::istringstream in("class\tA\tB\tC\tD\nx\ta\tb\tc\td\ny\te\tf\tg\th\n");
  const auto p = parse_plat(in);
  EXPECT_EQ(avg_cond_entropy(p), 0.0);
  EXPECT_DOUBLE_EQ(joint_exponent_entropy(p), 1.0);
  EXPECT_GT(joint_exponent_entropy(p) / p.slot_count(), avg_cond_entropy(p));
}

TEST(Critique, BestTreeIsNoWorseThanTheAverage) {
  // Averaged over uniformly random spanning trees, the tree-conditional sum
  // equals (n - 1) times the pairwise average, so the best tree is at most
  // that.
  std::mt19937 gen(1);
  for (int t = 0; t < 100; ++t) {
    const auto p = oracle::random_plat(gen, 3 + t % 7, 2 + t % 5, 2 + t % 3, t % 2);
    const auto best = best_tree_conditional(p);
    EXPECT_TRUE(best.tree.valid());
    EXPECT_LE(best.bits / (p.slot_count() - 1), avg_cond_entropy(p) + 1e-12);
  }
  const auto g = load("greek_plat.tsv");
  EXPECT_LE(best_tree_conditional(g).bits / 7, avg_cond_entropy(g));
}

TEST(Critique, SuppletionGetsZeroFromPlatButNotFromModel) {
  const auto plat = load("english_past_plat.tsv");
  EXPECT_DOUBLE_EQ(plat_form_prob(plat, 1, 0, "walk", "walked"), 1.0 / 3);
  EXPECT_EQ(plat_form_prob(plat, 1, 0, "go", "went"), 0.0);

  std::vector<PairRecord> pairs;
  for (const auto* v : {"walk", "jump", "talk", "kick", "play"}) {
    pairs.push_back({v, v, "V;NFIN", std::string(v) + "ed", "V;PST"});
  }
  const auto m = train(pairs, {}, {});
  const double lp = m.logprob(SourceView{"go", "V;NFIN"}, "V;PST", "went");
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_GT(std::exp2(lp), 0.0);
}

TEST(CondEntropy, IndependentBinaryExponentsGiveOneBit) {
  std::istringstream in("class\tA\tB\n1\ta\ta\n2\ta\tb\n3\tb\ta\n4\tb\tb\n");
  const auto p = parse_plat(in);
  EXPECT_DOUBLE_EQ(cond_entropy(p, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(avg_cond_entropy(p), 1.0);
}
