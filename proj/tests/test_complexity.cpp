#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "morphcx/complexity.hpp"
#include "morphcx/pipeline.hpp"

using namespace morphcx;

namespace {

struct StubScorer {
  double logprob(const Conditioning&, std::string_view, std::string_view) const { return -1; }
};

SynthSpec two_class(std::uint64_t seed) {
  SynthSpec s;
  s.n = 4;
  s.class_probs = {0.5, 0.5};
  s.suffixes = {{"", "s", "en", "um"}, {"", "s", "en", "ir"}};
  s.seed = seed;
  return s;
}

}  // namespace

TEST(EComplexity, LargestParadigm) {
  const std::vector<Paradigm> ps{{"a", {{"X", "1"}, {"Y", "2"}, {"Z", "3"}}}, {"b", {{"X", "1"}}}};
  EXPECT_EQ(e_complexity(ps), 3u);
  EXPECT_THROW(e_complexity({}), DataError);
}

TEST(IComplexity, StubScorerFullAndPartial) {
  const SlotInventory inv({"A", "B", "C"});
  const std::vector<Paradigm> full{{"x", {{"A", "a"}, {"B", "b"}, {"C", "c"}}},
                                   {"y", {{"A", "a"}, {"B", "b"}, {"C", "c"}}}};
  const auto ic = i_complexity(StubScorer{}, inv, Arborescence::chain(3), full);
  EXPECT_EQ(ic.total_bits, 3);
  EXPECT_EQ(ic.per_form_bits, 1);
  EXPECT_EQ(ic.d, 2u);

  const std::vector<Paradigm> partial{{"x", {{"A", "a"}, {"C", "c"}}}, {"y", {{"B", "b"}}}};
  const auto ip = i_complexity(StubScorer{}, inv, Arborescence::chain(3), partial);
  EXPECT_EQ(ip.total_bits, 1.5);
  EXPECT_EQ(ip.per_form_bits, 1);
  EXPECT_EQ(ip.scored_forms, 3u);
  EXPECT_THROW(i_complexity(StubScorer{}, inv, Arborescence::chain(3), {}), DataError);
}

TEST(IComplexity, IndependentOfParadigmOrderAndThreads) {
  SynthSpec spec = two_class(4);
  const auto ps = SynthSystem(spec).sample(200);
  std::vector<PairRecord> pairs;
  for (std::size_t k = 0; k < 150; ++k) {
    auto e = expand_pairs(ps[k]);
    pairs.insert(pairs.end(), e.begin(), e.end());
  }
  const auto m = train(pairs, {}, {});
  const SlotInventory inv(SynthSystem(spec).slots());
  std::vector<Paradigm> test(ps.begin() + 150, ps.end());
  const auto a = i_complexity(m, inv, Arborescence::chain(4), test, 1);
  std::reverse(test.begin(), test.end());
  const auto b = i_complexity(m, inv, Arborescence::chain(4), test, 3);
  EXPECT_NEAR(a.total_bits, b.total_bits, 1e-9);
}

TEST(SynthSystem, ClassEntropy) {
  SynthSpec s = two_class(0);
  EXPECT_DOUBLE_EQ(SynthSystem(s).class_entropy(), 1.0);
  s.class_probs = {2.0 / 3, 1.0 / 3};
  EXPECT_NEAR(SynthSystem(s).class_entropy(), 0.918296, 1e-6);
  s.class_probs = {1.0};
  s.suffixes = {{"", "s", "en", "um"}};
  EXPECT_EQ(SynthSystem(s).class_entropy(), 0.0);
}

TEST(SynthSystem, RejectsBadSpecs) {
  SynthSpec s = two_class(0);
  s.class_probs = {0.5, 0.6};
  EXPECT_THROW(SynthSystem{s}, DataError);
  s = two_class(0);
  s.suffixes.pop_back();
  EXPECT_THROW(SynthSystem{s}, DataError);
  s = two_class(0);
  s.suffixes[0].pop_back();
  EXPECT_THROW(SynthSystem{s}, DataError);
  s = two_class(0);
  s.stem_min = 7;
  EXPECT_THROW(SynthSystem{s}, DataError);
}

TEST(SynthSystem, SameSeedSameStemsAcrossSuffixTables) {
  auto a = two_class(12);
  auto b = two_class(12);
  b.class_probs = {1.0};
  b.suffixes = {{"", "s", "en", "um"}};
  const auto pa = SynthSystem(a).sample(50);
  const auto pb = SynthSystem(b).sample(50);
  EXPECT_EQ(pa, SynthSystem(a).sample(50));
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_EQ(pa[k].entries.at("N;S01"), pb[k].entries.at("N;S01"));
    EXPECT_EQ(pa[k].size(), 4u);
  }
  std::size_t second_class = 0;
  for (const auto& p : pa) second_class += p.entries.at("N;S04").ends_with("ir");
  EXPECT_GT(second_class, 10u);
  EXPECT_LT(second_class, 40u);
}

TEST(IComplexity, CrossEntropyStaysAboveTrueEntropy) {
  // Each paradigm is a stem (4 equally likely lengths, 13 equally likely
  // letters) plus one fair class bit, so H(p) is known exactly. The
  // held-out cross-entropy estimates H(p, q) >= H(p).
  const auto spec = two_class(31);
  const SynthSystem sys(spec);
  RunConfig cfg;
  cfg.seed = 31;
  cfg.split.seed = 31;
  cfg.split.regime = Regime::kPurple;
  cfg.split.paradigm_count = 500;
  Lexicon lex;
  lex.paradigms = sys.sample(600);
  lex.inventory = SlotInventory(sys.slots());
  const auto r = run_pipeline(cfg, lex);

  const double h = 2 + 4.5 * std::log2(13.0) + 1;
  std::vector<double> bits;
  for (const auto& p : r.split.test) {
    bits.push_back(-joint_logprob(*r.model, lex.inventory, r.tree, p));
  }
  const double mean = std::accumulate(bits.begin(), bits.end(), 0.0) / bits.size();
  double var = 0;
  for (double b : bits) var += (b - mean) * (b - mean);
  const double se = std::sqrt(var / (bits.size() - 1) / bits.size());
  EXPECT_NEAR(mean, r.icomplexity.total_bits, 1e-9);
  EXPECT_GE(mean, h - 3 * se);
}

TEST(IComplexity, MoreTrainingDataTightensTheEstimate) {
  const SynthSystem sys(two_class(77));
  Lexicon lex;
  lex.paradigms = sys.sample(700);
  lex.inventory = SlotInventory(sys.slots());
  std::vector<double> totals;
  for (std::size_t count : {20, 600}) {
    RunConfig cfg;
    cfg.seed = 77;
    cfg.split.seed = 77;
    cfg.split.regime = Regime::kPurple;
    cfg.split.paradigm_count = count;
    totals.push_back(run_pipeline(cfg, lex).icomplexity.total_bits);
  }
  EXPECT_LT(totals[1], totals[0]);
}

TEST(ComplexityPoint, CsvRow) {
  ComplexityPoint p{"toy", "N", "green", 3, 12.5, 4.25, 50, 7};
  EXPECT_EQ(to_csv_row(p), "toy,N,green,3,12.5,4.25,50,7");
}
