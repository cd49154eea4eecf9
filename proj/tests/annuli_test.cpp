#include <gtest/gtest.h>

#include <random>

#include "hnncert/annuli.hpp"
#include "hnncert/expansion.hpp"
#include "oracles.hpp"

using namespace hnncert;

namespace {

Word W(std::string_view s, int rank = 2) { return parse_word(s, rank); }

Endomorphism endo(std::vector<std::string> const& images) {
  int               rank = static_cast<int>(images.size());
  std::vector<Word> ws;
  for (auto const& s : images) {
    ws.push_back(parse_word(s, rank));
  }
  return Endomorphism(rank, ws);
}

}  // namespace

TEST(Admissible, Examples) {
  EXPECT_TRUE(is_admissible({1, 2}));
  EXPECT_FALSE(is_admissible({1, -1}));
  EXPECT_FALSE(is_admissible({1, -2}));
  EXPECT_TRUE(is_admissible({-1, 2}));
  EXPECT_TRUE(is_admissible({-1, -1, 2, 1}));
  EXPECT_FALSE(is_admissible({-1, 1}));
}

TEST(Admissible, StrictReading) {
  EXPECT_TRUE(is_admissible_strict({-1, -1, 2}));
  EXPECT_TRUE(is_admissible({-1, -2, 1}));
  EXPECT_FALSE(is_admissible_strict({-1, -2, 1}));
  // the readings agree on length two except for two distinct inverse letters
  for (auto const& w : admissible_words_of_length_two(3)) {
    EXPECT_EQ(is_admissible_strict(w), !(w[0] < 0 && w[1] < 0 && w[0] != w[1]));
  }
}

TEST(ClassifyWord, Examples) {
  auto a = classify_word({1, 2});
  EXPECT_TRUE(a.positive);
  EXPECT_FALSE(a.unidirectional);
  auto b = classify_word({1, 1});
  EXPECT_TRUE(b.positive);
  EXPECT_TRUE(b.unidirectional);
  auto c = classify_word({-1, 2});
  EXPECT_FALSE(c.positive);
  EXPECT_FALSE(c.unidirectional);
  EXPECT_TRUE(classify_word({-2, -2}).unidirectional);
  EXPECT_THROW(classify_word({1, -1}), PreconditionError);
}

TEST(BuildAnnulus, PositiveWord) {
  std::vector<Endomorphism> maps{endo({"ab", "ba"}), endo({"aab", "ba"})};
  auto                      a = build_annulus(W("a"), {1, 2}, maps);
  ASSERT_EQ(a.rings.size(), 3u);
  EXPECT_EQ(a.rings[0], W("a"));
  EXPECT_EQ(a.rings[1], cyclic_reduce(apply_endo(maps[0], W("a"))).core);
  EXPECT_EQ(a.rings[2], cyclic_reduce(apply_endo(maps[1], apply_endo(maps[0], W("a")))).core);
  EXPECT_EQ(a.word, (AnnulusWord{1, 2}));
  EXPECT_TRUE(rings_consistent(a, maps));
}

TEST(BuildAnnulus, InverseBlock) {
  std::vector<Endomorphism> maps{endo({"ab", "ba"})};
  Word                      beta  = W("aab");
  Word                      alpha = cyclic_reduce(apply_endo(maps[0].power(2), beta)).core;
  auto                      a     = build_annulus(alpha, {-1, -1}, maps);
  ASSERT_EQ(a.rings.size(), 3u);
  EXPECT_EQ(a.rings[0], alpha);
  EXPECT_TRUE(conjugate_in_free_group(a.rings[1], apply_endo(maps[0], beta)));
  EXPECT_TRUE(conjugate_in_free_group(a.rings[2], beta));
  EXPECT_TRUE(rings_consistent(a, maps));
}

TEST(BuildAnnulus, MissingPreimage) {
  std::vector<Endomorphism> maps{endo({"ab", "ba"}), endo({"aab", "ba"})};
  try {
    build_annulus(W("a"), {-1, 2}, maps);
    FAIL();
  } catch (ConstructionError const& e) {
    EXPECT_EQ(e.power, 1);
  }
  EXPECT_THROW(build_annulus(Word(2), {1}, maps), PreconditionError);
  EXPECT_THROW(build_annulus(W("a"), {1, -2}, maps), PreconditionError);
}

TEST(LambdaHyperbolic, Examples) {
  EXPECT_TRUE(check_lambda_hyperbolic({3, 1, 3}, Rational{3, 1}, 1));
  EXPECT_FALSE(check_lambda_hyperbolic({1, 1, 1}, Rational{3, 1}, 1));
  EXPECT_TRUE(check_lambda_hyperbolic({1, 2, 6}, Rational{3, 1}, 1));
  EXPECT_THROW(check_lambda_hyperbolic({1, 2}, Rational{3, 1}, 1), InputError);
}

TEST(LambdaHyperbolic, ReversalSymmetric) {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<std::int64_t> d(0, 20);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::int64_t> l{d(rng), d(rng), d(rng), d(rng), d(rng)};
    std::vector<std::int64_t> r(l.rbegin(), l.rend());
    EXPECT_EQ(check_lambda_hyperbolic(l, Rational{5, 2}, 2), check_lambda_hyperbolic(r, Rational{5, 2}, 2));
  }
}

TEST(Flaring, Examples) {
  EXPECT_TRUE(std::holds_alternative<FlaresWith>(flaring_verdict(10, 26, 2)));
  EXPECT_TRUE(std::holds_alternative<ThinGirth>(flaring_verdict(4, 1, 2)));
  EXPECT_TRUE(std::holds_alternative<FlaringViolation>(flaring_verdict(10, 12, 2)));
}

TEST(Flaring, OrientationNormalized) {
  std::vector<Endomorphism> maps{endo({"aab", "ba"})};
  auto fwd = build_thin_annulus(W("aabbAB"), 1, W("b"), maps);
  auto bwd = build_thin_annulus(W("aabbAB"), -1, W("b"), maps);
  EXPECT_EQ(fwd.rho, 2);
  EXPECT_EQ(flaring_audit(fwd, 2).index(), flaring_audit(bwd, 2).index());
  EXPECT_TRUE(std::holds_alternative<FlaresWith>(flaring_audit(fwd, 2)));
}

TEST(Audit31, FibonacciAtCertifiedPower) {
  auto f = endo({"ab", "a"});
  auto v = expansion_power(GraphMap::from_endomorphism(f));
  ASSERT_TRUE(std::holds_alternative<ExpansionPower>(v));
  auto fn = f.power(std::get<ExpansionPower>(v).power);
  // D_1 D_1 on loop a: l(f^6(a)) against 3 l(f^3(a))
  auto a  = build_from_anchor(W("a"), {1, 1}, {fn});
  EXPECT_GE(a.ring_length(2), 3 * a.ring_length(1));
}

TEST(Audit31, ImmersionsHaveNoViolations) {
  std::vector<Endomorphism> maps;
  for (auto const& e : {endo({"aab", "ba"}), endo({"abaB", "Abb"})}) {
    auto v = expansion_power(GraphMap::from_endomorphism(e));
    ASSERT_TRUE(std::holds_alternative<ExpansionPower>(v));
    maps.push_back(e.power(std::get<ExpansionPower>(v).power));
  }
  auto rep = audit_31_hyperbolicity(maps, {100, 20, 5});
  EXPECT_EQ(rep.words, static_cast<int>(admissible_words_of_length_two(2).size()));
  EXPECT_EQ(rep.annuli, rep.words * 100);
  EXPECT_TRUE(rep.violations.empty());
  auto fl = flaring_audit_sample(maps, 4, {100, 20, 7});
  EXPECT_TRUE(fl.violations.empty());
  EXPECT_GT(fl.flaring, 0);
}

TEST(Annuli, RandomWordsRoundTrip) {
  std::vector<Endomorphism> maps{endo({"aab", "ba"}), endo({"abaB", "Abb"})};
  std::mt19937_64           rng(73);
  std::uniform_int_distribution<int> len(1, 4), gen(1, 2);
  for (int i = 0; i < 100; ++i) {
    AnnulusWord w;
    int         neg = len(rng) - 1, pos = len(rng) - 1;
    for (int j = 0; j < neg; ++j) {
      w.push_back(-gen(rng));
    }
    for (int j = 0; j < pos; ++j) {
      w.push_back(gen(rng));
    }
    if (w.empty() || !is_admissible(w)) {
      continue;
    }
    auto a = build_from_anchor(random_cyclic_word(rng, 2, 1 + static_cast<std::size_t>(i % 6)), w, maps);
    EXPECT_EQ(a.word, w);
    EXPECT_TRUE(is_admissible(a.word));
    EXPECT_TRUE(rings_consistent(a, maps));
  }
}
