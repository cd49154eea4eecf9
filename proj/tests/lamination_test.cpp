#include <gtest/gtest.h>

#include <random>
#include <string>

#include "hnncert/lamination.hpp"

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

// plain string substitution for positive maps, letters 'a'.. in order
std::string substitute(std::vector<std::string> const& images, std::string s, int k) {
  for (int i = 0; i < k; ++i) {
    std::string t;
    for (char c : s) {
      t += images[static_cast<std::size_t>(c - 'a')];
    }
    s = t;
  }
  return s;
}

std::string as_string(std::vector<OrientedEdge> const& p) {
  std::string s;
  for (auto o : p) {
    s += static_cast<char>((o & 1 ? 'A' : 'a') + undirected(o));
  }
  return s;
}

std::vector<OrientedEdge> from_string(std::string const& s, int rank) { return word_path(parse_word(s, rank)).edges; }

std::string inverse_string(std::string const& s) {
  std::string r(s.rbegin(), s.rend());
  for (auto& c : r) {
    c = static_cast<char>(std::islower(c) ? std::toupper(c) : std::tolower(c));
  }
  return r;
}

// fraction of cyclic windows found as substrings of some f^j(x), j <= depth
std::pair<std::int64_t, std::int64_t> oracle_fraction(std::vector<std::string> const& images, std::string const& loop,
                                                      int L, int depth) {
  std::vector<std::string> leaves;
  for (std::size_t x = 0; x < images.size(); ++x) {
    for (int j = 0; j <= depth; ++j) {
      leaves.push_back(substitute(images, std::string(1, static_cast<char>('a' + x)), j));
    }
  }
  auto         n    = static_cast<std::int64_t>(loop.size());
  std::int64_t good = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::string w;
    for (std::int64_t j = i - L; j <= i + L; ++j) {
      w += loop[static_cast<std::size_t>(((j % n) + n) % n)];
    }
    bool hit = false;
    for (auto const& s : leaves) {
      hit = hit || s.find(w) != std::string::npos || s.find(inverse_string(w)) != std::string::npos;
    }
    good += hit ? 1 : 0;
  }
  return {good, n};
}

std::vector<std::string> const fib{"ab", "a"};

}  // namespace

TEST(LeafSegment, Examples) {
  auto f = rose_map(fib);
  EXPECT_EQ(as_string(leaf_segment(f, 0, 2).path), "aba");
  EXPECT_EQ(as_string(leaf_segment(f, 2, 3).path), "aba");
  EXPECT_EQ(as_string(leaf_segment(f, 0, 0).path), "a");
  EXPECT_THROW(leaf_segment(f, 4, 1), InputError);
  EXPECT_THROW(leaf_segment(f, 0, -1), InputError);
}

TEST(LeafSegment, MatchesSubstitution) {
  for (auto const& images : {fib, std::vector<std::string>{"aab", "ba"}, std::vector<std::string>{"ab", "ba"}}) {
    auto f = rose_map(images);
    for (int k = 0; k <= 9; ++k) {
      EXPECT_EQ(as_string(leaf_segment(f, 0, k).path), substitute(images, "a", k));
      EXPECT_EQ(as_string(leaf_segment(f, 2, k).path), substitute(images, "b", k));
    }
  }
}

TEST(WeakConvergence, MatchesOracle) {
  std::mt19937_64 rng(81);
  auto            f   = rose_map(fib);
  auto            cat = leaf_catalog(f, 3, 8);
  std::uniform_int_distribution<int> len(1, 25), pick(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::string loop;
    int         n = len(rng);
    while (static_cast<int>(loop.size()) < n) {
      char c = "abAB"[pick(rng)];
      if (!loop.empty() && inverse_string(std::string(1, c))[0] == loop.back()) {
        continue;
      }
      loop += c;
    }
    if (loop.size() > 1 && inverse_string(std::string(1, loop.front()))[0] == loop.back()) {
      continue;
    }
    for (int L = 0; L <= 3; ++L) {
      auto [g, m] = oracle_fraction(fib, loop, L, 8);
      EXPECT_EQ(weak_convergence_fraction(from_string(loop, 2), cat, L), Rational::make(g, m)) << loop << " L=" << L;
    }
  }
}

TEST(WeakConvergence, Examples) {
  auto f   = rose_map(fib);
  auto cat = leaf_catalog(f, 2, 10);
  // bb never occurs in a Fibonacci leaf
  EXPECT_EQ(weak_convergence_fraction(from_string("b", 2), cat, 1), (Rational{0, 1}));
  EXPECT_EQ(weak_convergence_fraction(leaf_segment(f, 0, 1).path, cat, 0), (Rational{1, 1}));
  EXPECT_THROW(weak_convergence_fraction(from_string("ab", 2), cat, 3), InputError);
  EXPECT_THROW(weak_convergence_fraction({}, cat, 1), InputError);
}

TEST(WeakConvergence, IteratesApproachLeaves) {
  // away from the junctions of f^k(e) pieces every window is a leaf window
  for (auto const& images : {fib, std::vector<std::string>{"aab", "ba"}}) {
    auto f   = rose_map(images);
    auto cat = leaf_catalog(f, 4, 12);
    for (std::string seed : {"ab", "aab", "abbb", "b"}) {
      for (int k = 1; k <= 8; ++k) {
        auto loop  = map_loop(f.power(k), from_string(seed, 2));
        auto delta = min_image_length(f, k);
        for (int L = 1; L <= 4; ++L) {
          auto frac  = weak_convergence_fraction(loop, cat, L);
          auto bound = Rational::make(delta - 2 * L, delta);
          EXPECT_FALSE(frac < bound) << seed << " k=" << k << " L=" << L;
        }
      }
    }
  }
}

TEST(QuasiPeriodicity, Examples) {
  auto aa = leaf_segment(rose_map({"aa"}), 0, 3);
  EXPECT_EQ(quasi_periodicity_probe(aa, 1, 10), 1);
  EXPECT_EQ(quasi_periodicity_probe(aa, 9, 20), std::nullopt);
  auto ab = leaf_segment(rose_map({"ab", "ab"}), 0, 4);  // (ab)^8
  EXPECT_EQ(quasi_periodicity_probe(ab, 1, 10), 2);
  EXPECT_EQ(quasi_periodicity_probe(ab, 2, 10), 3);
}

TEST(QuasiPeriodicity, MatchesBruteForce) {
  auto leaf = leaf_segment(rose_map(fib), 0, 10);
  auto s    = as_string(leaf.path);
  for (int L = 1; L <= 4; ++L) {
    std::optional<int> want;
    for (int lp = L; lp <= 40 && !want; ++lp) {
      bool ok = true;
      for (std::size_t i = 0; ok && i + static_cast<std::size_t>(L) <= s.size(); ++i) {
        auto w = s.substr(i, static_cast<std::size_t>(L));
        for (std::size_t st = 0; ok && st + static_cast<std::size_t>(lp) <= s.size(); ++st) {
          ok = s.substr(st, static_cast<std::size_t>(lp)).find(w) != std::string::npos;
        }
      }
      if (ok) {
        want = lp;
      }
    }
    EXPECT_EQ(quasi_periodicity_probe(leaf, L, 40), want) << L;
    EXPECT_TRUE(want.has_value());
  }
}

TEST(Independence, Examples) {
  auto f = rose_map(fib);
  EXPECT_EQ(independence_probe(f, f.power(2), 4, 8), IndependenceVerdict::indistinguishable_at_scale);
  EXPECT_EQ(independence_probe(f, rose_map({"aab", "ba"}), 2, 6), IndependenceVerdict::distinct_at_scale);
  EXPECT_THROW(independence_probe(f, rose_map({"aa"}), 2, 4), InputError);
}

TEST(Independence, SymmetricAndMonotone) {
  std::vector<GraphMap> maps{rose_map(fib), rose_map({"aab", "ba"}), rose_map({"ab", "ba"}), rose_map({"abb", "ba"})};
  for (auto const& f : maps) {
    for (auto const& g : maps) {
      bool seen = false;
      for (int L = 1; L <= 5; ++L) {
        auto v = independence_probe(f, g, L, 6);
        EXPECT_EQ(v, independence_probe(g, f, L, 6));
        bool d = v == IndependenceVerdict::distinct_at_scale;
        EXPECT_TRUE(d || !seen);
        seen = seen || d;
      }
    }
  }
}
