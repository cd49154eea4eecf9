#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "hnncert/disjointness.hpp"
#include "hnncert/errors.hpp"
#include "hnncert/graph_map.hpp"
#include "hnncert/words.hpp"

namespace hnncert {

// Letters ±k stand for D_k^{±1}, k = 1..r.
using AnnulusWord = std::vector<int>;

inline std::string annulus_word_string(AnnulusWord const& w) {
  std::string s;
  for (int x : w) {
    s += "D" + std::to_string(x < 0 ? -x : x) + (x < 0 ? "^-1" : "");
  }
  return s;
}

inline bool is_reduced_word(AnnulusWord const& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0 || (i > 0 && w[i] == -w[i - 1])) {
      return false;
    }
  }
  return true;
}

// Reduced, and no positive letter is followed by a negative one: a block of
// inverse letters, then a block of positive letters.
inline bool is_admissible(AnnulusWord const& w) {
  if (!is_reduced_word(w)) {
    return false;
  }
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i - 1] > 0 && w[i] < 0) {
      return false;
    }
  }
  return true;
}

// The stricter reading: the inverse block is a power of one generator.
inline bool is_admissible_strict(AnnulusWord const& w) {
  if (!is_admissible(w)) {
    return false;
  }
  int neg = 0;
  for (int x : w) {
    if (x < 0) {
      if (neg != 0 && x != neg) {
        return false;
      }
      neg = x;
    }
  }
  return true;
}

struct WordClass {
  bool positive       = false;
  bool unidirectional = false;
};

inline WordClass classify_word(AnnulusWord const& w) {
  if (!is_admissible(w)) {
    throw PreconditionError("classify_word needs an admissible word, got " + annulus_word_string(w));
  }
  WordClass c;
  c.positive       = std::all_of(w.begin(), w.end(), [](int x) { return x > 0; });
  c.unidirectional = !w.empty() && std::all_of(w.begin(), w.end(), [&](int x) { return x == w.front(); });
  return c;
}

// Rings Δ_{-m..m} stored left to right; letter t relates rings t and t+1.
// In based mode ring t+1 is τ_t·f(Δ_t)·τ_t^{-1} (or the same with the roles
// of the rings swapped for an inverse letter) and lengths are reduced
// lengths; in free mode rings are cyclically reduced.
struct Annulus {
  std::vector<Word> rings;
  AnnulusWord       word;
  std::vector<Word> traces;  // based mode only
  bool              based = false;
  int               rho   = 1;

  std::int64_t ring_length(std::size_t t) const {
    auto const& r = rings.at(t);
    return static_cast<std::int64_t>(based ? r.size() : cyclic_length(r));
  }
  std::vector<std::int64_t> lengths() const {
    std::vector<std::int64_t> l;
    for (std::size_t t = 0; t < rings.size(); ++t) {
      l.push_back(ring_length(t));
    }
    return l;
  }
  std::int64_t girth() const { return ring_length(rings.size() / 2); }
};

namespace detail {

inline Endomorphism const& letter_map(std::vector<Endomorphism> const& maps, int x) {
  int k = x < 0 ? -x : x;
  if (k < 1 || k > static_cast<int>(maps.size())) {
    throw InputError("annulus letter D" + std::to_string(k) + " has no map");
  }
  return maps[static_cast<std::size_t>(k - 1)];
}

inline Word free_image(Endomorphism const& e, Word const& w) { return cyclic_reduce(apply_endo(e, w)).core; }

}  // namespace detail

// Rings from the loop between the inverse block and the positive block.
inline Annulus build_from_anchor(Word const& anchor, AnnulusWord const& w, std::vector<Endomorphism> const& maps) {
  if (!is_admissible(w)) {
    throw PreconditionError("annulus word " + annulus_word_string(w) + " is not admissible");
  }
  if (anchor.empty()) {
    throw PreconditionError("annulus rings must be nontrivial loops");
  }
  std::size_t neg = 0;
  while (neg < w.size() && w[neg] < 0) {
    ++neg;
  }
  Annulus a;
  a.word = w;
  a.rings.assign(w.size() + 1, Word(anchor.rank()));
  a.rings[neg] = cyclic_reduce(anchor).core;
  for (std::size_t t = neg; t-- > 0;) {
    a.rings[t] = detail::free_image(detail::letter_map(maps, w[t]), a.rings[t + 1]);
  }
  for (std::size_t t = neg; t < w.size(); ++t) {
    a.rings[t + 1] = detail::free_image(detail::letter_map(maps, w[t]), a.rings[t]);
  }
  return a;
}

// Rings starting from alpha as the first ring. The inverse block needs a
// preimage of alpha under the composite of its maps.
inline Annulus build_annulus(Word const& alpha, AnnulusWord const& w, std::vector<Endomorphism> const& maps) {
  if (!is_admissible(w)) {
    throw PreconditionError("annulus word " + annulus_word_string(w) + " is not admissible");
  }
  Word const a0 = cyclic_reduce(alpha).core;
  if (a0.empty()) {
    throw PreconditionError("annulus rings must be nontrivial loops");
  }
  std::size_t neg = 0;
  while (neg < w.size() && w[neg] < 0) {
    ++neg;
  }
  if (neg == 0) {
    return build_from_anchor(a0, w, maps);
  }
  // ring 0 = f_{w_0} ∘ ... ∘ f_{w_{neg-1}} (anchor)
  Endomorphism comp = detail::letter_map(maps, w[0]);
  for (std::size_t t = 1; t < neg; ++t) {
    comp = comp.compose(detail::letter_map(maps, w[t]));
  }
  auto beta = preimage_in_image(comp, 1, a0);
  if (!beta) {
    throw ConstructionError("no preimage of " + to_string(a0) + " for the inverse block", static_cast<int>(neg));
  }
  Annulus a = build_from_anchor(*beta, w, maps);
  // the preimage gives a conjugate of alpha; store alpha itself
  if (!conjugate_in_free_group(a.rings[0], a0)) {
    throw ConstructionError("preimage does not reproduce alpha", static_cast<int>(neg));
  }
  a.rings[0] = a0;
  return a;
}

// Based annulus of one letter with a trace: Δ_1 = τ f(Δ_0) τ^{-1} for D_k,
// Δ_0 = τ f(Δ_1) τ^{-1} for D_k^{-1}. ρ = |τ| + 1.
inline Annulus build_thin_annulus(Word const& source, int letter, Word const& trace,
                                  std::vector<Endomorphism> const& maps) {
  auto const& e = detail::letter_map(maps, letter);
  Word        image = trace * apply_endo(e, source) * trace.inverse();
  Annulus     a;
  a.based  = true;
  a.word   = {letter};
  a.traces = {trace};
  a.rho    = static_cast<int>(trace.size()) + 1;
  a.rings  = letter > 0 ? std::vector<Word>{source, image} : std::vector<Word>{image, source};
  return a;
}

// Each consecutive pair is related by its letter, up to conjugacy.
inline bool rings_consistent(Annulus const& a, std::vector<Endomorphism> const& maps) {
  if (a.rings.size() != a.word.size() + 1) {
    return false;
  }
  for (std::size_t t = 0; t < a.word.size(); ++t) {
    auto const& e = detail::letter_map(maps, a.word[t]);
    bool        ok = a.word[t] > 0 ? conjugate_in_free_group(apply_endo(e, a.rings[t]), a.rings[t + 1])
                                   : conjugate_in_free_group(apply_endo(e, a.rings[t + 1]), a.rings[t]);
    if (!ok) {
      return false;
    }
  }
  return true;
}

// λ·l_0 <= max(l_{-n}, l_n) for 2n+1 ring lengths.
inline bool check_lambda_hyperbolic(std::vector<std::int64_t> const& lengths, Rational lambda, int n) {
  if (n < 0 || lengths.size() != static_cast<std::size_t>(2 * n + 1)) {
    throw InputError("expected " + std::to_string(2 * n + 1) + " rings, got " + std::to_string(lengths.size()));
  }
  std::int64_t l0 = lengths[static_cast<std::size_t>(n)];
  std::int64_t ln = std::max(lengths.front(), lengths.back());
  return lambda.num * l0 <= ln * lambda.den;
}

inline bool check_lambda_hyperbolic(Annulus const& a, Rational lambda, int n) {
  return check_lambda_hyperbolic(a.lengths(), lambda, n);
}

struct ThinGirth {};
struct FlaresWith {
  int lambda = 2;
};
struct FlaringViolation {
  std::int64_t l0 = 0, l1 = 0;
  int          rho = 0;
};
using FlaringVerdict = std::variant<FlaresWith, ThinGirth, FlaringViolation>;

// Orients the length-one annulus so its letter is positive, then compares
// l_1 with 2·l_0 above girth 2ρ.
inline FlaringVerdict flaring_verdict(std::int64_t l0, std::int64_t l1, int rho) {
  if (l0 <= 2 * static_cast<std::int64_t>(rho)) {
    return ThinGirth{};
  }
  if (l1 >= 2 * l0) {
    return FlaresWith{2};
  }
  return FlaringViolation{l0, l1, rho};
}

inline FlaringVerdict flaring_audit(Annulus const& a, int rho) {
  if (a.word.size() != 1 || a.rings.size() != 2) {
    throw InputError("flaring audit takes annuli of length one");
  }
  if (!is_admissible(a.word)) {
    throw PreconditionError("flaring audit on a non-admissible word");
  }
  bool forward = a.word[0] > 0;
  return flaring_verdict(a.ring_length(forward ? 0 : 1), a.ring_length(forward ? 1 : 0), rho);
}

// All admissible words of length 2 over r letters.
inline std::vector<AnnulusWord> admissible_words_of_length_two(int r) {
  std::vector<AnnulusWord> out;
  for (int x = -r; x <= r; ++x) {
    for (int y = -r; y <= r; ++y) {
      if (x != 0 && y != 0 && is_admissible({x, y})) {
        out.push_back({x, y});
      }
    }
  }
  return out;
}

struct LoopSample {
  int           count   = 200;
  std::size_t   max_len = 20;
  std::uint64_t seed    = 1;
};

inline Word random_cyclic_word(std::mt19937_64& rng, int rank, std::size_t len) {
  std::uniform_int_distribution<int> gen(1, rank);
  std::bernoulli_distribution        sign(0.5);
  while (true) {
    std::vector<int> r;
    while (r.size() < len) {
      int x = gen(rng) * (sign(rng) ? 1 : -1);
      if (!r.empty() && r.back() == -x) {
        continue;
      }
      r.push_back(x);
    }
    if (r.size() < 2 || r.front() != -r.back()) {
      return Word::reduced(r, rank);
    }
  }
}

struct AuditViolation {
  AnnulusWord               word;
  std::vector<Word>         rings;
  std::vector<std::int64_t> lengths;
};

struct Audit31Report {
  int                         words   = 0;
  int                         annuli  = 0;
  std::vector<AuditViolation> violations;
};

// Every admissible length-2 word against sampled loops, λ = 3, n = 1.
inline Audit31Report audit_31_hyperbolicity(std::vector<Endomorphism> const& maps, LoopSample const& sample) {
  if (maps.empty()) {
    throw InputError("audit needs at least one map");
  }
  int const       rank = maps.front().rank();
  std::mt19937_64 rng(sample.seed);
  std::uniform_int_distribution<std::size_t> len(1, sample.max_len);
  Audit31Report   rep;
  for (auto const& w : admissible_words_of_length_two(static_cast<int>(maps.size()))) {
    ++rep.words;
    for (int i = 0; i < sample.count; ++i) {
      Word    anchor = random_cyclic_word(rng, rank, len(rng));
      Annulus a      = build_from_anchor(anchor, w, maps);
      ++rep.annuli;
      if (!check_lambda_hyperbolic(a, Rational{3, 1}, 1)) {
        rep.violations.push_back({w, a.rings, a.lengths()});
      }
    }
  }
  return rep;
}

struct FlaringReport {
  int                           annuli     = 0;
  int                           thin_girth = 0;
  int                           flaring    = 0;
  std::vector<FlaringViolation> violations;
};

// ρ-thin based annuli of length one for ρ = 1..max_rho, with random traces.
inline FlaringReport flaring_audit_sample(std::vector<Endomorphism> const& maps, int max_rho, LoopSample const& sample) {
  int const       rank = maps.front().rank();
  int const       r    = static_cast<int>(maps.size());
  std::mt19937_64 rng(sample.seed);
  std::uniform_int_distribution<std::size_t> len(1, sample.max_len);
  std::uniform_int_distribution<int>         letter(1, r);
  std::bernoulli_distribution                sign(0.5);
  FlaringReport                              rep;
  for (int rho = 1; rho <= max_rho; ++rho) {
    std::uniform_int_distribution<std::size_t> tl(0, static_cast<std::size_t>(rho - 1));
    for (int i = 0; i < sample.count; ++i) {
      Word source = random_cyclic_word(rng, rank, len(rng));
      Word trace  = random_cyclic_word(rng, rank, tl(rng));
      trace       = Word::reduced(trace.letters(), rank);
      int     x   = letter(rng) * (sign(rng) ? 1 : -1);
      Annulus a   = build_thin_annulus(source, x, trace, maps);
      ++rep.annuli;
      auto v = flaring_audit(a, a.rho);
      if (std::holds_alternative<ThinGirth>(v)) {
        ++rep.thin_girth;
      } else if (std::holds_alternative<FlaresWith>(v)) {
        ++rep.flaring;
      } else {
        rep.violations.push_back(std::get<FlaringViolation>(v));
      }
    }
  }
  return rep;
}

}  // namespace hnncert
