// Acceptance battery: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "hnncert/certify.hpp"
#include "oracles.hpp"

using namespace hnncert;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(char const* name, bool ok, std::string const& detail) {
  std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

GraphMap rose_map(std::vector<std::string> const& images) {
  int               rank = static_cast<int>(images.size());
  std::vector<Word> ws;
  for (auto const& s : images) {
    ws.push_back(parse_word(s, rank));
  }
  return GraphMap::from_endomorphism(Endomorphism(rank, ws));
}

std::vector<Word> random_subgroup(std::mt19937_64& rng) {
  std::uniform_int_distribution<int>         count(1, 3);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  std::vector<Word>                          gens;
  for (int i = count(rng); i > 0; --i) {
    gens.push_back(Word::reduced(oracle::random_reduced(rng, 2, len(rng)), 2));
  }
  return gens;
}

// Elements of H of length <= n: reduced closed paths at the basepoint.
std::vector<Word> short_elements(LabeledGraph const& g, std::size_t n) {
  auto const        table = g.transitions();
  std::size_t const width = 2 * static_cast<std::size_t>(g.rank());
  int const         base  = *g.basepoint();
  std::vector<Word> out;
  std::vector<int>  word;
  std::function<void(int)> walk = [&](int v) {
    if (v == base) {
      out.push_back(Word::reduced(word, g.rank()));
    }
    if (word.size() == n) {
      return;
    }
    for (int l = -g.rank(); l <= g.rank(); ++l) {
      if (l == 0 || (!word.empty() && word.back() == -l)) {
        continue;
      }
      int next = table[static_cast<std::size_t>(v) * width + g.slot(l)];
      if (next >= 0) {
        word.push_back(l);
        walk(next);
        word.pop_back();
      }
    }
  };
  walk(base);
  return out;
}

void word_kernel() {
  auto            t0 = Clock::now();
  std::mt19937_64 rng(101);
  int             bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    int  rank = 1 + trial % 4;
    auto raw  = oracle::random_raw(rng, rank, 64);
    Word w    = Word::reduced(raw, rank);
    bad += Word::reduced(w.letters(), rank) == w ? 0 : 1;
    bad += w.letters() == oracle::reduce_right_to_left(raw) ? 0 : 1;
    auto d = cyclic_reduce(w);
    bad += d.conjugator * d.core * d.conjugator.inverse() == w ? 0 : 1;
    bad += d.core.letters() == oracle::cyclic_core(w.letters()) ? 0 : 1;
    // a conjugate of w and an unrelated word
    Word g = Word::reduced(oracle::random_raw(rng, rank, 8), rank);
    Word y = g * w * g.inverse();
    Word z = Word::reduced(oracle::random_raw(rng, rank, 64), rank);
    bad += conjugate_in_free_group(w, y) == oracle::conjugate_by_rotation(w.letters(), y.letters()) ? 0 : 1;
    bad += conjugate_in_free_group(w, z) == oracle::conjugate_by_rotation(w.letters(), z.letters()) ? 0 : 1;
  }
  double s = seconds_since(t0);
  report("word_kernel", bad == 0 && s < 10, std::to_string(bad) + " disagreements, " + std::to_string(s) + " s");
}

void stallings_membership() {
  auto            t0 = Clock::now();
  std::mt19937_64 rng(103);
  auto            words = oracle::all_reduced_words(2, 8);
  int             graph_only = 0, enum_only = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto                          gens = random_subgroup(rng);
    std::vector<std::vector<int>> raw;
    for (auto const& g : gens) {
      raw.push_back(g.letters());
    }
    auto products = oracle::products_up_to(raw, 6);
    auto g        = subgroup_graph(gens, 2);
    for (auto const& w : words) {
      bool e = products.contains(w);
      bool m = membership(g, Word::reduced(w, 2));
      graph_only += m && !e ? 1 : 0;
      enum_only += e && !m ? 1 : 0;
    }
  }
  double s = seconds_since(t0);
  report("stallings_membership", graph_only == 0 && enum_only == 0 && s < 60,
         std::to_string(enum_only) + " enumerated non-members, " + std::to_string(graph_only)
             + " members needing more than 6 factors, " + std::to_string(s) + " s");
}

void fiber_product_rank() {
  auto            t0 = Clock::now();
  std::mt19937_64 rng(107);
  auto            conjugators = oracle::all_reduced_words(2, 4);
  int             checked = 0, bad = 0, over = 0;
  std::string     first;
  for (int trial = 0; trial < 50; ++trial) {
    auto h  = subgroup_graph(random_subgroup(rng), 2);
    auto k  = subgroup_graph(random_subgroup(rng), 2);
    auto hs = short_elements(h, 10);
    for (auto const& graw : conjugators) {
      Word              g = Word::reduced(graw, 2);
      // refold only when a hit is not already generated
      std::vector<Word> hits;
      LabeledGraph      sub = subgroup_graph(hits, 2);
      for (auto const& w : hs) {
        if (!w.empty() && !membership(sub, w) && membership(k, g.inverse() * w * g)) {
          hits.push_back(w);
          sub = subgroup_graph(hits, 2);
        }
      }
      int brute = graph_rank(sub);
      int rank  = conjugate_intersection_rank(h, k, g);
      ++checked;
      if (brute != rank) {
        ++bad;
        over += brute > rank ? 1 : 0;
        if (first.empty()) {
          first = "; first at g=" + to_string(g) + " (product " + std::to_string(rank) + ", enumerated "
                  + std::to_string(brute) + ")";
        }
      }
    }
  }
  report("fiber_product_rank", bad == 0,
         std::to_string(checked) + " (H,K,g) triples, " + std::to_string(bad) + " disagreements ("
             + std::to_string(over) + " with enumerated rank above the product)" + first + ", "
             + std::to_string(seconds_since(t0)) + " s");
}

void filtration_laws() {
  int         bad = 0;
  std::string depths;
  for (auto const& images : std::vector<std::vector<std::string>>{
           {"aa"}, {"ab", "ba"}, {"aa", "bb"}, {"aab", "ba"}, {"abaB", "Abb"}}) {
    auto f     = rose_map(images);
    int  depth = 8;
    Filtration F;
    while (depth > 0) {
      try {
        F = gamma_filtration(f, depth);
        break;
      } catch (BudgetError const&) {
        --depth;
      }
    }
    for (int i = 1; i <= depth; ++i) {
      bad += F.levels[static_cast<std::size_t>(i)].containment_holds ? 0 : 1;
    }
    bad += persistence_holds(F) ? 0 : 1;
    depths += " " + std::to_string(depth);
  }
  report("filtration_laws", bad == 0, std::to_string(bad) + " violations; depths reached" + depths);
}

void bs_obstruction() {
  auto t0   = Clock::now();
  auto c    = certify(parse_config(R"({"rank":1,"endos":[["aa"]]})"));
  double s  = seconds_since(t0);
  bool   ok = c.decision.verdict == "obstruction_BS" && c.decision.witness && c.decision.witness->loop == "a"
            && c.decision.witness->degree == 2 && s < 1;
  report("bs_obstruction", ok, c.decision.verdict + (c.decision.witness ? " loop " + c.decision.witness->loop + " d="
                                                                              + std::to_string(c.decision.witness->degree)
                                                                        : "")
                                   + ", " + std::to_string(s) + " s");
}

void expansion_certificate() {
  std::mt19937_64 rng(109);
  int             bad = 0, loops = 0;
  std::string     powers;
  for (auto const& images : std::vector<std::vector<std::string>>{
           {"aa"}, {"ab", "ba"}, {"aa", "bb"}, {"aab", "ba"}, {"abaB", "Abb"}, {"ab", "a"}}) {
    auto f = rose_map(images);
    auto v = expansion_power(f);
    if (!std::holds_alternative<ExpansionPower>(v)) {
      ++bad;
      continue;
    }
    int n = std::get<ExpansionPower>(v).power;
    powers += " " + std::to_string(n);
    if (!is_immersion(f)) {
      continue;  // a -> ab, b -> a only supplies the N = 3 check
    }
    int rank = f.graph().num_edges();
    std::uniform_int_distribution<std::size_t> len(1, 30);
    for (int i = 0; i < 1000; ++i) {
      auto loop = word_path(Word::reduced(oracle::random_cyclically_reduced(rng, rank, len(rng)), rank)).edges;
      ++loops;
      bad += iterate_loop_length(f, loop, n) >= 3 * static_cast<std::int64_t>(loop.size()) ? 0 : 1;
    }
  }
  auto fib = expansion_power(rose_map({"ab", "a"}));
  int  nf  = std::holds_alternative<ExpansionPower>(fib) ? std::get<ExpansionPower>(fib).power : -1;
  report("expansion_certificate", bad == 0 && nf == 3,
         std::to_string(loops) + " loops, " + std::to_string(bad) + " violations, powers" + powers
             + ", Fibonacci N=" + std::to_string(nf));
}

void pf_eigenvalue_exhaustive() {
  auto   t0      = Clock::now();
  int    checked = 0, bad = 0;
  double worst   = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    std::size_t cells = n * n, total = 1;
    for (std::size_t i = 0; i < cells; ++i) {
      total *= 4;
    }
    for (std::size_t code = 0; code < total; ++code) {
      IntMatrix   a(n);
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          a(i, j) = static_cast<std::int64_t>(c % 4);
          c /= 4;
        }
      }
      if (!is_irreducible_matrix(a)) {
        continue;
      }
      auto x = [&](std::size_t i, std::size_t j) { return static_cast<double>(a(i, j)); };
      std::vector<double> poly;
      if (n == 1) {
        poly = {1, -x(0, 0)};
      } else if (n == 2) {
        poly = {1, -(x(0, 0) + x(1, 1)), x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0)};
      } else {
        double tr  = x(0, 0) + x(1, 1) + x(2, 2);
        double m2  = x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0) + x(0, 0) * x(2, 2) - x(0, 2) * x(2, 0)
                   + x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1);
        double det = x(0, 0) * (x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1))
                   - x(0, 1) * (x(1, 0) * x(2, 2) - x(1, 2) * x(2, 0))
                   + x(0, 2) * (x(1, 0) * x(2, 1) - x(1, 1) * x(2, 0));
        poly = {1, -tr, m2, -det};
      }
      double want = oracle::largest_real_root(poly);
      double got  = pf_eigenvalue(a, 1e-12);
      double err  = std::abs(got - want);
      worst       = std::max(worst, err);
      bad += err <= 1e-9 ? 0 : 1;
      ++checked;
    }
  }
  double s = seconds_since(t0);
  std::ostringstream o;
  o << checked << " irreducible matrices, " << bad << " outside 1e-9, worst " << worst << ", " << s << " s";
  report("pf_eigenvalue", bad == 0 && s < 30, o.str());
}

std::vector<Endomorphism> certified_maps(Certificate const& c, CertificationConfig const& cfg) {
  std::vector<Endomorphism> maps;
  for (auto const& e : cfg.endos) {
    maps.push_back(e.power(static_cast<int>(*c.decision.N)));
  }
  return maps;
}

char const* const kCertifiable = R"({"rank":2,"endos":[["aab","ba"],["abaB","Abb"]]})";

void audit_31(Certificate const& c, std::vector<Endomorphism> const& maps) {
  auto rep = audit_31_hyperbolicity(maps, {200, 20, 7});
  report("audit_31", c.decision.verdict == "certified_hyperbolic" && rep.violations.empty()
                         && rep.words == static_cast<int>(admissible_words_of_length_two(2).size()),
         std::to_string(rep.words) + " words x 200 loops at N=" + std::to_string(c.decision.N.value_or(0)) + ", "
             + std::to_string(rep.violations.size()) + " violations");
}

void flaring(std::vector<Endomorphism> const& maps) {
  auto rep = flaring_audit_sample(maps, 4, {200, 20, 11});
  report("flaring", rep.violations.empty() && rep.flaring > 0,
         std::to_string(rep.annuli) + " annuli, " + std::to_string(rep.flaring) + " flaring, "
             + std::to_string(rep.thin_girth) + " thin girth, " + std::to_string(rep.violations.size())
             + " violations");
}

void admissibility(std::vector<Endomorphism> const& maps) {
  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int>         len(1, 4), gen(1, 2);
  std::uniform_int_distribution<std::size_t> loop_len(1, 8);
  int built = 0, bad = 0;
  while (built < 500) {
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
    auto a = build_from_anchor(random_cyclic_word(rng, 2, loop_len(rng)), w, maps);
    ++built;
    bad += is_admissible(a.word) && a.word == w && rings_consistent(a, maps) ? 0 : 1;
  }
  int rejected = 0;
  for (AnnulusWord const& w : {AnnulusWord{1, -1}, AnnulusWord{1, -2}}) {
    try {
      build_from_anchor(parse_word("ab", 2), w, maps);
    } catch (PreconditionError const&) {
      rejected += is_admissible(w) ? 0 : 1;
    }
  }
  report("admissibility", bad == 0 && rejected == 2,
         std::to_string(built) + " annuli, " + std::to_string(bad) + " bad, " + std::to_string(rejected)
             + "/2 counterexamples rejected");
}

void determinism() {
  auto        t0   = Clock::now();
  char const* text = R"({"rank":2,"endos":[["ab","ba"],["aa","bb"]]})";
  auto        a    = certificate_json(certify(parse_config(text))).dump(2);
  auto        b    = certificate_json(certify(parse_config(text))).dump(2);
  double      s    = seconds_since(t0);
  auto        j    = json::parse(a);
  report("determinism", a == b && s < 300,
         std::string(a == b ? "identical" : "different") + " bytes, verdict " + j["verdict"].get<std::string>() + ", "
             + std::to_string(s) + " s");
}

void lamination_bound() {
  auto f   = rose_map({"ab", "a"});
  auto cat = leaf_catalog(f, 4, 12);
  int  checked = 0, bad = 0;
  // legal loops only: their iterates are concatenations of edge iterates
  for (std::string seed : {"a", "b", "ab", "aab", "abb", "abab", "aabab", "ABA", "BAA"}) {
    auto loop0   = cyclically_tighten(word_path(parse_word(seed, 2)).edges);
    auto wrapped = loop0;
    wrapped.push_back(loop0.front());
    for (Turn t : crossed_turns(wrapped)) {
      bad += is_legal_turn(f, t) ? 0 : 1;
    }
    for (int k = 1; k <= 8; ++k) {
      auto loop  = map_loop(f.power(k), loop0);
      auto delta = min_image_length(f, k);
      for (int L = 1; L <= 4; ++L) {
        auto frac = weak_convergence_fraction(loop, cat, L);
        ++checked;
        bad += frac < Rational::make(delta - 2 * L, delta) ? 1 : 0;
      }
    }
  }
  // the commutator is fixed up to conjugacy and never approaches a leaf
  auto comm     = cyclically_tighten(word_path(parse_word("abAB", 2)).edges);
  int  comm_bad = 0;
  for (int k = 1; k <= 8; ++k) {
    auto delta = min_image_length(f, k);
    for (int L = 1; L <= 4; ++L) {
      comm_bad += weak_convergence_fraction(map_loop(f.power(k), comm), cat, L) < Rational::make(delta - 2 * L, delta);
    }
  }
  report("lamination_bound", bad == 0, std::to_string(checked) + " (loop,k,L) cases, " + std::to_string(bad)
                                           + " below 1-2L/delta_k; commutator abAB (excluded) below in "
                                           + std::to_string(comm_bad) + "/32");
}

}  // namespace

int main() {
  word_kernel();
  stallings_membership();
  fiber_product_rank();
  filtration_laws();
  bs_obstruction();
  expansion_certificate();
  pf_eigenvalue_exhaustive();
  auto cfg  = parse_config(kCertifiable);
  auto cert = certify(cfg);
  if (!cert.decision.N) {
    report("audit_31", false, "fixture not certified: " + cert.decision.verdict);
    report("flaring", false, "fixture not certified");
    report("admissibility", false, "fixture not certified");
  } else {
    auto maps = certified_maps(cert, cfg);
    audit_31(cert, maps);
    flaring(maps);
    admissibility(maps);
  }
  determinism();
  lamination_bound();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
