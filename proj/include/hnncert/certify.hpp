#pragma once

#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hnncert/annuli.hpp"
#include "hnncert/disjointness.hpp"
#include "hnncert/errors.hpp"
#include "hnncert/expansion.hpp"
#include "hnncert/graph_map.hpp"
#include "hnncert/lamination.hpp"
#include "hnncert/pullback.hpp"
#include "hnncert/stallings.hpp"
#include "hnncert/words.hpp"

namespace hnncert {

using nlohmann::json;

inline constexpr char const* kVersion = "hnncert 0.1.0";

inline constexpr std::int64_t kMaxCommonPower = std::int64_t{1} << 20;

// Longest ring an audit may build before it is skipped.
inline constexpr std::int64_t kAuditRingBudget = 1 << 21;

struct Caps {
  int pullback      = 16;
  int disjointness  = 8;
  int expansion     = 64;
  int audit_loops   = 200;
  int audit_max_len = 20;
  int flaring_rho   = 4;
  friend bool operator==(Caps const&, Caps const&) = default;
};

// Train-track representative f with a change of marking h and its inverse,
// f ≃ h φ h^{-1}, all written as maps of the rose.
struct MarkingMap {
  Endomorphism representative;
  Endomorphism marking;
  Endomorphism inverse;
  friend bool operator==(MarkingMap const&, MarkingMap const&) = default;
};

struct CertificationConfig {
  int                                     rank = 0;
  std::vector<Endomorphism>               endos;
  std::vector<std::optional<MarkingMap>>  markings;  // empty or one per endo
  Caps                                    caps;
  std::uint64_t                           seed        = 1;
  bool                                    diagnostics = false;
  std::vector<std::string>                warnings;
};

// ---------------------------------------------------------------- parsing

namespace detail {

inline Word json_word(json const& v, int rank, std::string const& where) {
  try {
    if (v.is_string()) {
      return parse_word(v.get<std::string>(), rank);
    }
    if (v.is_array()) {
      std::vector<Letter> raw;
      for (auto const& x : v) {
        if (!x.is_number_integer()) {
          throw InputError("letters must be integers");
        }
        raw.push_back(x.get<int>());
      }
      return Word::reduced(raw, rank);
    }
  } catch (InputError const& e) {
    throw InputError(where + ": " + e.what());
  }
  throw InputError(where + ": a word is a letter string or an integer array");
}

inline Endomorphism json_endo(json const& v, int rank, std::string const& where) {
  if (!v.is_array()) {
    throw InputError(where + ": expected one image per generator");
  }
  if (static_cast<int>(v.size()) != rank) {
    throw InputError(where + ": " + std::to_string(v.size()) + " images for rank " + std::to_string(rank));
  }
  std::vector<Word> ims;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ims.push_back(json_word(v[i], rank, where + "/" + std::to_string(i)));
    if (ims.back().empty()) {
      throw InputError(where + "/" + std::to_string(i) + ": generator image is trivial");
    }
  }
  return Endomorphism(rank, std::move(ims));
}

inline int json_int(json const& v, std::string const& where, int lo) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < lo || v.get<std::int64_t>() > (1 << 30)) {
    throw InputError(where + ": expected an integer >= " + std::to_string(lo));
  }
  return v.get<int>();
}

inline void unknown_field(std::string const& where, bool lenient, std::vector<std::string>& warnings) {
  if (!lenient) {
    throw InputError(where + ": unknown field");
  }
  warnings.push_back(where + ": unknown field ignored");
}

inline json endo_json(Endomorphism const& e) {
  json a = json::array();
  for (auto const& w : e.images()) {
    a.push_back(to_string(w));
  }
  return a;
}

}  // namespace detail

inline CertificationConfig parse_config(std::string const& text, bool lenient = false) {
  json root;
  try {
    root = json::parse(text);
  } catch (json::parse_error const& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw InputError("/: expected an object");
  }
  CertificationConfig c;
  if (!root.contains("rank")) {
    throw InputError("/rank: missing");
  }
  if (!root["rank"].is_number_integer()) {
    throw InputError("/rank: expected an integer");
  }
  auto rank = root["rank"].get<std::int64_t>();
  if (rank < 1 || rank > 1024) {
    throw InputError("/rank: rank must be at least 2");
  }
  c.rank = static_cast<int>(rank);
  if (c.rank == 1) {
    c.warnings.push_back("/rank: rank 1 runs the degenerate single-generator mode");
  }
  if (!root.contains("endos") || !root["endos"].is_array() || root["endos"].empty()) {
    throw InputError("/endos: expected a nonempty array");
  }
  for (std::size_t i = 0; i < root["endos"].size(); ++i) {
    c.endos.push_back(detail::json_endo(root["endos"][i], c.rank, "/endos/" + std::to_string(i)));
  }
  for (auto const& [key, v] : root.items()) {
    if (key == "rank" || key == "endos") {
      continue;
    }
    if (key == "caps") {
      if (!v.is_object()) {
        throw InputError("/caps: expected an object");
      }
      for (auto const& [ck, cv] : v.items()) {
        std::string where = "/caps/" + ck;
        if (ck == "pullback") {
          c.caps.pullback = detail::json_int(cv, where, 1);
        } else if (ck == "disjointness") {
          c.caps.disjointness = detail::json_int(cv, where, 1);
        } else if (ck == "expansion") {
          c.caps.expansion = detail::json_int(cv, where, 1);
        } else if (ck == "audit_loops") {
          c.caps.audit_loops = detail::json_int(cv, where, 1);
        } else if (ck == "audit_max_len") {
          c.caps.audit_max_len = detail::json_int(cv, where, 1);
        } else if (ck == "flaring_rho") {
          c.caps.flaring_rho = detail::json_int(cv, where, 1);
        } else {
          detail::unknown_field(where, lenient, c.warnings);
        }
      }
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw InputError("/seed: expected a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "diagnostics") {
      if (!v.is_boolean()) {
        throw InputError("/diagnostics: expected a boolean");
      }
      c.diagnostics = v.get<bool>();
    } else if (key == "marking_maps") {
      if (!v.is_array() || v.size() != c.endos.size()) {
        throw InputError("/marking_maps: expected one entry (or null) per endomorphism");
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::string where = "/marking_maps/" + std::to_string(i);
        if (v[i].is_null()) {
          c.markings.emplace_back();
          continue;
        }
        if (!v[i].is_object()) {
          throw InputError(where + ": expected an object or null");
        }
        for (auto const& [mk, mv] : v[i].items()) {
          if (mk != "representative" && mk != "marking" && mk != "inverse") {
            detail::unknown_field(where + "/" + mk, lenient, c.warnings);
          }
        }
        auto get = [&](char const* k) {
          if (!v[i].contains(k)) {
            throw InputError(where + "/" + k + ": missing");
          }
          return detail::json_endo(v[i][k], c.rank, where + "/" + k);
        };
        c.markings.push_back(MarkingMap{get("representative"), get("marking"), get("inverse")});
      }
    } else {
      detail::unknown_field("/" + key, lenient, c.warnings);
    }
  }
  return c;
}

// Canonical form of a config: letter syntax, every cap spelled out.
inline json config_json(CertificationConfig const& c) {
  json j;
  j["rank"] = c.rank;
  j["endos"] = json::array();
  for (auto const& e : c.endos) {
    j["endos"].push_back(detail::endo_json(e));
  }
  j["caps"] = {{"pullback", c.caps.pullback},       {"disjointness", c.caps.disjointness},
               {"expansion", c.caps.expansion},     {"audit_loops", c.caps.audit_loops},
               {"audit_max_len", c.caps.audit_max_len}, {"flaring_rho", c.caps.flaring_rho}};
  j["seed"]        = c.seed;
  j["diagnostics"] = c.diagnostics;
  if (!c.markings.empty()) {
    j["marking_maps"] = json::array();
    for (auto const& m : c.markings) {
      if (!m) {
        j["marking_maps"].push_back(nullptr);
      } else {
        j["marking_maps"].push_back({{"representative", detail::endo_json(m->representative)},
                                     {"marking", detail::endo_json(m->marking)},
                                     {"inverse", detail::endo_json(m->inverse)}});
      }
    }
  }
  return j;
}

// 64-bit FNV-1a.
inline std::string fnv1a_hex(std::string const& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- evidence

struct EndoRecord {
  int                        index = 0;
  bool                       immersion      = false;
  std::string                train_track    = "skipped";  // train_track | illegal_turn | inconclusive
  bool                       irreducible    = false;
  double                     lambda         = 0.0;
  bool                       expanding      = false;
  bool                       non_surjective = false;
  bool                       marking_coherent = true;
  std::string                bilipschitz    = "1";
  std::string                pullback       = "skipped";  // stabilized | invariant_loop | cap_exceeded
  std::optional<int>         pullback_power;
  std::optional<std::string> invariant_loop;
  int                        degree = 0;
  int                        period = 0;
  std::string                expansion = "skipped";  // certified | periodic_loop | cap_exceeded
  std::optional<int>         expansion_power;
  std::string                expansion_target = "3";
  std::vector<std::string>   notes;
  friend bool operator==(EndoRecord const&, EndoRecord const&) = default;
};

struct PairRecord {
  int                        i = 0, j = 0;
  std::string                verdict;  // disjoint | not_disjoint | cap_exceeded
  std::optional<int>         power;
  std::optional<std::string> conjugator;
  std::optional<std::string> element;
  std::string                note;
  friend bool operator==(PairRecord const&, PairRecord const&) = default;
};

struct AuditSummary {
  bool         run        = false;
  std::int64_t power      = 0;
  int          words      = 0;
  int          annuli     = 0;
  int          violations = 0;
  int          thin_girth = 0;
  int          flaring    = 0;
  std::string  note;
  friend bool operator==(AuditSummary const&, AuditSummary const&) = default;
};

struct LaminationRecord {
  int                index = 0;
  std::optional<int> quasi_period;  // at window length 2
  std::string        min_weak_fraction;
  std::string        bound;
  friend bool operator==(LaminationRecord const&, LaminationRecord const&) = default;
};

struct IndependenceRecord {
  int         i = 0, j = 0;
  std::string verdict;
  friend bool operator==(IndependenceRecord const&, IndependenceRecord const&) = default;
};

struct Evidence {
  std::vector<EndoRecord>         endos;
  std::vector<PairRecord>         pairs;
  AuditSummary                    audit31;
  AuditSummary                    flaring;
  std::vector<LaminationRecord>   lamination;
  std::vector<IndependenceRecord> independence;
  friend bool operator==(Evidence const&, Evidence const&) = default;
};

struct Witness {
  std::string kind;  // invariant_loop | intersection
  int         endo   = -1;
  std::string loop;
  int         degree = 0;
  int         period = 0;
  int         i = -1, j = -1;
  std::string conjugator;
  std::string element;
  int         power = 0;
  friend bool operator==(Witness const&, Witness const&) = default;
};

struct Decision {
  std::string                verdict;  // certified_hyperbolic | obstruction_BS | not_disjoint | inconclusive
  std::optional<std::int64_t> N;
  std::optional<Witness>     witness;
  std::vector<std::string>   reasons;
  friend bool operator==(Decision const&, Decision const&) = default;
};

struct Certificate {
  Decision                 decision;
  Evidence                 evidence;
  json                     config;
  std::string              config_digest;
  std::string              version = kVersion;
  std::vector<std::string> warnings;
  friend bool operator==(Certificate const&, Certificate const&) = default;
};

inline int exit_code(Decision const& d) {
  if (d.verdict == "certified_hyperbolic") {
    return 0;
  }
  return d.verdict == "obstruction_BS" ? 2 : 3;
}

// lcm of the per-check powers, or nullopt past the cap.
inline std::optional<std::int64_t> common_power(Evidence const& ev) {
  std::int64_t n = 1;
  auto take = [&](std::optional<int> p) {
    if (p && n <= kMaxCommonPower) {
      n = std::lcm(n, static_cast<std::int64_t>(*p));
    }
  };
  for (auto const& e : ev.endos) {
    take(e.pullback_power);
    take(e.expansion_power);
  }
  for (auto const& p : ev.pairs) {
    take(p.power);
  }
  if (n > kMaxCommonPower) {
    return std::nullopt;
  }
  return n;
}

// Evidence-only phase: everything except the audits, which need N.
inline std::vector<std::string> prerequisite_failures(Evidence const& ev) {
  std::vector<std::string> r;
  for (auto const& e : ev.endos) {
    std::string p = "endo " + std::to_string(e.index + 1) + ": ";
    if (!e.immersion) {
      r.push_back(p + "not an immersion");
    }
    if (e.train_track != "train_track") {
      r.push_back(p + "train-track check " + e.train_track);
    }
    if (!e.irreducible) {
      r.push_back(p + "transition matrix is reducible");
    }
    if (!e.expanding) {
      r.push_back(p + "not expanding");
    }
    if (!e.non_surjective) {
      r.push_back(p + "surjective");
    }
    if (!e.marking_coherent) {
      r.push_back(p + "marking maps do not commute with the endomorphism");
    }
    if (e.pullback != "stabilized" || !e.pullback_power) {
      r.push_back(p + "pullback " + e.pullback);
    }
    if (e.expansion != "certified" || !e.expansion_power) {
      r.push_back(p + "expansion " + e.expansion);
    }
  }
  for (auto const& q : ev.pairs) {
    if (q.verdict != "disjoint" || !q.power) {
      r.push_back("pair " + std::to_string(q.i + 1) + "," + std::to_string(q.j + 1) + ": disjointness " + q.verdict);
    }
  }
  return r;
}

inline Decision decide(Evidence const& ev) {
  Decision d;
  for (auto const& e : ev.endos) {
    if (e.pullback == "invariant_loop" && e.invariant_loop && std::abs(e.degree) >= 2) {
      d.verdict = "obstruction_BS";
      d.witness = Witness{"invariant_loop", e.index, *e.invariant_loop, e.degree, e.period};
      return d;
    }
  }
  for (auto const& q : ev.pairs) {
    if (q.verdict == "not_disjoint") {
      d.verdict = "not_disjoint";
      Witness w;
      w.kind       = "intersection";
      w.i          = q.i;
      w.j          = q.j;
      w.conjugator = q.conjugator.value_or("");
      w.element    = q.element.value_or("");
      w.power      = q.power.value_or(0);
      d.witness    = w;
      return d;
    }
  }
  d.verdict = "inconclusive";
  d.reasons = prerequisite_failures(ev);
  if (!d.reasons.empty()) {
    return d;
  }
  auto n = common_power(ev);
  if (!n) {
    d.reasons.push_back("common power exceeds 2^20");
    return d;
  }
  for (auto const* a : {&ev.audit31, &ev.flaring}) {
    std::string name = a == &ev.audit31 ? "(3,1) audit" : "flaring audit";
    if (!a->run || a->power != *n) {
      d.reasons.push_back(name + " not run at N=" + std::to_string(*n) + (a->note.empty() ? "" : ": " + a->note));
    } else if (a->violations > 0) {
      d.reasons.push_back(name + ": " + std::to_string(a->violations) + " violations");
    }
  }
  if (!d.reasons.empty()) {
    return d;
  }
  d.verdict = "certified_hyperbolic";
  d.N       = *n;
  return d;
}

// ---------------------------------------------------------------- pipeline

namespace detail {

inline std::string rational_string(Rational r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

inline bool is_surjective(Endomorphism const& e) {
  auto g = subgroup_graph(e.images(), e.rank());
  for (int i = 1; i <= e.rank(); ++i) {
    if (!membership(g, Word::reduced({i}, e.rank()))) {
      return false;
    }
  }
  return true;
}

// h φ h^{-1} against the representative, and h h^{-1}, on sampled loops.
inline bool marking_commutes(Endomorphism const& phi, MarkingMap const& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int const       rank = phi.rank();
  for (int i = 0; i < 64; ++i) {
    Word w = i < rank ? Word::reduced({i + 1}, rank) : random_cyclic_word(rng, rank, 1 + static_cast<std::size_t>(i % 12));
    if (!conjugate_in_free_group(m.marking(m.inverse(w)), w) || !conjugate_in_free_group(m.inverse(m.marking(w)), w)) {
      return false;
    }
    if (!conjugate_in_free_group(m.representative(w), m.marking(phi(m.inverse(w))))) {
      return false;
    }
  }
  return true;
}

inline EndoRecord check_endo(CertificationConfig const& c, std::size_t i) {
  EndoRecord   r;
  r.index                = static_cast<int>(i);
  Endomorphism const& phi = c.endos[i];
  std::optional<MarkingMap> m;
  if (!c.markings.empty()) {
    m = c.markings[i];
  }
  Endomorphism const& rep = m ? m->representative : phi;
  Rational            target{3, 1};
  if (m) {
    r.marking_coherent = marking_commutes(phi, *m, c.seed + i);
    Rational k         = bilipschitz_constant_exact(GraphMap::from_endomorphism(m->marking),
                                                    GraphMap::from_endomorphism(m->inverse));
    r.bilipschitz      = rational_string(k);
    target             = Rational{3, 1} * k * k;
  }
  r.expansion_target = rational_string(target);
  r.non_surjective   = !is_surjective(phi);

  GraphMap f  = GraphMap::from_endomorphism(rep);
  r.immersion = is_immersion(f);
  auto tt     = verify_train_track(f);
  if (std::holds_alternative<TrainTrack>(tt)) {
    r.train_track = "train_track";
  } else if (std::holds_alternative<IllegalTurnFound>(tt)) {
    r.train_track = "illegal_turn";
  } else {
    r.train_track = "inconclusive";
    r.notes.push_back(std::get<Inconclusive>(tt).reason);
  }
  auto M        = transition_matrix(f);
  r.irreducible = is_irreducible_matrix(M);
  if (r.irreducible) {
    try {
      r.lambda = pf_eigenvalue(M);
    } catch (ConvergenceError const& e) {
      r.notes.push_back(e.what());
    }
    r.expanding = r.lambda > 1.0 + 1e-9;
  }

  if (r.immersion) {
    auto s = stabilization_power(f, c.caps.pullback);
    if (auto const* p = std::get_if<StabilizedAt>(&s)) {
      r.pullback       = "stabilized";
      r.pullback_power = p->power;
    } else if (auto const* l = std::get_if<InvariantLoop>(&s)) {
      r.pullback       = "invariant_loop";
      r.invariant_loop = to_string(path_word(l->loop, rep.rank()));
      r.degree         = l->degree;
      r.period         = l->period;
    } else {
      auto const& x = std::get<CapExceeded>(s);
      r.pullback    = "cap_exceeded";
      r.notes.push_back("pullback: " + x.reason);
    }
  }
  if (r.train_track == "train_track") {
    auto v = expansion_power(f, c.caps.expansion, target);
    if (auto const* p = std::get_if<ExpansionPower>(&v)) {
      r.expansion       = "certified";
      r.expansion_power = p->power;
    } else if (auto const* l = std::get_if<PeriodicLoop>(&v)) {
      r.expansion = "periodic_loop";
      r.notes.push_back("expansion: loop " + to_string(path_word(l->loop, rep.rank())) + " has period "
                        + std::to_string(l->period));
    } else {
      r.expansion = "cap_exceeded";
      r.notes.push_back("expansion: " + std::get<ExpansionCapExceeded>(v).reason);
    }
  }
  return r;
}

inline PairRecord check_pair(CertificationConfig const& c, std::size_t i, std::size_t j) {
  PairRecord r;
  r.i    = static_cast<int>(i);
  r.j    = static_cast<int>(j);
  auto v = essential_disjointness_power({c.endos[i], c.endos[j]}, c.caps.disjointness);
  if (auto const* p = std::get_if<DisjointAt>(&v)) {
    r.verdict = "disjoint";
    r.power   = p->power;
  } else if (auto const* n = std::get_if<NotDisjoint>(&v)) {
    r.verdict    = "not_disjoint";
    r.power      = c.caps.disjointness;
    r.conjugator = to_string(n->conjugator);
    r.element    = to_string(n->element);
  } else {
    r.verdict = "cap_exceeded";
    r.note    = std::get<DisjointnessCapExceeded>(v).reason;
  }
  return r;
}

inline void run_audits(CertificationConfig const& c, std::int64_t n, Evidence& ev) {
  ev.audit31.power = ev.flaring.power = n;
  std::vector<Endomorphism> maps;
  std::int64_t              longest = 1;
  try {
    for (auto const& e : c.endos) {
      // rings grow by at most the longest image per letter
      std::int64_t step = 1;
      for (std::int64_t k = 0; k < n && step <= kAuditRingBudget; ++k) {
        step *= static_cast<std::int64_t>(e.max_image_length());
      }
      longest = std::max(longest, step);
      if (step > kAuditRingBudget) {
        break;
      }
      maps.push_back(e.power(static_cast<int>(n)));
    }
  } catch (InputError const& e) {
    ev.audit31.note = ev.flaring.note = e.what();
    return;
  }
  // D_i D_j applies two maps to a loop of up to audit_max_len letters
  if (maps.size() != c.endos.size()
      || static_cast<double>(longest) * static_cast<double>(longest) * c.caps.audit_max_len
             > static_cast<double>(kAuditRingBudget)) {
    ev.audit31.note = ev.flaring.note = "rings at N=" + std::to_string(n) + " exceed the audit budget";
    return;
  }
  auto a                = audit_31_hyperbolicity(maps, {c.caps.audit_loops, static_cast<std::size_t>(c.caps.audit_max_len), c.seed});
  ev.audit31.run        = true;
  ev.audit31.words      = a.words;
  ev.audit31.annuli     = a.annuli;
  ev.audit31.violations = static_cast<int>(a.violations.size());
  auto f = flaring_audit_sample(maps, c.caps.flaring_rho,
                                {c.caps.audit_loops, static_cast<std::size_t>(c.caps.audit_max_len), c.seed + 1});
  ev.flaring.run        = true;
  ev.flaring.annuli     = f.annuli;
  ev.flaring.thin_girth = f.thin_girth;
  ev.flaring.flaring    = f.flaring;
  ev.flaring.violations = static_cast<int>(f.violations.size());
}

inline void run_lamination(CertificationConfig const& c, Evidence& ev) {
  int const L = 4, k = 8;
  std::vector<GraphMap> fs;
  for (std::size_t i = 0; i < c.endos.size(); ++i) {
    auto const& rep = c.markings.empty() || !c.markings[i] ? c.endos[i] : c.markings[i]->representative;
    fs.push_back(GraphMap::from_endomorphism(rep));
    LaminationRecord r;
    r.index = static_cast<int>(i);
    if (!ev.endos[i].expanding || !ev.endos[i].immersion) {
      r.min_weak_fraction = "skipped";
      ev.lamination.push_back(r);
      continue;
    }
    auto const& f = fs.back();
    r.quasi_period = quasi_periodicity_probe(leaf_segment(f, 0, k), 2, 64);
    auto      cat  = leaf_catalog(f, L, k);
    Rational  lo{1, 1};
    Rational  bound{1, 1};
    for (int e = 0; e < f.graph().num_edges(); ++e) {
      auto loop = map_loop(f.power(k), {2 * e});
      auto frac = weak_convergence_fraction(loop, cat, L);
      lo        = frac < lo ? frac : lo;
    }
    auto delta = min_image_length(f, k);
    bound      = delta > 2 * L ? Rational::make(delta - 2 * L, delta) : Rational{0, 1};
    r.min_weak_fraction = rational_string(lo);
    r.bound             = rational_string(bound);
    ev.lamination.push_back(r);
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      auto v = independence_probe(fs[i], fs[j], L, 6);
      ev.independence.push_back({static_cast<int>(i), static_cast<int>(j),
                                 v == IndependenceVerdict::distinct_at_scale ? "distinct_at_scale"
                                                                             : "indistinguishable_at_scale"});
    }
  }
}

}  // namespace detail

inline Certificate certify(CertificationConfig const& c) {
  if (c.rank < 1 || c.endos.empty()) {
    throw InputError("config needs a positive rank and at least one endomorphism");
  }
  Certificate cert;
  cert.config        = config_json(c);
  cert.config_digest = fnv1a_hex(cert.config.dump());
  cert.warnings      = c.warnings;
  Evidence& ev       = cert.evidence;
  for (std::size_t i = 0; i < c.endos.size(); ++i) {
    ev.endos.push_back(detail::check_endo(c, i));
  }
  for (std::size_t i = 0; i < c.endos.size(); ++i) {
    for (std::size_t j = i + 1; j < c.endos.size(); ++j) {
      ev.pairs.push_back(detail::check_pair(c, i, j));
    }
  }
  bool blocked = false;
  for (auto const& e : ev.endos) {
    blocked = blocked || (e.pullback == "invariant_loop" && std::abs(e.degree) >= 2);
  }
  if (!blocked && prerequisite_failures(ev).empty()) {
    if (auto n = common_power(ev)) {
      detail::run_audits(c, *n, ev);
    }
  }
  if (c.diagnostics) {
    detail::run_lamination(c, ev);
  }
  cert.decision = decide(ev);
  return cert;
}

// ---------------------------------------------------------------- reports

namespace detail {

template <class T>
void put_opt(json& j, char const* k, std::optional<T> const& v) {
  j[k] = v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(json const& j, char const* k) {
  if (!j.contains(k) || j.at(k).is_null()) {
    return std::nullopt;
  }
  return j.at(k).get<T>();
}

}  // namespace detail

inline void to_json(json& j, EndoRecord const& r) {
  j = {{"index", r.index},         {"immersion", r.immersion},
       {"train_track", r.train_track}, {"irreducible", r.irreducible},
       {"lambda", r.lambda},       {"expanding", r.expanding},
       {"non_surjective", r.non_surjective}, {"marking_coherent", r.marking_coherent},
       {"bilipschitz", r.bilipschitz}, {"pullback", r.pullback},
       {"degree", r.degree},       {"period", r.period},
       {"expansion", r.expansion}, {"expansion_target", r.expansion_target},
       {"notes", r.notes}};
  detail::put_opt(j, "pullback_power", r.pullback_power);
  detail::put_opt(j, "invariant_loop", r.invariant_loop);
  detail::put_opt(j, "expansion_power", r.expansion_power);
}

inline void from_json(json const& j, EndoRecord& r) {
  j.at("index").get_to(r.index);
  j.at("immersion").get_to(r.immersion);
  j.at("train_track").get_to(r.train_track);
  j.at("irreducible").get_to(r.irreducible);
  j.at("lambda").get_to(r.lambda);
  j.at("expanding").get_to(r.expanding);
  j.at("non_surjective").get_to(r.non_surjective);
  j.at("marking_coherent").get_to(r.marking_coherent);
  j.at("bilipschitz").get_to(r.bilipschitz);
  j.at("pullback").get_to(r.pullback);
  j.at("degree").get_to(r.degree);
  j.at("period").get_to(r.period);
  j.at("expansion").get_to(r.expansion);
  j.at("expansion_target").get_to(r.expansion_target);
  j.at("notes").get_to(r.notes);
  r.pullback_power  = detail::get_opt<int>(j, "pullback_power");
  r.invariant_loop  = detail::get_opt<std::string>(j, "invariant_loop");
  r.expansion_power = detail::get_opt<int>(j, "expansion_power");
}

inline void to_json(json& j, PairRecord const& r) {
  j = {{"i", r.i}, {"j", r.j}, {"verdict", r.verdict}, {"note", r.note}};
  detail::put_opt(j, "power", r.power);
  detail::put_opt(j, "conjugator", r.conjugator);
  detail::put_opt(j, "element", r.element);
}

inline void from_json(json const& j, PairRecord& r) {
  j.at("i").get_to(r.i);
  j.at("j").get_to(r.j);
  j.at("verdict").get_to(r.verdict);
  j.at("note").get_to(r.note);
  r.power      = detail::get_opt<int>(j, "power");
  r.conjugator = detail::get_opt<std::string>(j, "conjugator");
  r.element    = detail::get_opt<std::string>(j, "element");
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AuditSummary, run, power, words, annuli, violations, thin_girth, flaring, note)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IndependenceRecord, i, j, verdict)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Witness, kind, endo, loop, degree, period, i, j, conjugator, element, power)

inline void to_json(json& j, LaminationRecord const& r) {
  j = {{"index", r.index}, {"min_weak_fraction", r.min_weak_fraction}, {"bound", r.bound}};
  detail::put_opt(j, "quasi_period", r.quasi_period);
}

inline void from_json(json const& j, LaminationRecord& r) {
  j.at("index").get_to(r.index);
  j.at("min_weak_fraction").get_to(r.min_weak_fraction);
  j.at("bound").get_to(r.bound);
  r.quasi_period = detail::get_opt<int>(j, "quasi_period");
}

inline json certificate_json(Certificate const& c) {
  json j;
  j["verdict"] = c.decision.verdict;
  detail::put_opt(j, "N", c.decision.N);
  j["witness"] = c.decision.witness ? json(*c.decision.witness) : json(nullptr);
  j["reasons"] = c.decision.reasons;
  json ev;
  ev["endos"]   = c.evidence.endos;
  ev["pairs"]   = c.evidence.pairs;
  ev["audits"]  = {{"hyperbolicity_31", c.evidence.audit31}, {"flaring", c.evidence.flaring}};
  if (!c.evidence.lamination.empty() || !c.evidence.independence.empty()) {
    ev["lamination"] = {{"endos", c.evidence.lamination}, {"independence", c.evidence.independence}};
  }
  j["evidence"]      = ev;
  j["config"]        = c.config;
  j["config_digest"] = c.config_digest;
  j["version"]       = c.version;
  j["warnings"]      = c.warnings;
  return j;
}

inline Certificate parse_certificate(std::string const& text) {
  json        j = json::parse(text);
  Certificate c;
  c.decision.verdict = j.at("verdict").get<std::string>();
  c.decision.N       = detail::get_opt<std::int64_t>(j, "N");
  c.decision.witness = detail::get_opt<Witness>(j, "witness");
  j.at("reasons").get_to(c.decision.reasons);
  auto const& ev = j.at("evidence");
  ev.at("endos").get_to(c.evidence.endos);
  ev.at("pairs").get_to(c.evidence.pairs);
  ev.at("audits").at("hyperbolicity_31").get_to(c.evidence.audit31);
  ev.at("audits").at("flaring").get_to(c.evidence.flaring);
  if (ev.contains("lamination")) {
    ev.at("lamination").at("endos").get_to(c.evidence.lamination);
    ev.at("lamination").at("independence").get_to(c.evidence.independence);
  }
  c.config        = j.at("config");
  c.config_digest = j.at("config_digest").get<std::string>();
  c.version       = j.at("version").get<std::string>();
  j.at("warnings").get_to(c.warnings);
  return c;
}

inline std::string emit_text(Certificate const& c) {
  std::ostringstream o;
  o << "verdict: " << c.decision.verdict;
  if (c.decision.N) {
    o << "  N=" << *c.decision.N;
  }
  o << "\n";
  if (auto const& w = c.decision.witness) {
    if (w->kind == "invariant_loop") {
      o << "witness: endo " << w->endo + 1 << " sends [" << w->loop << "] to a conjugate of its power " << w->degree << " after "
        << w->period << " step(s)\n";
    } else {
      o << "witness: endos " << w->i + 1 << "," << w->j + 1 << " share " << w->element << " up to conjugation by "
        << (w->conjugator.empty() ? "1" : w->conjugator) << "\n";
    }
  }
  for (auto const& r : c.decision.reasons) {
    o << "  - " << r << "\n";
  }
  for (auto const& e : c.evidence.endos) {
    o << "endo " << e.index + 1 << ": immersion=" << e.immersion << " train_track=" << e.train_track
      << " irreducible=" << e.irreducible << " lambda=" << e.lambda << " non_surjective=" << e.non_surjective
      << " pullback=" << e.pullback;
    if (e.pullback_power) {
      o << "@" << *e.pullback_power;
    }
    o << " expansion=" << e.expansion;
    if (e.expansion_power) {
      o << "@" << *e.expansion_power;
    }
    o << "\n";
  }
  for (auto const& p : c.evidence.pairs) {
    o << "pair " << p.i + 1 << "," << p.j + 1 << ": " << p.verdict;
    if (p.power) {
      o << "@" << *p.power;
    }
    o << "\n";
  }
  for (auto const* a : {&c.evidence.audit31, &c.evidence.flaring}) {
    o << (a == &c.evidence.audit31 ? "audit (3,1): " : "audit flaring: ");
    if (a->run) {
      o << a->annuli << " annuli at N=" << a->power << ", " << a->violations << " violations\n";
    } else {
      o << "not run" << (a->note.empty() ? "" : " (" + a->note + ")") << "\n";
    }
  }
  for (auto const& l : c.evidence.lamination) {
    o << "lamination " << l.index + 1 << ": weak fraction " << l.min_weak_fraction << " (bound " << l.bound << ")";
    if (l.quasi_period) {
      o << ", quasi-period " << *l.quasi_period;
    }
    o << "\n";
  }
  for (auto const& p : c.evidence.independence) {
    o << "laminations " << p.i + 1 << "," << p.j + 1 << ": " << p.verdict << "\n";
  }
  for (auto const& w : c.warnings) {
    o << "warning: " << w << "\n";
  }
  o << "config " << c.config_digest << ", " << c.version << "\n";
  return o.str();
}

}  // namespace hnncert
