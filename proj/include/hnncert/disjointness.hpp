#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hnncert/errors.hpp"
#include "hnncert/pullback.hpp"
#include "hnncert/stallings.hpp"
#include "hnncert/words.hpp"

namespace hnncert {

// Folded graph of φ^N(F_n). Each edge carries a word of the domain so that
// the tags read along a basepoint loop multiply to a preimage of its label.
struct ImageSubgroup {
  Endomorphism      map;  // φ^N
  int               power = 0;
  LabeledGraph      graph;
  std::vector<Word> edge_tags;
  std::vector<std::string> warnings;
};

inline ImageSubgroup image_subgroup(Endomorphism const& e, int n) {
  if (n <= 0) {
    throw InputError("image power must be positive");
  }
  ImageSubgroup h{e.power(n), n, {}, {}, {}};
  int const     rank = e.rank();
  auto const&   ims  = h.map.images();
  LabeledGraph  raw  = wedge_of_loops(std::span<Word const>(ims), rank);
  std::vector<Word> tags(static_cast<std::size_t>(raw.num_edges()), Word(rank));
  // petals are laid out in generator order; the first edge of petal i
  // carries a_i (inverted when the edge was stored backwards)
  std::size_t at = 0;
  for (int i = 0; i < rank; ++i) {
    Letter first = ims[static_cast<std::size_t>(i)][0];
    tags[at]     = Word::reduced({first > 0 ? i + 1 : -(i + 1)}, rank);
    at += ims[static_cast<std::size_t>(i)].size();
  }
  auto folded = fold_with_tags(raw, tags);
  h.graph     = std::move(folded.graph);
  h.edge_tags = std::move(folded.edge_tags);
  if (!folded.tags_consistent) {
    h.warnings.push_back("endomorphism power " + std::to_string(n) + " is not injective");
  }
  return h;
}

namespace detail {

// Per vertex: (label word, tag word) along a breadth-first tree path from
// the basepoint.
struct TreePaths {
  std::vector<Word> label, tag;
};

inline TreePaths tree_paths(LabeledGraph const& g, std::vector<Word> const& tags) {
  int const rank = g.rank();
  TreePaths t{std::vector<Word>(static_cast<std::size_t>(g.num_vertices()), Word(rank)),
              std::vector<Word>(static_cast<std::size_t>(g.num_vertices()), Word(rank))};
  std::vector<char> seen(static_cast<std::size_t>(g.num_vertices()), 0);
  auto              out = g.out_edges();
  std::queue<int>   q;
  q.push(*g.basepoint());
  seen[static_cast<std::size_t>(*g.basepoint())] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int o : out[static_cast<std::size_t>(v)]) {
      int u = g.target(o);
      if (seen[static_cast<std::size_t>(u)]) {
        continue;
      }
      seen[static_cast<std::size_t>(u)] = 1;
      Word const& et = tags[static_cast<std::size_t>(o >> 1)];
      t.label[static_cast<std::size_t>(u)] =
          t.label[static_cast<std::size_t>(v)] * Word::reduced({g.label(o)}, rank);
      t.tag[static_cast<std::size_t>(u)] = t.tag[static_cast<std::size_t>(v)] * (o & 1 ? et.inverse() : et);
      q.push(u);
    }
  }
  return t;
}

}  // namespace detail

// True iff H ∩ gKg^{-1} = {e} for every g: no component of the product of
// the two graphs carries a loop.
inline bool all_conjugates_trivial_intersection(LabeledGraph const& h, LabeledGraph const& k) {
  auto p = fiber_product(core(h, false), core(k, false));
  auto s = component_stats(p.graph);
  for (int c = 0; c < s.comps.count; ++c) {
    if (s.rank(c) > 0) {
      return false;
    }
  }
  return true;
}

inline bool all_conjugates_trivial_intersection(ImageSubgroup const& h, ImageSubgroup const& k) {
  return all_conjugates_trivial_intersection(h.graph, k.graph);
}

// Rank of H ∩ gKg^{-1}: rebase K's graph at the end of g^{-1} (growing a
// hair where g^{-1} leaves the graph) and take the basepoint component of
// the product.
inline int conjugate_intersection_rank(LabeledGraph const& h, LabeledGraph const& k, Word const& g) {
  LabeledGraph kk    = k;
  auto const   table = k.transitions();
  int          at    = *k.basepoint();
  Word const   gi    = g.inverse();
  std::size_t  i     = 0;
  std::size_t const width = 2 * static_cast<std::size_t>(k.rank());
  for (; i < gi.size(); ++i) {
    int next = table[static_cast<std::size_t>(at) * width + k.slot(gi[i])];
    if (next < 0) {
      break;
    }
    at = next;
  }
  for (; i < gi.size(); ++i) {
    int v = kk.add_vertex();
    kk.add_edge(at, v, gi[i]);
    at = v;
  }
  kk.set_basepoint(at);
  auto p = fiber_product(h, kk);
  auto s = component_stats(p.graph);
  return s.rank(s.comps.of_vertex[static_cast<std::size_t>(*p.graph.basepoint())]);
}

struct DisjointAt {
  int power = 0;
};
struct NotDisjoint {
  int  i = 0, j = 0;    // endomorphism indices
  int  component_rank = 0;
  Word conjugator;      // g with φ_i^N ∩ g φ_j^N g^{-1} ∋ element
  Word element;
};
struct DisjointnessCapExceeded {
  int         last_power = 0;
  std::string reason;
};
using DisjointnessVerdict = std::variant<DisjointAt, NotDisjoint, DisjointnessCapExceeded>;

// A nontrivial element of H ∩ gKg^{-1} with its g, if one exists.
inline std::optional<NotDisjoint> intersection_witness(LabeledGraph const& h, LabeledGraph const& k) {
  auto p = fiber_product(h, k);
  auto s = component_stats(p.graph);
  for (int c = 0; c < s.comps.count; ++c) {
    if (s.rank(c) == 0) {
      continue;
    }
    auto loops = basis_loops(p.graph, s.comps, c, 1);
    auto const& loop = loops.front();
    int  x     = p.left[static_cast<std::size_t>(p.graph.source(loop.front()))];
    int  y     = p.right[static_cast<std::size_t>(p.graph.source(loop.front()))];
    std::vector<Letter> raw;
    for (int o : loop) {
      raw.push_back(p.graph.label(o));
    }
    Word w     = Word::reduced(raw, h.rank());
    auto ph    = detail::tree_paths(h, std::vector<Word>(static_cast<std::size_t>(h.num_edges()), Word(h.rank())));
    auto pk    = detail::tree_paths(k, std::vector<Word>(static_cast<std::size_t>(k.num_edges()), Word(k.rank())));
    Word const& a = ph.label[static_cast<std::size_t>(x)];
    Word const& b = pk.label[static_cast<std::size_t>(y)];
    NotDisjoint d;
    d.component_rank = s.rank(c);
    d.conjugator     = a * b.inverse();
    d.element        = a * w * a.inverse();
    return d;
  }
  return std::nullopt;
}

// Smallest N <= cap at which every pair of distinct images has trivial
// conjugate intersections. Each N is tested on its own.
inline DisjointnessVerdict essential_disjointness_power(std::vector<Endomorphism> const& endos, int cap = 8) {
  if (endos.size() < 2) {
    throw InputError("essential disjointness needs at least two endomorphisms");
  }
  for (auto const& e : endos) {
    if (e.rank() != endos.front().rank()) {
      throw InputError("endomorphisms of different rank");
    }
  }
  NotDisjoint last;
  for (int n = 1; n <= cap; ++n) {
    std::vector<ImageSubgroup> imgs;
    bool                       ok = true;
    try {
      for (auto const& e : endos) {
        imgs.push_back(image_subgroup(e, n));
      }
      for (std::size_t i = 0; i < imgs.size() && ok; ++i) {
        for (std::size_t j = i + 1; j < imgs.size() && ok; ++j) {
          if (!all_conjugates_trivial_intersection(imgs[i], imgs[j])) {
            ok = false;
            if (auto w = intersection_witness(imgs[i].graph, imgs[j].graph)) {
              last   = *w;
              last.i = static_cast<int>(i);
              last.j = static_cast<int>(j);
            }
          }
        }
      }
    } catch (BudgetError const& e) {
      return DisjointnessCapExceeded{n, e.what()};
    }
    if (ok) {
      return DisjointAt{n};
    }
  }
  return last;
}

// β with φ^s(β) conjugate to alpha, read off the tags of a loop spelling
// alpha in the image graph.
inline std::optional<Word> preimage_in_image(ImageSubgroup const& h, Word const& alpha) {
  if (alpha.empty()) {
    return Word(h.graph.rank());
  }
  if (!(cyclic_reduce(alpha).core == alpha)) {
    throw InputError("preimage_in_image needs a cyclically reduced word");
  }
  auto const        paths = detail::tree_paths(h.graph, h.edge_tags);
  auto const        table = h.graph.transitions();
  std::size_t const width = 2 * static_cast<std::size_t>(h.graph.rank());
  // oriented edge per (vertex, letter) so tags can be read along the way
  std::vector<int> edge_at(table.size(), -1);
  for (int o = 0; o < 2 * h.graph.num_edges(); ++o) {
    edge_at[static_cast<std::size_t>(h.graph.source(o)) * width + h.graph.slot(h.graph.label(o))] = o;
  }
  for (int v = 0; v < h.graph.num_vertices(); ++v) {
    int  at = v;
    Word t(h.graph.rank());
    bool ok = true;
    for (Letter x : alpha.letters()) {
      int o = edge_at[static_cast<std::size_t>(at) * width + h.graph.slot(x)];
      if (o < 0) {
        ok = false;
        break;
      }
      Word const& et = h.edge_tags[static_cast<std::size_t>(o >> 1)];
      t              = t * (o & 1 ? et.inverse() : et);
      at             = h.graph.target(o);
    }
    if (!ok || at != v) {
      continue;
    }
    Word const& p    = paths.tag[static_cast<std::size_t>(v)];
    Word        beta = cyclic_reduce(p * t * p.inverse()).core;
    if (conjugate_in_free_group(apply_endo(h.map, beta), alpha)) {
      return beta;
    }
  }
  return std::nullopt;
}

inline std::optional<Word> preimage_in_image(Endomorphism const& e, int s, Word const& alpha) {
  return preimage_in_image(image_subgroup(e, s), alpha);
}

}  // namespace hnncert
