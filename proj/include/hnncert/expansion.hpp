#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "hnncert/errors.hpp"
#include "hnncert/graph_map.hpp"

namespace hnncert {

struct InvariantForest {
  std::vector<char> edges;  // per edge of the domain
  bool              unique = true;  // false: the union of invariant forests has a cycle
  int size() const { return static_cast<int>(std::count(edges.begin(), edges.end(), 1)); }
  bool empty() const { return size() == 0; }
};

namespace detail {

// Union-find over vertices; true iff the chosen edges contain no cycle.
inline bool spans_forest(Graph const& g, std::vector<char> const& chosen) {
  std::vector<int> parent(static_cast<std::size_t>(g.num_vertices()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!chosen[static_cast<std::size_t>(e)]) {
      continue;
    }
    int a = find(g.source(2 * e));
    int b = find(g.target(2 * e));
    if (a == b) {
      return false;
    }
    parent[static_cast<std::size_t>(a)] = b;
  }
  return true;
}

// Smallest f-invariant edge set containing e.
inline std::vector<char> closure(GraphMap const& f, int e) {
  std::vector<char> in(static_cast<std::size_t>(f.graph().num_edges()), 0);
  std::vector<int>  stack{e};
  in[static_cast<std::size_t>(e)] = 1;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (OrientedEdge o : f.edge_images()[static_cast<std::size_t>(x)]) {
      if (!in[static_cast<std::size_t>(undirected(o))]) {
        in[static_cast<std::size_t>(undirected(o))] = 1;
        stack.push_back(undirected(o));
      }
    }
  }
  return in;
}

inline std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  constexpr std::int64_t big = std::numeric_limits<std::int64_t>::max() / 4;
  return std::min(big, a + b);
}

inline std::int64_t sat_mul(std::int64_t a, std::int64_t b) {
  constexpr std::int64_t big = std::numeric_limits<std::int64_t>::max() / 4;
  if (a != 0 && b > big / a) {
    return big;
  }
  return std::min(big, a * b);
}

}  // namespace detail

// Union of the closures that span forests. Any invariant forest is such a
// union, so if this is a forest it is the maximal one.
inline InvariantForest maximal_invariant_forest(GraphMap const& f) {
  Graph const&    g = f.graph();
  InvariantForest F{std::vector<char>(static_cast<std::size_t>(g.num_edges()), 0), true};
  for (int e = 0; e < g.num_edges(); ++e) {
    auto cl = detail::closure(f, e);
    if (detail::spans_forest(g, cl)) {
      for (std::size_t x = 0; x < cl.size(); ++x) {
        F.edges[x] = F.edges[x] || cl[x];
      }
    }
  }
  F.unique = detail::spans_forest(g, F.edges);
  return F;
}

inline bool is_invariant(GraphMap const& f, std::vector<char> const& edges) {
  for (int e = 0; e < f.graph().num_edges(); ++e) {
    if (!edges[static_cast<std::size_t>(e)]) {
      continue;
    }
    for (OrientedEdge o : f.edge_images()[static_cast<std::size_t>(e)]) {
      if (!edges[static_cast<std::size_t>(undirected(o))]) {
        return false;
      }
    }
  }
  return true;
}

struct CollapseResult {
  GraphMap         map;
  std::vector<int> vertex_map;  // old vertex -> quotient vertex
  std::vector<int> edge_map;    // old edge -> quotient edge, -1 if collapsed
  bool             immersion_preserved = true;
};

inline CollapseResult collapse_forest(GraphMap const& f, InvariantForest const& F) {
  Graph const& g = f.graph();
  if (static_cast<int>(F.edges.size()) != g.num_edges()) {
    throw InputError("forest does not match the graph");
  }
  if (!is_invariant(f, F.edges) || !detail::spans_forest(g, F.edges)) {
    throw PreconditionError("collapse needs an invariant forest");
  }
  CollapseResult r;
  if (F.empty()) {
    r.map = f;
    r.vertex_map.resize(static_cast<std::size_t>(g.num_vertices()));
    std::iota(r.vertex_map.begin(), r.vertex_map.end(), 0);
    r.edge_map.resize(static_cast<std::size_t>(g.num_edges()));
    std::iota(r.edge_map.begin(), r.edge_map.end(), 0);
    r.immersion_preserved = true;
    return r;
  }
  if (F.size() == g.num_edges()) {
    throw PreconditionError("collapsing the forest leaves no edges");
  }
  std::vector<int> parent(static_cast<std::size_t>(g.num_vertices()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    if (F.edges[static_cast<std::size_t>(e)]) {
      parent[static_cast<std::size_t>(find(g.source(2 * e)))] = find(g.target(2 * e));
    }
  }
  Graph            q;
  std::vector<int> cls(static_cast<std::size_t>(g.num_vertices()), -1);
  r.vertex_map.resize(cls.size());
  for (int v = 0; v < g.num_vertices(); ++v) {
    int root = find(v);
    if (cls[static_cast<std::size_t>(root)] < 0) {
      cls[static_cast<std::size_t>(root)] = q.add_vertex();
    }
    r.vertex_map[static_cast<std::size_t>(v)] = cls[static_cast<std::size_t>(root)];
  }
  r.edge_map.assign(static_cast<std::size_t>(g.num_edges()), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!F.edges[static_cast<std::size_t>(e)]) {
      r.edge_map[static_cast<std::size_t>(e)] =
          q.add_edge(r.vertex_map[static_cast<std::size_t>(g.source(2 * e))],
                     r.vertex_map[static_cast<std::size_t>(g.target(2 * e))], g.length(e));
    }
  }
  auto push = [&](OrientedEdge o) { return 2 * r.edge_map[static_cast<std::size_t>(undirected(o))] + (o & 1); };
  std::vector<int> vm;
  for (int v = 0; v < g.num_vertices(); ++v) {
    vm.push_back(r.vertex_map[static_cast<std::size_t>(f.vertex_image(v))]);
  }
  std::vector<int> qvm(static_cast<std::size_t>(q.num_vertices()));
  for (int v = 0; v < g.num_vertices(); ++v) {
    qvm[static_cast<std::size_t>(r.vertex_map[static_cast<std::size_t>(v)])] = vm[static_cast<std::size_t>(v)];
  }
  std::vector<std::vector<OrientedEdge>> images;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (F.edges[static_cast<std::size_t>(e)]) {
      continue;
    }
    std::vector<OrientedEdge> img;
    for (OrientedEdge o : f.edge_images()[static_cast<std::size_t>(e)]) {
      if (!F.edges[static_cast<std::size_t>(undirected(o))]) {
        img.push_back(push(o));
      }
    }
    auto tight = tighten_path(q, {qvm[static_cast<std::size_t>(r.vertex_map[static_cast<std::size_t>(g.source(2 * e))])], img});
    if (tight.empty()) {
      throw PreconditionError("edge " + std::to_string(e) + " collapses into the forest");
    }
    images.push_back(std::move(tight.edges));
  }
  r.map                 = GraphMap(std::move(q), std::move(qvm), std::move(images));
  r.immersion_preserved = !is_immersion(f) || is_immersion(r.map);
  return r;
}

struct ExpansionPower {
  int              power = 0;
  std::vector<int> per_edge;       // n_e on the (collapsed) graph
  int              forest_edges = 0;
  int              k            = 1;  // multiplier from the forest case
  int              inner_power  = 0;
};
struct PeriodicLoop {
  std::vector<OrientedEdge> loop;
  int                       period = 0;
};
struct ExpansionCapExceeded {
  std::string reason;
};
using ExpansionVerdict = std::variant<ExpansionPower, PeriodicLoop, ExpansionCapExceeded>;

// l(f^n(e)) for n = 0..cap, from the transition matrix (no cancellation
// in train-track iterates).
inline std::vector<std::vector<std::int64_t>> iterate_lengths(GraphMap const& f, int cap) {
  Graph const& g = f.graph();
  std::size_t  m = static_cast<std::size_t>(g.num_edges());
  IntMatrix    a = transition_matrix(f);
  std::vector<std::vector<std::int64_t>> out(m);
  for (std::size_t e = 0; e < m; ++e) {
    std::vector<std::int64_t> count(m, 0);  // occurrences of each edge in f^n(e)
    count[e] = 1;
    for (int n = 0; n <= cap; ++n) {
      std::int64_t len = 0;
      for (std::size_t j = 0; j < m; ++j) {
        len = detail::sat_add(len, detail::sat_mul(count[j], g.length(static_cast<int>(j))));
      }
      out[e].push_back(len);
      std::vector<std::int64_t> next(m, 0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          next[i] = detail::sat_add(next[i], detail::sat_mul(a(i, j), count[j]));
        }
      }
      count = std::move(next);
    }
  }
  return out;
}

namespace detail {

// A cycle in the subgraph spanned by `edges`, if any.
inline std::optional<std::vector<OrientedEdge>> cycle_in(Graph const& g, std::vector<char> const& edges) {
  std::vector<int> via(static_cast<std::size_t>(g.num_vertices()), -2);
  auto const       dirs = g.directions();
  for (int root = 0; root < g.num_vertices(); ++root) {
    if (via[static_cast<std::size_t>(root)] != -2) {
      continue;
    }
    via[static_cast<std::size_t>(root)] = -1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (OrientedEdge o : dirs[static_cast<std::size_t>(v)]) {
        if (!edges[static_cast<std::size_t>(undirected(o))] || o == reverse_edge(via[static_cast<std::size_t>(v)])) {
          continue;
        }
        int u = g.target(o);
        if (via[static_cast<std::size_t>(u)] == -2) {
          via[static_cast<std::size_t>(u)] = o;
          stack.push_back(u);
          continue;
        }
        // non-tree edge v -> u closes a cycle through the tree
        auto up = [&](int x) {
          std::vector<OrientedEdge> p;
          while (via[static_cast<std::size_t>(x)] >= 0) {
            p.push_back(via[static_cast<std::size_t>(x)]);
            x = g.source(via[static_cast<std::size_t>(x)]);
          }
          std::reverse(p.begin(), p.end());
          return p;  // root -> x
        };
        auto                      pv = up(v);
        auto                      pu = up(u);
        std::vector<OrientedEdge> loop(pv);
        loop.push_back(o);
        for (auto it = pu.rbegin(); it != pu.rend(); ++it) {
          loop.push_back(reverse_edge(*it));
        }
        auto t = cyclically_tighten(tighten_path(g, {root, loop}).edges);
        if (!t.empty()) {
          return t;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// N with l(f^N(α)) >= target·l(α) for every immersed loop α, target =
// num/den. Per-edge growth when there is no invariant forest; otherwise
// recurse on the collapsed map and multiply.
inline ExpansionVerdict expansion_power(GraphMap const& f, int cap = 64, Rational target = {3, 1}) {
  auto tt = verify_train_track(f);
  if (auto const* bad = std::get_if<IllegalTurnFound>(&tt)) {
    throw PreconditionError("f^" + std::to_string(bad->depth) + " of edge " + std::to_string(bad->edge)
                            + " crosses an illegal turn");
  }
  if (std::holds_alternative<Inconclusive>(tt)) {
    throw PreconditionError("train-track check inconclusive");
  }
  if (target < Rational{1, 1}) {
    throw InputError("expansion target below 1");
  }
  auto F = maximal_invariant_forest(f);
  if (!F.unique) {
    return ExpansionCapExceeded{"invariant forests do not have a forest union"};
  }
  if (!F.empty()) {
    auto c     = collapse_forest(f, F);
    auto inner = expansion_power(c.map, cap, target);
    auto* ip   = std::get_if<ExpansionPower>(&inner);
    if (!ip) {
      return inner;
    }
    // l(α) <= l'(α)·(1 + L_F / m), m the shortest surviving edge;
    // need target^(k-1) >= that ratio.
    Graph const& g  = f.graph();
    std::int64_t lf = 0;
    std::int64_t m  = std::numeric_limits<std::int64_t>::max();
    for (int e = 0; e < g.num_edges(); ++e) {
      if (F.edges[static_cast<std::size_t>(e)]) {
        lf += g.length(e);
      } else {
        m = std::min(m, g.length(e));
      }
    }
    Rational const ratio = Rational::make(m + lf, m);
    Rational       t{1, 1};
    int            k = 1;
    while (t < ratio) {
      t = t * target;
      ++k;
    }
    ExpansionPower r = *ip;
    r.inner_power    = ip->power;
    r.forest_edges   = F.size();
    r.k              = k;
    r.power          = k * ip->power;
    return r;
  }
  auto const     lens = iterate_lengths(f, cap);
  Graph const&   g    = f.graph();
  ExpansionPower r;
  std::vector<char> slow(static_cast<std::size_t>(g.num_edges()), 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    int ne = 0;
    for (int n = 1; n <= cap && ne == 0; ++n) {
      // l(f^n(e)) * den >= num * l(e)
      if (detail::sat_mul(lens[static_cast<std::size_t>(e)][static_cast<std::size_t>(n)], target.den)
          >= detail::sat_mul(target.num, g.length(e))) {
        ne = n;
      }
    }
    if (ne == 0) {
      slow[static_cast<std::size_t>(e)] = 1;
    }
    r.per_edge.push_back(ne);
    r.power = std::max(r.power, ne);
  }
  if (std::none_of(slow.begin(), slow.end(), [](char c) { return c; })) {
    return r;
  }
  // Some edges stay short: a loop among them that recurs under f
  // witnesses periodicity.
  if (auto cyc = detail::cycle_in(g, slow)) {
    std::map<std::vector<OrientedEdge>, int> seen;
    auto                                     cur = *cyc;
    for (int i = 0; i <= cap; ++i) {
      auto key = cyclic_canonical(cur);
      if (auto it = seen.find(key); it != seen.end()) {
        // recurrent from index it->second on
        auto first = *cyc;
        for (int j = 0; j < it->second; ++j) {
          first = map_loop(f, first);
        }
        return PeriodicLoop{cyclic_canonical(first), i - it->second};
      }
      seen.emplace(key, i);
      cur = map_loop(f, cur);
      if (cur.empty()) {
        break;
      }
    }
  }
  return ExpansionCapExceeded{"an edge stays shorter than the target after " + std::to_string(cap) + " iterates"};
}

// l(f^n(α)) for an immersed loop, by iterating map_loop (ground truth).
inline std::int64_t iterate_loop_length(GraphMap const& f, std::vector<OrientedEdge> loop, int n) {
  for (int i = 0; i < n; ++i) {
    loop = map_loop(f, loop);
  }
  return path_length(f.graph(), loop);
}

}  // namespace hnncert
