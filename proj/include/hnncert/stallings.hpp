#pragma once

// Labeled graphs over a rose and Stallings folding.
//
// An edge is stored once with a positive label; the oriented edge 2e runs
// source -> target reading `label`, and 2e+1 runs back reading `-label`.
// Vertex tags record the vertex of the target graph a vertex maps to; over a
// rose every tag is 0.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <queue>
#include <unordered_map>
#include <span>
#include <utility>
#include <vector>

#include "hnncert/errors.hpp"
#include "hnncert/words.hpp"

namespace hnncert {

struct LabeledEdge {
  int    source;
  int    target;
  Letter label;
  friend bool operator==(LabeledEdge const&, LabeledEdge const&) = default;
};

class LabeledGraph {
 public:
  LabeledGraph() = default;
  explicit LabeledGraph(int rank) : rank_(rank) {}

  int add_vertex(int tag = 0) {
    tags_.push_back(tag);
    return static_cast<int>(tags_.size()) - 1;
  }

  int add_edge(int source, int target, Letter label) {
    if (label == 0 || label > rank_ || label < -rank_) {
      throw InputError("edge label out of range");
    }
    if (label < 0) {
      std::swap(source, target);
      label = -label;
    }
    edges_.push_back({source, target, label});
    return static_cast<int>(edges_.size()) - 1;
  }

  int  rank() const noexcept { return rank_; }
  int  num_vertices() const noexcept { return static_cast<int>(tags_.size()); }
  int  num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  std::vector<LabeledEdge> const& edges() const noexcept { return edges_; }
  LabeledEdge const& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
  int  tag(int v) const { return tags_.at(static_cast<std::size_t>(v)); }
  std::vector<int> const& tags() const noexcept { return tags_; }

  std::optional<int> basepoint() const noexcept { return basepoint_; }
  void set_basepoint(std::optional<int> v) { basepoint_ = v; }

  // Oriented edge helpers.
  int    source(int o) const { auto const& e = edges_[o >> 1]; return o & 1 ? e.target : e.source; }
  int    target(int o) const { auto const& e = edges_[o >> 1]; return o & 1 ? e.source : e.target; }
  Letter label(int o) const { auto const& e = edges_[o >> 1]; return o & 1 ? -e.label : e.label; }

  // Oriented edges leaving each vertex; a loop contributes both orientations.
  std::vector<std::vector<int>> out_edges() const {
    std::vector<std::vector<int>> out(tags_.size());
    for (int e = 0; e < num_edges(); ++e) {
      out[static_cast<std::size_t>(edges_[e].source)].push_back(2 * e);
      out[static_cast<std::size_t>(edges_[e].target)].push_back(2 * e + 1);
    }
    return out;
  }

  std::size_t slot(Letter l) const {
    return l > 0 ? static_cast<std::size_t>(l - 1)
                 : static_cast<std::size_t>(rank_ - l - 1);
  }

  // Dense table: transitions()[v * 2n + slot(l)] = target or -1. Only
  // meaningful on folded graphs (later edges overwrite earlier ones).
  std::vector<int> transitions() const {
    std::size_t const width = 2 * static_cast<std::size_t>(rank_);
    std::vector<int>  t(tags_.size() * width, -1);
    for (auto const& e : edges_) {
      t[static_cast<std::size_t>(e.source) * width + slot(e.label)]  = e.target;
      t[static_cast<std::size_t>(e.target) * width + slot(-e.label)] = e.source;
    }
    return t;
  }

  // First vertex with two outgoing edges reading the same label.
  std::optional<int> fold_clash() const {
    std::size_t const width = 2 * static_cast<std::size_t>(rank_);
    std::vector<char> seen(tags_.size() * width, 0);
    for (int o = 0; o < 2 * num_edges(); ++o) {
      std::size_t idx = static_cast<std::size_t>(source(o)) * width + slot(label(o));
      if (seen[idx]) {
        return source(o);
      }
      seen[idx] = 1;
    }
    return std::nullopt;
  }

  bool is_folded() const { return !fold_clash().has_value(); }

  friend bool operator==(LabeledGraph const&, LabeledGraph const&) = default;

 private:
  int                      rank_ = 0;
  std::vector<int>         tags_;
  std::vector<LabeledEdge> edges_;
  std::optional<int>       basepoint_;
};

struct FoldResult {
  LabeledGraph graph;
  // Per output edge, the tag carried by its positive orientation (only
  // populated when tags were supplied).
  std::vector<Word> edge_tags;
  // Input vertex -> output vertex.
  std::vector<int> vertex_map;
  std::size_t      steps = 0;
  // False if two parallel edges with different tags were identified, which
  // means the tag homomorphism was not injective on the subgroup.
  bool tags_consistent = true;
};

namespace detail {

  class Folder {
   public:
    Folder(LabeledGraph const& g, std::vector<Word> const* tags)
        : g_(g),
          edges_(g.edges()),
          alive_edge_(edges_.size(), 1),
          alive_vertex_(static_cast<std::size_t>(g.num_vertices()), 1),
          incidence_(g.out_edges()) {
      if (tags != nullptr) {
        tags_ = *tags;
        have_tags_ = true;
      }
    }

    FoldResult run() {
      std::deque<int> work(static_cast<std::size_t>(g_.num_vertices()));
      std::iota(work.begin(), work.end(), 0);
      std::size_t const width = 2 * static_cast<std::size_t>(g_.rank());
      std::vector<int>  by_slot(width, -1);
      while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        if (!alive_vertex_[static_cast<std::size_t>(v)]) {
          continue;
        }
        std::fill(by_slot.begin(), by_slot.end(), -1);
        auto& inc = incidence_[static_cast<std::size_t>(v)];
        std::erase_if(inc, [&](int o) {
          return !alive_edge_[static_cast<std::size_t>(o >> 1)] || source(o) != v;
        });
        for (int o : inc) {
          std::size_t s = g_.slot(label(o));
          if (by_slot[s] == -1) {
            by_slot[s] = o;
            continue;
          }
          identify(by_slot[s], o);
          work.push_back(v);
          for (int u : touched_) {
            work.push_back(u);
          }
          break;
        }
      }
      return compact();
    }

   private:
    int source(int o) const {
      auto const& e = edges_[static_cast<std::size_t>(o >> 1)];
      return o & 1 ? e.target : e.source;
    }
    int target(int o) const {
      auto const& e = edges_[static_cast<std::size_t>(o >> 1)];
      return o & 1 ? e.source : e.target;
    }
    Letter label(int o) const {
      auto const& e = edges_[static_cast<std::size_t>(o >> 1)];
      return o & 1 ? -e.label : e.label;
    }
    Word oriented_tag(int o) const {
      auto const& t = tags_[static_cast<std::size_t>(o >> 1)];
      return o & 1 ? t.inverse() : t;
    }

    bool is_base(int v) const { return g_.basepoint() && *g_.basepoint() == v; }

    // Shift the potential at d by c: edges leaving d get c on the left,
    // edges entering d get c^{-1} on the right.
    void gauge(int d, Word const& c) {
      if (c.empty()) {
        return;
      }
      for (int o : incidence_[static_cast<std::size_t>(d)]) {
        auto e = static_cast<std::size_t>(o >> 1);
        if (!alive_edge_[e] || source(o) != d) {
          continue;
        }
        if (o & 1) {
          tags_[e] = tags_[e] * c.inverse();
        } else {
          tags_[e] = c * tags_[e];
        }
      }
    }

    void merge(int keep, int drop) {
      auto& from = incidence_[static_cast<std::size_t>(drop)];
      auto& to   = incidence_[static_cast<std::size_t>(keep)];
      for (int o : from) {
        auto e = static_cast<std::size_t>(o >> 1);
        if (!alive_edge_[e] || source(o) != drop) {
          continue;
        }
        if (o & 1) {
          edges_[e].target = keep;
        } else {
          edges_[e].source = keep;
        }
        to.push_back(o);
      }
      from.clear();
      alive_vertex_[static_cast<std::size_t>(drop)] = 0;
      forward_[drop] = keep;
    }

    void identify(int o1, int o2) {
      touched_.clear();
      ++steps_;
      int t1 = target(o1);
      int t2 = target(o2);
      if (t1 != t2) {
        bool drop_second = !is_base(t2);
        if (drop_second && !is_base(t1)
            && incidence_[static_cast<std::size_t>(t2)].size()
                   > incidence_[static_cast<std::size_t>(t1)].size()) {
          drop_second = false;
        }
        if (have_tags_) {
          Word c = drop_second ? oriented_tag(o1).inverse() * oriented_tag(o2)
                               : oriented_tag(o2).inverse() * oriented_tag(o1);
          gauge(drop_second ? t2 : t1, c);
        }
        int keep = drop_second ? t1 : t2;
        int drop = drop_second ? t2 : t1;
        merge(keep, drop);
        touched_.push_back(keep);
      }
      if (have_tags_ && oriented_tag(o1) != oriented_tag(o2)) {
        tags_consistent_ = false;
      }
      alive_edge_[static_cast<std::size_t>(o2 >> 1)] = 0;
    }

    int resolve(int v) const {
      while (true) {
        auto it = forward_.find(v);
        if (it == forward_.end()) {
          return v;
        }
        v = it->second;
      }
    }

    FoldResult compact() {
      FoldResult       r;
      std::vector<int> renumber(alive_vertex_.size(), -1);
      r.graph = LabeledGraph(g_.rank());
      for (std::size_t v = 0; v < alive_vertex_.size(); ++v) {
        if (alive_vertex_[v]) {
          renumber[v] = r.graph.add_vertex(g_.tag(static_cast<int>(v)));
        }
      }
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (!alive_edge_[e]) {
          continue;
        }
        int idx = r.graph.add_edge(renumber[static_cast<std::size_t>(edges_[e].source)],
                                   renumber[static_cast<std::size_t>(edges_[e].target)],
                                   edges_[e].label);
        (void) idx;
        if (have_tags_) {
          r.edge_tags.push_back(tags_[e]);
        }
      }
      r.vertex_map.resize(alive_vertex_.size());
      for (std::size_t v = 0; v < alive_vertex_.size(); ++v) {
        r.vertex_map[v] = renumber[static_cast<std::size_t>(resolve(static_cast<int>(v)))];
      }
      if (g_.basepoint()) {
        r.graph.set_basepoint(r.vertex_map[static_cast<std::size_t>(*g_.basepoint())]);
      }
      r.steps           = steps_;
      r.tags_consistent = tags_consistent_;
      return r;
    }

    LabeledGraph const&           g_;
    std::vector<LabeledEdge>      edges_;
    std::vector<char>             alive_edge_;
    std::vector<char>             alive_vertex_;
    std::vector<std::vector<int>> incidence_;
    std::vector<Word>             tags_;
    bool                          have_tags_       = false;
    bool                          tags_consistent_ = true;
    std::size_t                   steps_           = 0;
    std::vector<int>              touched_;
    std::unordered_map<int, int>  forward_;
  };

}  // namespace detail

inline FoldResult fold_with_tags(LabeledGraph const& g, std::vector<Word> const& edge_tags) {
  if (static_cast<int>(edge_tags.size()) != g.num_edges()) {
    throw InputError("one tag per edge required");
  }
  return detail::Folder(g, &edge_tags).run();
}

inline FoldResult fold_tracked(LabeledGraph const& g) {
  return detail::Folder(g, nullptr).run();
}

inline LabeledGraph fold(LabeledGraph const& g) {
  return fold_tracked(g).graph;
}

// Wedge of one petal per nonempty generator at basepoint 0 (unfolded).
inline LabeledGraph wedge_of_loops(std::span<Word const> generators, int rank) {
  LabeledGraph g(rank);
  int          base = g.add_vertex();
  g.set_basepoint(base);
  for (auto const& w : generators) {
    if (w.empty()) {
      continue;
    }
    int at = base;
    for (std::size_t i = 0; i < w.size(); ++i) {
      int next = i + 1 == w.size() ? base : g.add_vertex();
      g.add_edge(at, next, w[i]);
      at = next;
    }
  }
  return g;
}

inline LabeledGraph subgroup_graph(std::span<Word const> generators, int rank) {
  for (auto const& w : generators) {
    if (w.rank() != rank) {
      throw InputError("generator rank mismatch");
    }
  }
  return fold(wedge_of_loops(generators, rank));
}

inline LabeledGraph subgroup_graph(std::vector<Word> const& generators, int rank) {
  return subgroup_graph(std::span<Word const>(generators), rank);
}

// Vertex reached by reading w from `start`, if every letter is readable.
inline std::optional<int> read_word(LabeledGraph const& g, std::vector<int> const& table,
                                    int start, Word const& w) {
  std::size_t const width = 2 * static_cast<std::size_t>(g.rank());
  int               at    = start;
  for (Letter x : w.letters()) {
    at = table[static_cast<std::size_t>(at) * width + g.slot(x)];
    if (at < 0) {
      return std::nullopt;
    }
  }
  return at;
}

inline bool membership(LabeledGraph const& g, Word const& w) {
  if (!g.basepoint()) {
    throw PreconditionError("membership needs a based graph");
  }
  if (auto clash = g.fold_clash()) {
    throw PreconditionError("membership needs a folded graph; clash at vertex "
                            + std::to_string(*clash));
  }
  auto end = read_word(g, g.transitions(), *g.basepoint(), w);
  return end && *end == *g.basepoint();
}

struct SubgraphResult {
  LabeledGraph     graph;
  std::vector<int> vertex_map;  // old -> new, -1 if deleted
  std::vector<int> edge_map;    // old -> new, -1 if deleted
};

// Repeatedly deletes vertices of valence <= 1 (never a kept basepoint). The
// deletion order is a queue over the initial vertex order; the result does
// not depend on it.
inline SubgraphResult core_tracked(LabeledGraph const& g, bool keep_basepoint) {
  std::size_t const  nv = static_cast<std::size_t>(g.num_vertices());
  std::vector<int>   degree(nv, 0);
  std::vector<char>  edge_alive(static_cast<std::size_t>(g.num_edges()), 1);
  std::vector<char>  vertex_alive(nv, 1);
  auto               out = g.out_edges();
  for (auto const& e : g.edges()) {
    ++degree[static_cast<std::size_t>(e.source)];
    ++degree[static_cast<std::size_t>(e.target)];
  }
  auto protected_vertex = [&](int v) {
    return keep_basepoint && g.basepoint() && *g.basepoint() == v;
  };
  std::queue<int> q;
  for (int v = 0; v < static_cast<int>(nv); ++v) {
    if (degree[static_cast<std::size_t>(v)] <= 1 && !protected_vertex(v)) {
      q.push(v);
    }
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    if (!vertex_alive[static_cast<std::size_t>(v)]) {
      continue;
    }
    vertex_alive[static_cast<std::size_t>(v)] = 0;
    for (int o : out[static_cast<std::size_t>(v)]) {
      auto e = static_cast<std::size_t>(o >> 1);
      if (!edge_alive[e]) {
        continue;
      }
      edge_alive[e] = 0;
      int u         = g.target(o);
      degree[static_cast<std::size_t>(u)] -= 1;
      degree[static_cast<std::size_t>(v)] -= 1;
      if (vertex_alive[static_cast<std::size_t>(u)]
          && degree[static_cast<std::size_t>(u)] <= 1 && !protected_vertex(u)) {
        q.push(u);
      }
    }
  }
  SubgraphResult r;
  r.graph = LabeledGraph(g.rank());
  r.vertex_map.assign(nv, -1);
  r.edge_map.assign(static_cast<std::size_t>(g.num_edges()), -1);
  for (int v = 0; v < static_cast<int>(nv); ++v) {
    if (vertex_alive[static_cast<std::size_t>(v)]) {
      r.vertex_map[static_cast<std::size_t>(v)] = r.graph.add_vertex(g.tag(v));
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    if (edge_alive[static_cast<std::size_t>(e)]) {
      auto const& x = g.edge(e);
      r.edge_map[static_cast<std::size_t>(e)] =
          r.graph.add_edge(r.vertex_map[static_cast<std::size_t>(x.source)],
                           r.vertex_map[static_cast<std::size_t>(x.target)], x.label);
    }
  }
  if (keep_basepoint && g.basepoint()) {
    r.graph.set_basepoint(r.vertex_map[static_cast<std::size_t>(*g.basepoint())]);
  }
  return r;
}

inline LabeledGraph core(LabeledGraph const& g, bool keep_basepoint) {
  return core_tracked(g, keep_basepoint).graph;
}

// Component id per vertex (ids are 0..count-1 in order of first vertex).
struct Components {
  std::vector<int> of_vertex;
  int              count = 0;
};

inline Components connected_components(LabeledGraph const& g) {
  std::size_t const nv = static_cast<std::size_t>(g.num_vertices());
  std::vector<int>  parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (auto const& e : g.edges()) {
    int a = find(e.source);
    int b = find(e.target);
    if (a != b) {
      parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  }
  Components       c;
  std::vector<int> id(nv, -1);
  c.of_vertex.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    int root = find(static_cast<int>(v));
    if (id[static_cast<std::size_t>(root)] < 0) {
      id[static_cast<std::size_t>(root)] = c.count++;
    }
    c.of_vertex[v] = id[static_cast<std::size_t>(root)];
  }
  return c;
}

// First Betti number: E - V + #components.
inline int graph_rank(LabeledGraph const& g) {
  return g.num_edges() - g.num_vertices() + connected_components(g).count;
}

// Canonical breadth-first code of the basepoint component of a folded based
// graph; equal codes <=> isomorphic as based labeled graphs.
inline std::vector<int> canonical_code(LabeledGraph const& g) {
  if (!g.basepoint()) {
    throw PreconditionError("canonical_code needs a based graph");
  }
  if (!g.is_folded()) {
    throw PreconditionError("canonical_code needs a folded graph");
  }
  std::size_t const width = 2 * static_cast<std::size_t>(g.rank());
  auto const        table = g.transitions();
  std::vector<int>  order(static_cast<std::size_t>(g.num_vertices()), -1);
  std::vector<int>  queue{*g.basepoint()};
  order[static_cast<std::size_t>(*g.basepoint())] = 0;
  std::vector<int> code;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int v = queue[head];
    for (std::size_t s = 0; s < width; ++s) {
      int u = table[static_cast<std::size_t>(v) * width + s];
      if (u < 0) {
        code.push_back(-1);
        continue;
      }
      if (order[static_cast<std::size_t>(u)] < 0) {
        order[static_cast<std::size_t>(u)] = static_cast<int>(queue.size());
        queue.push_back(u);
      }
      code.push_back(order[static_cast<std::size_t>(u)]);
    }
  }
  return code;
}

// Words spelled by tree paths from the basepoint (breadth-first spanning
// tree), indexed by vertex; unreachable vertices get nullopt.
inline std::vector<std::optional<Word>> basepoint_paths(LabeledGraph const& g) {
  std::vector<std::optional<Word>> path(static_cast<std::size_t>(g.num_vertices()));
  if (!g.basepoint()) {
    throw PreconditionError("basepoint_paths needs a based graph");
  }
  auto out                                      = g.out_edges();
  path[static_cast<std::size_t>(*g.basepoint())] = Word(g.rank());
  std::queue<int> q;
  q.push(*g.basepoint());
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int o : out[static_cast<std::size_t>(v)]) {
      int u = g.target(o);
      if (!path[static_cast<std::size_t>(u)]) {
        path[static_cast<std::size_t>(u)] =
            *path[static_cast<std::size_t>(v)] * Word::reduced({g.label(o)}, g.rank());
        q.push(u);
      }
    }
  }
  return path;
}

}  // namespace hnncert
