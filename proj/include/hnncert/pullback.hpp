#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "hnncert/errors.hpp"
#include "hnncert/graph_map.hpp"
#include "hnncert/stallings.hpp"

namespace hnncert {

// Labels of a subdivided graph are edges of the target graph: petal e is
// letter e+1, traversed backwards it is -(e+1).
inline Letter edge_label(OrientedEdge o) { return (o & 1) ? -(undirected(o) + 1) : undirected(o) + 1; }

// f^i as a labeled immersion: every edge of the domain split into
// |f^i(e)| pieces, each mapping onto one edge.
struct Subdivision {
  int                           power = 0;
  LabeledGraph                  graph;
  // points[e][j]: fine vertex at position j along edge e (j = 0..|f^i(e)|).
  std::vector<std::vector<int>> points;
  // per fine edge: (original edge, index along it)
  std::vector<std::pair<int, int>> origin;
  std::vector<std::vector<OrientedEdge>> images;  // f^i(e)
  int                           original_vertices = 0;
};

inline Subdivision subdivide(GraphMap const& f, int i) {
  if (i < 0) {
    throw InputError("negative subdivision power");
  }
  GraphMap const fi = f.power(i);
  Graph const&   g  = f.graph();
  Subdivision    s;
  s.power             = i;
  s.graph             = LabeledGraph(g.num_edges());
  s.original_vertices = g.num_vertices();
  for (int v = 0; v < g.num_vertices(); ++v) {
    s.graph.add_vertex(fi.vertex_image(v));
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    auto const&      img = fi.edge_images()[static_cast<std::size_t>(e)];
    std::vector<int> pts{g.source(2 * e)};
    for (std::size_t j = 0; j + 1 < img.size(); ++j) {
      pts.push_back(s.graph.add_vertex(g.target(img[j])));
    }
    pts.push_back(g.target(2 * e));
    for (std::size_t j = 0; j < img.size(); ++j) {
      s.graph.add_edge(pts[j], pts[j + 1], edge_label(img[j]));
      s.origin.emplace_back(e, static_cast<int>(j));
    }
    s.points.push_back(std::move(pts));
    s.images.push_back(img);
  }
  return s;
}

// Walks a cyclically tight loop of fine edges back to a loop of original
// edges. The loop must pass through an original vertex.
inline std::vector<OrientedEdge> coarsen_loop(Subdivision const& s, std::vector<int> fine) {
  auto at_original = [&](int o) { return s.graph.source(o) < s.original_vertices; };
  auto it          = std::find_if(fine.begin(), fine.end(), at_original);
  if (it == fine.end()) {
    throw PreconditionError("loop avoids every original vertex");
  }
  std::rotate(fine.begin(), it, fine.end());
  std::vector<OrientedEdge> out;
  for (int o : fine) {
    auto [e, j]   = s.origin[static_cast<std::size_t>(o >> 1)];
    int const len = static_cast<int>(s.points[static_cast<std::size_t>(e)].size()) - 1;
    if (!(o & 1) && j == 0) {
      out.push_back(2 * e);
    } else if ((o & 1) && j == len - 1) {
      out.push_back(2 * e + 1);
    }
  }
  return out;
}

struct FiberProduct {
  LabeledGraph     graph;
  std::vector<int> left, right;            // vertex projections
  std::vector<int> left_edge, right_edge;  // edge projections (positive orientations)
  std::unordered_map<std::uint64_t, int> index;

  std::optional<int> vertex_of(int x, int y) const {
    auto it = index.find(key(x, y));
    if (it == index.end()) {
      return std::nullopt;
    }
    return it->second;
  }
  static std::uint64_t key(int x, int y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
  }
};

inline void require_immersion(LabeledGraph const& g, char const* which) {
  if (auto v = g.fold_clash()) {
    throw PreconditionError(std::string(which) + " is not an immersion at vertex " + std::to_string(*v));
  }
}

// Pairs of edges with equal labels. Vertices are the pairs incident to such
// an edge, plus the basepoint pair when both factors are based; isolated
// pairs carry no topology and are left out. Throws BudgetError past
// max_edges product edges.
inline FiberProduct fiber_product(LabeledGraph const& a, LabeledGraph const& b,
                                  std::size_t max_edges = std::size_t{1} << 22) {
  if (a.rank() != b.rank()) {
    throw InputError("fiber product factors have different alphabets");
  }
  require_immersion(a, "left factor");
  require_immersion(b, "right factor");
  FiberProduct p;
  p.graph = LabeledGraph(a.rank());
  auto vertex = [&](int x, int y) {
    auto [it, fresh] = p.index.try_emplace(FiberProduct::key(x, y), p.graph.num_vertices());
    if (fresh) {
      p.graph.add_vertex(a.tag(x));
      p.left.push_back(x);
      p.right.push_back(y);
    }
    return it->second;
  };
  if (a.basepoint() && b.basepoint()) {
    if (a.tag(*a.basepoint()) != b.tag(*b.basepoint())) {
      throw InputError("basepoints lie over different vertices");
    }
    p.graph.set_basepoint(vertex(*a.basepoint(), *b.basepoint()));
  }
  std::vector<std::vector<int>> by_label(static_cast<std::size_t>(b.rank()) + 1);
  for (int e = 0; e < b.num_edges(); ++e) {
    by_label[static_cast<std::size_t>(b.edge(e).label)].push_back(e);
  }
  std::size_t total = 0;
  for (int e = 0; e < a.num_edges(); ++e) {
    total += by_label[static_cast<std::size_t>(a.edge(e).label)].size();
  }
  if (total > max_edges) {
    throw BudgetError("fiber product needs " + std::to_string(total) + " edges");
  }
  for (int e = 0; e < a.num_edges(); ++e) {
    auto const& ea = a.edge(e);
    for (int f : by_label[static_cast<std::size_t>(ea.label)]) {
      auto const& eb = b.edge(f);
      int         s  = vertex(ea.source, eb.source);
      int         t  = vertex(ea.target, eb.target);
      p.graph.add_edge(s, t, ea.label);
      p.left_edge.push_back(e);
      p.right_edge.push_back(f);
    }
  }
  return p;
}

inline Subdivision subdivide_immersion(GraphMap const& f, int i) {
  Subdivision s = subdivide(f, i);
  if (auto v = s.graph.fold_clash()) {
    throw PreconditionError("map is not an immersion at vertex " + std::to_string(*v));
  }
  return s;
}

// Fiber product of two immersions of the same graph.
inline FiberProduct fiber_product(GraphMap const& f, GraphMap const& g) {
  if (!(f.graph() == g.graph())) {
    throw InputError("fiber product of maps with different codomains");
  }
  return fiber_product(subdivide_immersion(f, 1).graph, subdivide_immersion(g, 1).graph);
}

// Per-component sizes of a labeled graph.
struct ComponentStats {
  Components       comps;
  std::vector<int> vertices, edges;
  int rank(int c) const {
    return edges[static_cast<std::size_t>(c)] - vertices[static_cast<std::size_t>(c)] + 1;
  }
};

inline ComponentStats component_stats(LabeledGraph const& g) {
  ComponentStats s;
  s.comps = connected_components(g);
  s.vertices.assign(static_cast<std::size_t>(s.comps.count), 0);
  s.edges.assign(static_cast<std::size_t>(s.comps.count), 0);
  for (int c : s.comps.of_vertex) {
    ++s.vertices[static_cast<std::size_t>(c)];
  }
  for (auto const& e : g.edges()) {
    ++s.edges[static_cast<std::size_t>(s.comps.of_vertex[static_cast<std::size_t>(e.source)])];
  }
  return s;
}

struct FiltrationLevel {
  Subdivision    sub;
  FiberProduct   product;
  ComponentStats stats;
  std::vector<char> has_old;  // per component: meets the previous level
  // previous-level product vertex -> vertex here (empty at level 0)
  std::vector<int> embed;
  bool             containment_holds = true;
  std::string      containment_detail;
};

struct Filtration {
  GraphMap                     f;
  std::vector<FiltrationLevel> levels;
  int depth() const { return static_cast<int>(levels.size()) - 1; }
};

namespace detail {

// Level i-1 positions along each edge land at prefix sums of |f(c_j)|.
inline std::vector<int> point_embedding(GraphMap const& f, Subdivision const& prev, Subdivision const& next) {
  std::vector<int> m(static_cast<std::size_t>(prev.graph.num_vertices()), -1);
  for (int v = 0; v < prev.original_vertices; ++v) {
    m[static_cast<std::size_t>(v)] = v;
  }
  for (std::size_t e = 0; e < prev.points.size(); ++e) {
    auto const& pp  = prev.points[e];
    auto const& np  = next.points[e];
    std::size_t pos = 0;
    for (std::size_t j = 0; j < pp.size(); ++j) {
      m[static_cast<std::size_t>(pp[j])] = np.at(pos);
      if (j < prev.images[e].size()) {
        pos += f.image(prev.images[e][j]).size();
      }
    }
  }
  return m;
}

inline std::vector<int> tighten_oriented(std::vector<int> const& path) {
  std::vector<int> st;
  for (int o : path) {
    if (!st.empty() && st.back() == reverse_edge(o)) {
      st.pop_back();
    } else {
      st.push_back(o);
    }
  }
  return st;
}

inline std::vector<OrientedEdge> label_path(GraphMap const& f, Letter l) {
  OrientedEdge o = l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1;
  return f.image(o);
}

}  // namespace detail

inline FiltrationLevel make_level(GraphMap const& f, int i, std::size_t max_edges) {
  FiltrationLevel L;
  L.sub     = subdivide_immersion(f, i);
  L.product = fiber_product(L.sub.graph, L.sub.graph, max_edges);
  L.stats   = component_stats(L.product.graph);
  L.has_old.assign(static_cast<std::size_t>(L.stats.comps.count), 0);
  return L;
}

// Γ_i as a union of components of Γ_{i+1}: every old product edge must read
// f(label) from its embedded source to its embedded target, each old
// component must land in its own new component, and edge counts must agree.
inline void link_levels(GraphMap const& f, FiltrationLevel const& prev, FiltrationLevel& next) {
  auto fail = [&](std::string why) {
    next.containment_holds  = false;
    next.containment_detail = std::move(why);
  };
  auto const pm = detail::point_embedding(f, prev.sub, next.sub);
  auto const& pg = prev.product.graph;
  next.embed.assign(static_cast<std::size_t>(pg.num_vertices()), -1);
  for (int v = 0; v < pg.num_vertices(); ++v) {
    int x = pm[static_cast<std::size_t>(prev.product.left[static_cast<std::size_t>(v)])];
    int y = pm[static_cast<std::size_t>(prev.product.right[static_cast<std::size_t>(v)])];
    auto w = next.product.vertex_of(x, y);
    if (!w) {
      fail("old vertex " + std::to_string(v) + " missing");
      return;
    }
    next.embed[static_cast<std::size_t>(v)] = *w;
  }
  auto const  table = next.product.graph.transitions();
  std::size_t width = 2 * static_cast<std::size_t>(pg.rank());
  std::vector<std::int64_t> pushed(static_cast<std::size_t>(next.stats.comps.count), 0);
  std::vector<int>          owner(static_cast<std::size_t>(next.stats.comps.count), -1);
  for (int v = 0; v < pg.num_vertices(); ++v) {
    int c  = next.stats.comps.of_vertex[static_cast<std::size_t>(next.embed[static_cast<std::size_t>(v)])];
    int pc = prev.stats.comps.of_vertex[static_cast<std::size_t>(v)];
    auto& o = owner[static_cast<std::size_t>(c)];
    if (o >= 0 && o != pc) {
      fail("two old components share a new one");
      return;
    }
    o                                  = pc;
    next.has_old[static_cast<std::size_t>(c)] = 1;
  }
  for (auto const& e : pg.edges()) {
    int at = next.embed[static_cast<std::size_t>(e.source)];
    auto path = detail::label_path(f, e.label);
    for (OrientedEdge o : path) {
      at = table[static_cast<std::size_t>(at) * width + pg.slot(edge_label(o))];
      if (at < 0) {
        fail("image of an old edge is not readable");
        return;
      }
    }
    if (at != next.embed[static_cast<std::size_t>(e.target)]) {
      fail("image of an old edge ends in the wrong place");
      return;
    }
    pushed[static_cast<std::size_t>(next.stats.comps.of_vertex[static_cast<std::size_t>(at)])] +=
        static_cast<std::int64_t>(path.size());
  }
  for (int c = 0; c < next.stats.comps.count; ++c) {
    if (next.has_old[static_cast<std::size_t>(c)]
        && pushed[static_cast<std::size_t>(c)] != next.stats.edges[static_cast<std::size_t>(c)]) {
      fail("component " + std::to_string(c) + " is larger than the image of the old one");
      return;
    }
  }
}

// Γ_0 (the diagonal) through Γ_{i_max}.
inline Filtration gamma_filtration(GraphMap const& f, int i_max, std::size_t max_edges = std::size_t{1} << 22) {
  if (i_max < 0) {
    throw InputError("negative filtration depth");
  }
  if (!is_immersion(f)) {
    subdivide_immersion(f, 1);  // names the vertex
    throw PreconditionError("map is not an immersion");
  }
  Filtration F{f, {}};
  F.levels.push_back(make_level(f, 0, max_edges));
  std::fill(F.levels[0].has_old.begin(), F.levels[0].has_old.end(), 1);
  for (int i = 1; i <= i_max; ++i) {
    F.levels.push_back(make_level(f, i, max_edges));
    link_levels(f, F.levels[static_cast<std::size_t>(i - 1)], F.levels.back());
  }
  return F;
}

enum class HatKind { tree, single_loop, higher_rank };

struct HatComponent {
  int     component = 0;
  int     vertices  = 0;
  int     edges     = 0;
  int     rank      = 0;
  int     core_edges = 0;
  HatKind kind      = HatKind::tree;
};

// Components of Γ_i that meet no vertex of Γ_{i-1}, trees included.
inline std::vector<HatComponent> hat_components(Filtration const& F, int i) {
  if (i < 1 || i > F.depth()) {
    throw InputError("filtration level " + std::to_string(i) + " not computed");
  }
  auto const& L = F.levels[static_cast<std::size_t>(i)];
  std::vector<HatComponent> out;
  auto const core_map = core_tracked(L.product.graph, false);
  std::vector<int> core_edges(static_cast<std::size_t>(L.stats.comps.count), 0);
  for (int e = 0; e < L.product.graph.num_edges(); ++e) {
    if (core_map.edge_map[static_cast<std::size_t>(e)] >= 0) {
      ++core_edges[static_cast<std::size_t>(
          L.stats.comps.of_vertex[static_cast<std::size_t>(L.product.graph.edge(e).source)])];
    }
  }
  for (int c = 0; c < L.stats.comps.count; ++c) {
    if (L.has_old[static_cast<std::size_t>(c)]) {
      continue;
    }
    HatComponent h;
    h.component  = c;
    h.vertices   = L.stats.vertices[static_cast<std::size_t>(c)];
    h.edges      = L.stats.edges[static_cast<std::size_t>(c)];
    h.rank       = L.stats.rank(c);
    h.core_edges = core_edges[static_cast<std::size_t>(c)];
    h.kind       = h.rank == 0 ? HatKind::tree : h.rank == 1 ? HatKind::single_loop : HatKind::higher_rank;
    out.push_back(h);
  }
  return out;
}

// Empty means no component carries a loop; trees are ignored.
inline bool hat_is_empty(std::vector<HatComponent> const& hs) {
  return std::none_of(hs.begin(), hs.end(), [](auto const& h) { return h.rank > 0; });
}

inline bool hat_is_loops(std::vector<HatComponent> const& hs) {
  return std::none_of(hs.begin(), hs.end(), [](auto const& h) { return h.kind == HatKind::higher_rank; });
}

// Once empty (or loops only), every later level stays that way.
inline bool persistence_holds(Filtration const& F) {
  bool empty = false;
  bool loops = false;
  for (int i = 1; i <= F.depth(); ++i) {
    auto hs = hat_components(F, i);
    if ((empty && !hat_is_empty(hs)) || (loops && !hat_is_loops(hs))) {
      return false;
    }
    empty = empty || hat_is_empty(hs);
    loops = loops || hat_is_loops(hs);
  }
  return true;
}

// Basis loops of one component (spanning tree plus one extra edge each),
// cyclically tightened, as oriented product edges. At most `limit`.
inline std::vector<std::vector<int>> basis_loops(LabeledGraph const& g, Components const& comps, int c,
                                                 std::size_t limit) {
  int root = -1;
  for (int v = 0; v < g.num_vertices() && root < 0; ++v) {
    if (comps.of_vertex[static_cast<std::size_t>(v)] == c) {
      root = v;
    }
  }
  std::vector<std::vector<int>> loops;
  if (root < 0) {
    return loops;
  }
  auto             out = g.out_edges();
  std::vector<int> via(static_cast<std::size_t>(g.num_vertices()), -2);
  via[static_cast<std::size_t>(root)] = -1;
  std::vector<char> tree(static_cast<std::size_t>(g.num_edges()), 0);
  std::queue<int>   q;
  q.push(root);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int o : out[static_cast<std::size_t>(v)]) {
      int u = g.target(o);
      if (via[static_cast<std::size_t>(u)] == -2) {
        via[static_cast<std::size_t>(u)] = o;
        tree[static_cast<std::size_t>(o >> 1)] = 1;
        q.push(u);
      }
    }
  }
  auto to_root = [&](int v) {
    std::vector<int> p;
    while (via[static_cast<std::size_t>(v)] >= 0) {
      int o = via[static_cast<std::size_t>(v)];
      p.push_back(o ^ 1);
      v = g.source(o);
    }
    return p;
  };
  for (int e = 0; e < g.num_edges() && loops.size() < limit; ++e) {
    if (tree[static_cast<std::size_t>(e)] || comps.of_vertex[static_cast<std::size_t>(g.edge(e).source)] != c) {
      continue;
    }
    auto down = to_root(g.edge(e).source);
    std::vector<int> loop;
    for (auto it = down.rbegin(); it != down.rend(); ++it) {
      loop.push_back(*it ^ 1);
    }
    loop.push_back(2 * e);
    auto up = to_root(g.edge(e).target);
    loop.insert(loop.end(), up.begin(), up.end());
    loops.push_back(cyclically_tighten(detail::tighten_oriented(loop)));
  }
  return loops;
}

struct StabilizedAt {
  int power = 0;
};
struct InvariantLoop {
  std::vector<OrientedEdge> loop;  // primitive, cyclically tight
  int                       degree = 0;
  int                       period = 0;  // k with [f^k(γ)] = [γ^d]
  int                       found_at = 0;
};
struct CapExceeded {
  int              last_power = 0;
  std::vector<int> surviving_ranks;
  std::string      reason;
};
using StabilizationVerdict = std::variant<StabilizedAt, InvariantLoop, CapExceeded>;

// d with [f^k(γ)] = [γ^d], searching k = 1..k_max while images stay short.
inline std::optional<std::pair<int, int>> invariant_degree(GraphMap const& f, std::vector<OrientedEdge> const& gamma,
                                                           int k_max, std::size_t max_len = 1 << 16) {
  auto const target = cyclic_canonical(gamma);
  auto       img    = gamma;
  for (int k = 1; k <= k_max; ++k) {
    img = map_loop(f, img);
    if (img.empty() || img.size() > max_len) {
      return std::nullopt;
    }
    if (img.size() % gamma.size() == 0) {
      auto d = img.size() / gamma.size();
      auto [root, m] = primitive_root(cyclic_canonical(img));
      if (static_cast<std::size_t>(m) == d && root == target) {
        return std::pair<int, int>(k, static_cast<int>(d));
      }
    }
  }
  return std::nullopt;
}

// Smallest N <= cap with Γ̂_1(f^N) free of loops. Loops surviving in
// Γ̂_1(f^N) are projected to the domain and tested for invariance.
inline StabilizationVerdict stabilization_power(GraphMap const& f, int cap = 16,
                                                std::size_t max_edges = std::size_t{1} << 22) {
  if (!is_immersion(f)) {
    subdivide_immersion(f, 1);
    throw PreconditionError("map is not an immersion");
  }
  CapExceeded                           state;
  std::vector<std::vector<OrientedEdge>> tried;
  for (int n = 1; n <= cap; ++n) {
    Filtration F;
    try {
      F = gamma_filtration(f.power(n), 1, max_edges);
    } catch (BudgetError const& e) {
      state.reason = std::string("size budget at power ") + std::to_string(n) + ": " + e.what();
      return state;
    }
    auto hs          = hat_components(F, 1);
    state.last_power = n;
    state.surviving_ranks.clear();
    if (hat_is_empty(hs)) {
      return StabilizedAt{n};
    }
    auto const& L = F.levels[1];
    for (auto const& h : hs) {
      if (h.rank == 0) {
        continue;
      }
      state.surviving_ranks.push_back(h.rank);
      for (auto const& loop : basis_loops(L.product.graph, L.stats.comps, h.component, 8)) {
        for (bool left : {true, false}) {
          std::vector<int> fine;
          for (int o : loop) {
            int e = left ? L.product.left_edge[static_cast<std::size_t>(o >> 1)]
                         : L.product.right_edge[static_cast<std::size_t>(o >> 1)];
            fine.push_back(2 * e + (o & 1));
          }
          auto gamma = primitive_root(cyclic_canonical(coarsen_loop(L.sub, fine))).first;
          if (gamma.empty() || std::find(tried.begin(), tried.end(), gamma) != tried.end()) {
            continue;
          }
          tried.push_back(gamma);
          if (auto kd = invariant_degree(f, gamma, cap)) {
            return InvariantLoop{gamma, kd->second, kd->first, n};
          }
        }
      }
    }
  }
  state.reason = "loops survive in every computed level";
  return state;
}

}  // namespace hnncert
