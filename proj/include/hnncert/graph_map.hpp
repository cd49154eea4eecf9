#pragma once

// Graph self-maps representing free-group endomorphisms.
//
// Oriented edges of a Graph are encoded as 2e (forward) and 2e+1 (reverse).
// A GraphMap sends vertices to vertices and each forward edge to a tight,
// nonempty edge path; the image of a reverse edge is the reversed path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hnncert/errors.hpp"
#include "hnncert/words.hpp"

namespace hnncert {

using OrientedEdge = int;

constexpr OrientedEdge reverse_edge(OrientedEdge o) noexcept { return o ^ 1; }
constexpr int          undirected(OrientedEdge o) noexcept { return o >> 1; }

class Graph {
 public:
  Graph() = default;
  explicit Graph(int num_vertices) : num_vertices_(num_vertices) {}

  static Graph rose(int petals) {
    Graph g(1);
    for (int i = 0; i < petals; ++i) {
      g.add_edge(0, 0);
    }
    return g;
  }

  int add_vertex() { return num_vertices_++; }

  int add_edge(int source, int target, std::int64_t length = 1) {
    if (source < 0 || source >= num_vertices_ || target < 0 || target >= num_vertices_) {
      throw InputError("edge endpoint out of range");
    }
    if (length <= 0) {
      throw InputError("edge lengths must be positive");
    }
    ends_.emplace_back(source, target);
    lengths_.push_back(length);
    return static_cast<int>(ends_.size()) - 1;
  }

  int num_vertices() const noexcept { return num_vertices_; }
  int num_edges() const noexcept { return static_cast<int>(ends_.size()); }
  int num_oriented_edges() const noexcept { return 2 * num_edges(); }

  int source(OrientedEdge o) const {
    auto const& [s, t] = ends_.at(static_cast<std::size_t>(undirected(o)));
    return o & 1 ? t : s;
  }
  int target(OrientedEdge o) const { return source(reverse_edge(o)); }
  std::int64_t length(int e) const { return lengths_.at(static_cast<std::size_t>(e)); }

  // Valence counts a loop twice.
  std::vector<int> valences() const {
    std::vector<int> val(static_cast<std::size_t>(num_vertices_), 0);
    for (auto const& [s, t] : ends_) {
      ++val[static_cast<std::size_t>(s)];
      ++val[static_cast<std::size_t>(t)];
    }
    return val;
  }

  // Oriented edges leaving each vertex (the directions at that vertex).
  std::vector<std::vector<OrientedEdge>> directions() const {
    std::vector<std::vector<OrientedEdge>> d(static_cast<std::size_t>(num_vertices_));
    for (int o = 0; o < num_oriented_edges(); ++o) {
      d[static_cast<std::size_t>(source(o))].push_back(o);
    }
    return d;
  }

  bool is_rose() const {
    return num_vertices_ == 1;
  }

  friend bool operator==(Graph const&, Graph const&) = default;

 private:
  int                              num_vertices_ = 0;
  std::vector<std::pair<int, int>> ends_;
  std::vector<std::int64_t>        lengths_;
};

struct EdgePath {
  int                       start = 0;
  std::vector<OrientedEdge> edges;

  bool        empty() const noexcept { return edges.empty(); }
  std::size_t size() const noexcept { return edges.size(); }
  friend bool operator==(EdgePath const&, EdgePath const&) = default;
};

inline int path_end(Graph const& g, EdgePath const& p) {
  return p.edges.empty() ? p.start : g.target(p.edges.back());
}

inline void check_composable(Graph const& g, EdgePath const& p) {
  int at = p.start;
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    OrientedEdge o = p.edges[i];
    if (o < 0 || o >= g.num_oriented_edges()) {
      throw InputError("edge id out of range in path");
    }
    if (g.source(o) != at) {
      throw InputError("path is not composable at position " + std::to_string(i));
    }
    at = g.target(o);
  }
}

inline EdgePath reversed(EdgePath const& p, Graph const& g) {
  EdgePath r{path_end(g, p), {}};
  for (auto it = p.edges.rbegin(); it != p.edges.rend(); ++it) {
    r.edges.push_back(reverse_edge(*it));
  }
  return r;
}

inline bool is_tight(std::vector<OrientedEdge> const& edges) {
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] == reverse_edge(edges[i - 1])) {
      return false;
    }
  }
  return true;
}

inline bool is_cyclically_tight(std::vector<OrientedEdge> const& edges) {
  return is_tight(edges)
         && (edges.size() < 2 || edges.front() != reverse_edge(edges.back()));
}

inline EdgePath tighten_path(Graph const& g, EdgePath const& p) {
  check_composable(g, p);
  EdgePath r{p.start, {}};
  for (OrientedEdge o : p.edges) {
    if (!r.edges.empty() && r.edges.back() == reverse_edge(o)) {
      r.edges.pop_back();
    } else {
      r.edges.push_back(o);
    }
  }
  return r;
}

// Strips backtracking across the basepoint of a closed tight path.
inline std::vector<OrientedEdge> cyclically_tighten(std::vector<OrientedEdge> edges) {
  std::size_t i = 0;
  std::size_t j = edges.size();
  while (j - i >= 2 && edges[i] == reverse_edge(edges[j - 1])) {
    ++i;
    --j;
  }
  return {edges.begin() + static_cast<std::ptrdiff_t>(i),
          edges.begin() + static_cast<std::ptrdiff_t>(j)};
}

inline std::int64_t path_length(Graph const& g, std::vector<OrientedEdge> const& edges) {
  std::int64_t l = 0;
  for (OrientedEdge o : edges) {
    l += g.length(undirected(o));
  }
  return l;
}

// Rose edge paths <-> words: letter i is oriented edge 2(i-1), -i its reverse.
inline OrientedEdge letter_edge(Letter x) {
  return x > 0 ? 2 * (x - 1) : 2 * (-x - 1) + 1;
}
inline Letter edge_letter(OrientedEdge o) {
  return o & 1 ? -(undirected(o) + 1) : undirected(o) + 1;
}
inline EdgePath word_path(Word const& w) {
  EdgePath p{0, {}};
  for (Letter x : w.letters()) {
    p.edges.push_back(letter_edge(x));
  }
  return p;
}
inline Word path_word(std::vector<OrientedEdge> const& edges, int rank) {
  std::vector<Letter> raw;
  for (OrientedEdge o : edges) {
    raw.push_back(edge_letter(o));
  }
  return Word::reduced(raw, rank);
}

class GraphMap {
 public:
  GraphMap() = default;

  GraphMap(Graph graph, std::vector<int> vertex_map, std::vector<std::vector<OrientedEdge>> edge_images)
      : graph_(std::move(graph)),
        vertex_map_(std::move(vertex_map)),
        edge_images_(std::move(edge_images)) {
    if (static_cast<int>(vertex_map_.size()) != graph_.num_vertices()
        || static_cast<int>(edge_images_.size()) != graph_.num_edges()) {
      throw InputError("graph map needs one image per vertex and edge");
    }
    for (int e = 0; e < graph_.num_edges(); ++e) {
      auto const& img = edge_images_[static_cast<std::size_t>(e)];
      if (img.empty()) {
        throw InputError("edge " + std::to_string(e) + " has an empty image");
      }
      EdgePath p{vertex_map_[static_cast<std::size_t>(graph_.source(2 * e))], img};
      check_composable(graph_, p);
      if (path_end(graph_, p) != vertex_map_[static_cast<std::size_t>(graph_.target(2 * e))]) {
        throw InputError("image of edge " + std::to_string(e) + " has wrong endpoints");
      }
      if (!is_tight(img)) {
        throw InputError("image of edge " + std::to_string(e) + " is not tight");
      }
    }
  }

  static GraphMap identity(Graph g) {
    std::vector<int> vm(static_cast<std::size_t>(g.num_vertices()));
    std::iota(vm.begin(), vm.end(), 0);
    std::vector<std::vector<OrientedEdge>> im;
    for (int e = 0; e < g.num_edges(); ++e) {
      im.push_back({2 * e});
    }
    return GraphMap(std::move(g), std::move(vm), std::move(im));
  }

  // The rose map realizing an endomorphism (petal i <-> generator a_i).
  static GraphMap from_endomorphism(Endomorphism const& phi) {
    std::vector<std::vector<OrientedEdge>> im;
    for (auto const& w : phi.images()) {
      im.push_back(word_path(w).edges);
    }
    return GraphMap(Graph::rose(phi.rank()), {0}, std::move(im));
  }

  Endomorphism to_endomorphism() const {
    if (!graph_.is_rose()) {
      throw PreconditionError("only rose maps convert to endomorphisms");
    }
    std::vector<Word> images;
    for (auto const& img : edge_images_) {
      images.push_back(path_word(img, graph_.num_edges()));
    }
    return Endomorphism(graph_.num_edges(), std::move(images));
  }

  Graph const& graph() const noexcept { return graph_; }
  int          vertex_image(int v) const { return vertex_map_.at(static_cast<std::size_t>(v)); }
  std::vector<int> const& vertex_map() const noexcept { return vertex_map_; }
  std::vector<std::vector<OrientedEdge>> const& edge_images() const noexcept { return edge_images_; }

  std::vector<OrientedEdge> image(OrientedEdge o) const {
    auto const& img = edge_images_.at(static_cast<std::size_t>(undirected(o)));
    if (!(o & 1)) {
      return img;
    }
    std::vector<OrientedEdge> r;
    for (auto it = img.rbegin(); it != img.rend(); ++it) {
      r.push_back(reverse_edge(*it));
    }
    return r;
  }

  // Concatenated image without tightening.
  EdgePath image_untightened(EdgePath const& p) const {
    EdgePath r{vertex_image(p.start), {}};
    for (OrientedEdge o : p.edges) {
      auto img = image(o);
      r.edges.insert(r.edges.end(), img.begin(), img.end());
    }
    return r;
  }

  EdgePath map_path(EdgePath const& p) const {
    check_composable(graph_, p);
    return tighten_path(graph_, image_untightened(p));
  }

  // (this ∘ other), tightened eagerly.
  GraphMap compose(GraphMap const& other) const {
    if (!(graph_ == other.graph_)) {
      throw InputError("composing maps on different graphs");
    }
    std::vector<int> vm;
    for (int v : other.vertex_map_) {
      vm.push_back(vertex_image(v));
    }
    std::vector<std::vector<OrientedEdge>> im;
    for (int e = 0; e < graph_.num_edges(); ++e) {
      EdgePath p{other.vertex_image(graph_.source(2 * e)), other.edge_images_[static_cast<std::size_t>(e)]};
      auto     q = map_path(p);
      if (q.empty()) {
        throw PreconditionError("composition collapses edge " + std::to_string(e));
      }
      im.push_back(std::move(q.edges));
    }
    return GraphMap(graph_, std::move(vm), std::move(im));
  }

  GraphMap power(int k) const {
    if (k < 0) {
      throw InputError("negative map power");
    }
    GraphMap r = identity(graph_);
    for (int i = 0; i < k; ++i) {
      r = compose(r);
    }
    return r;
  }

  friend bool operator==(GraphMap const&, GraphMap const&) = default;

 private:
  Graph                                  graph_;
  std::vector<int>                       vertex_map_;
  std::vector<std::vector<OrientedEdge>> edge_images_;
};

inline void check_closed(Graph const& g, std::vector<OrientedEdge> const& loop) {
  if (loop.empty()) {
    return;
  }
  EdgePath p{g.source(loop.front()), loop};
  check_composable(g, p);
  if (path_end(g, p) != p.start) {
    throw InputError("loop is not closed");
  }
}

// Image of an immersed free loop, tightened cyclically.
inline std::vector<OrientedEdge> map_loop(GraphMap const& f, std::vector<OrientedEdge> const& loop) {
  check_closed(f.graph(), loop);
  if (!is_cyclically_tight(loop)) {
    throw InputError("loop is not immersed");
  }
  if (loop.empty()) {
    return {};
  }
  EdgePath p{f.graph().source(loop.front()), loop};
  return cyclically_tighten(f.map_path(p).edges);
}

// Image of a based loop (tight except possibly at the basepoint), tightened
// rel basepoint.
inline EdgePath map_based_loop(GraphMap const& f, EdgePath const& loop) {
  check_composable(f.graph(), loop);
  if (path_end(f.graph(), loop) != loop.start) {
    throw InputError("based loop is not closed");
  }
  if (!is_tight(loop.edges)) {
    throw InputError("based loop is not tight");
  }
  return f.map_path(loop);
}

// ---------------------------------------------------------------------------
// Transition matrices and Perron-Frobenius data.

class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(std::size_t n) : n_(n), a_(n * n, 0) {}
  IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) : n_(rows.size()) {
    for (auto const& r : rows) {
      if (r.size() != n_) {
        throw InputError("matrix must be square");
      }
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      m(i, i) = 1;
    }
    return m;
  }

  std::size_t   size() const noexcept { return n_; }
  std::int64_t& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  std::int64_t  operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  friend IntMatrix operator*(IntMatrix const& x, IntMatrix const& y) {
    IntMatrix r(x.n_);
    for (std::size_t i = 0; i < x.n_; ++i) {
      for (std::size_t k = 0; k < x.n_; ++k) {
        if (x(i, k) == 0) {
          continue;
        }
        for (std::size_t j = 0; j < x.n_; ++j) {
          r(i, j) += x(i, k) * y(k, j);
        }
      }
    }
    return r;
  }

  friend bool operator==(IntMatrix const&, IntMatrix const&) = default;

 private:
  std::size_t               n_ = 0;
  std::vector<std::int64_t> a_;
};

// Entry (i, j): traversals of edge i, in either direction, by the image of edge j.
inline IntMatrix transition_matrix(GraphMap const& f) {
  auto const n = static_cast<std::size_t>(f.graph().num_edges());
  IntMatrix  a(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (OrientedEdge o : f.edge_images()[j]) {
      a(static_cast<std::size_t>(undirected(o)), j) += 1;
    }
  }
  return a;
}

// Support digraph strongly connected, and every index lies on a cycle (so a
// 1x1 zero matrix is reducible).
inline bool is_irreducible_matrix(IntMatrix const& a) {
  std::size_t const n = a.size();
  if (n == 0) {
    return false;
  }
  auto reach = [&](bool transpose) {
    std::vector<char>        seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        std::int64_t x = transpose ? a(j, i) : a(i, j);
        if (x > 0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  if (n == 1) {
    return a(0, 0) > 0;
  }
  return reach(false) && reach(true);
}

// Power iteration on A + I, stopped when the Collatz-Wielandt bounds
// min_i (Bx)_i / x_i <= rho(B) <= max_i (Bx)_i / x_i are within tol.
inline double pf_eigenvalue(IntMatrix const& a, double tol = 1e-12, std::size_t max_iter = 1'000'000) {
  if (!is_irreducible_matrix(a)) {
    throw PreconditionError("pf_eigenvalue needs an irreducible matrix");
  }
  std::size_t const   n = a.size();
  std::vector<double> x(n, 1.0);
  std::vector<double> y(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t j = 0; j < n; ++j) {
        s += static_cast<double>(a(i, j)) * x[j];
      }
      y[i] = s;
      lo   = std::min(lo, s / x[i]);
      hi   = std::max(hi, s / x[i]);
      mx   = std::max(mx, s);
    }
    if (hi - lo <= tol) {
      return 0.5 * (lo + hi) - 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = y[i] / mx;
    }
  }
  throw ConvergenceError("power iteration did not converge", x);
}

// ---------------------------------------------------------------------------
// Directions, turns and train-track verification.

// df: the first oriented edge of the image of each direction.
inline std::vector<OrientedEdge> direction_map(GraphMap const& f) {
  std::vector<OrientedEdge> df(static_cast<std::size_t>(f.graph().num_oriented_edges()));
  for (int o = 0; o < f.graph().num_oriented_edges(); ++o) {
    df[static_cast<std::size_t>(o)] = f.image(o).front();
  }
  return df;
}

struct Turn {
  OrientedEdge first;
  OrientedEdge second;
  friend bool  operator==(Turn const&, Turn const&) = default;
  friend auto  operator<=>(Turn const&, Turn const&) = default;
};

inline Turn make_turn(OrientedEdge x, OrientedEdge y) {
  return x < y ? Turn{x, y} : Turn{y, x};
}

// A turn is illegal if some iterate of df identifies its two directions.
// Turns form a finite set, so the orbit is eventually periodic and the check
// is exact; `depth_cap` only bounds the walk as a guard.
inline std::optional<int> degeneration_depth(std::vector<OrientedEdge> const& df, Turn t,
                                             std::size_t depth_cap) {
  std::set<Turn> seen;
  for (std::size_t k = 0; k <= depth_cap; ++k) {
    if (t.first == t.second) {
      return static_cast<int>(k);
    }
    if (!seen.insert(t).second) {
      return std::nullopt;
    }
    t = make_turn(df[static_cast<std::size_t>(t.first)], df[static_cast<std::size_t>(t.second)]);
  }
  throw PreconditionError("turn orbit exceeded depth cap");
}

struct TrainTrack {};
struct IllegalTurnFound {
  Turn turn;
  int  edge;        // edge whose image crosses the turn
  int  depth;       // iterate of df that degenerates it
};
struct Inconclusive {
  std::string reason;
};
using TrainTrackVerdict = std::variant<TrainTrack, IllegalTurnFound, Inconclusive>;

// Turns crossed by a path: {reverse(e_i), e_{i+1}} at each interior vertex.
inline std::vector<Turn> crossed_turns(std::vector<OrientedEdge> const& path) {
  std::vector<Turn> t;
  for (std::size_t i = 1; i < path.size(); ++i) {
    t.push_back(make_turn(reverse_edge(path[i - 1]), path[i]));
  }
  return t;
}

inline TrainTrackVerdict verify_train_track(GraphMap const& f, std::size_t depth_cap = 1 << 20) {
  auto const df = direction_map(f);
  for (int e = 0; e < f.graph().num_edges(); ++e) {
    if (!is_tight(f.edge_images()[static_cast<std::size_t>(e)])) {
      return Inconclusive{"edge image not tight"};
    }
    for (Turn t : crossed_turns(f.edge_images()[static_cast<std::size_t>(e)])) {
      try {
        if (auto d = degeneration_depth(df, t, depth_cap)) {
          return IllegalTurnFound{t, e, *d};
        }
      } catch (PreconditionError const& err) {
        return Inconclusive{err.what()};
      }
    }
  }
  return TrainTrack{};
}

inline bool is_train_track(GraphMap const& f) {
  return std::holds_alternative<TrainTrack>(verify_train_track(f));
}

inline bool is_legal_turn(GraphMap const& f, Turn t) {
  return !degeneration_depth(direction_map(f), t, 1 << 20).has_value();
}

// df injective at every vertex and every edge image tight.
inline bool is_immersion(GraphMap const& f) {
  auto const df = direction_map(f);
  auto const dirs = f.graph().directions();
  for (auto const& at : dirs) {
    std::set<OrientedEdge> images;
    for (OrientedEdge o : at) {
      if (!images.insert(df[static_cast<std::size_t>(o)]).second) {
        return false;
      }
    }
  }
  return std::all_of(f.edge_images().begin(), f.edge_images().end(),
                     [](auto const& img) { return is_tight(img); });
}

// Largest ratio of image length to edge length.
inline double stretch(GraphMap const& h) {
  double s = 0.0;
  for (int e = 0; e < h.graph().num_edges(); ++e) {
    double ratio = static_cast<double>(path_length(h.graph(), h.edge_images()[static_cast<std::size_t>(e)]))
                   / static_cast<double>(h.graph().length(e));
    s = std::max(s, ratio);
  }
  return s;
}

// Exact rational form of max{stretch(h), stretch(h_inverse)} as num/den.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d == 0) {
      throw InputError("zero denominator");
    }
    if (d < 0) {
      n = -n;
      d = -d;
    }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g == 0) {
      g = 1;
    }
    return {n / g, d / g};
  }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator*(Rational x, Rational y) { return make(x.num * y.num, x.den * y.den); }
  friend bool     operator<(Rational x, Rational y) { return x.num * y.den < y.num * x.den; }
  friend bool     operator==(Rational const&, Rational const&) = default;
};

inline Rational exact_stretch(GraphMap const& h) {
  Rational best{0, 1};
  for (int e = 0; e < h.graph().num_edges(); ++e) {
    Rational r = Rational::make(path_length(h.graph(), h.edge_images()[static_cast<std::size_t>(e)]),
                                h.graph().length(e));
    if (best < r) {
      best = r;
    }
  }
  return best;
}

inline Rational bilipschitz_constant_exact(GraphMap const& h, GraphMap const& h_inverse) {
  Rational a = exact_stretch(h);
  Rational b = exact_stretch(h_inverse);
  Rational k = a < b ? b : a;
  return k < Rational{1, 1} ? Rational{1, 1} : k;
}

inline double bilipschitz_constant(GraphMap const& h, GraphMap const& h_inverse) {
  return bilipschitz_constant_exact(h, h_inverse).to_double();
}

// Canonical form of a cyclic edge path (least rotation).
inline std::vector<OrientedEdge> cyclic_canonical(std::vector<OrientedEdge> loop) {
  return rotate_to_least(cyclically_tighten(std::move(loop)));
}

}  // namespace hnncert
