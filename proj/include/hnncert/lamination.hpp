#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hnncert/errors.hpp"
#include "hnncert/graph_map.hpp"

namespace hnncert {

struct LeafSegment {
  std::vector<OrientedEdge> path;
  OrientedEdge              seed  = 0;
  int                       depth = 0;
};

inline LeafSegment leaf_segment(GraphMap const& f, OrientedEdge seed, int k) {
  if (k < 0) {
    throw InputError("negative leaf depth");
  }
  if (seed < 0 || seed >= f.graph().num_oriented_edges()) {
    throw InputError("seed edge out of range");
  }
  EdgePath p{f.graph().source(seed), {seed}};
  for (int i = 0; i < k; ++i) {
    p = f.map_path(p);
  }
  return {p.edges, seed, k};
}

inline std::vector<OrientedEdge> reversed_path(std::vector<OrientedEdge> const& p) {
  std::vector<OrientedEdge> r;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    r.push_back(reverse_edge(*it));
  }
  return r;
}

// Unoriented windows of 2l+1 edges, l = 0..scale, taken from every leaf
// segment f^j(e) with j <= depth.
struct LeafCatalog {
  int                                        scale = 0;
  int                                        depth = 0;
  std::vector<std::set<std::vector<OrientedEdge>>> windows;  // by l

  bool contains(std::vector<OrientedEdge> const& w, int l) const {
    return windows.at(static_cast<std::size_t>(l)).contains(w);
  }
};

inline void add_windows(std::set<std::vector<OrientedEdge>>& out, std::vector<OrientedEdge> const& p, std::size_t n) {
  for (std::size_t i = 0; i + n <= p.size(); ++i) {
    std::vector<OrientedEdge> w(p.begin() + static_cast<std::ptrdiff_t>(i), p.begin() + static_cast<std::ptrdiff_t>(i + n));
    out.insert(reversed_path(w));
    out.insert(std::move(w));
  }
}

inline LeafCatalog leaf_catalog(GraphMap const& f, int scale, int depth) {
  if (scale < 0 || depth < 0) {
    throw InputError("catalog scale and depth must be non-negative");
  }
  LeafCatalog c{scale, depth, std::vector<std::set<std::vector<OrientedEdge>>>(static_cast<std::size_t>(scale) + 1)};
  for (int e = 0; e < f.graph().num_edges(); ++e) {
    for (int j = 0; j <= depth; ++j) {
      auto seg = leaf_segment(f, 2 * e, j).path;
      for (int l = 0; l <= scale; ++l) {
        add_windows(c.windows[static_cast<std::size_t>(l)], seg, static_cast<std::size_t>(2 * l + 1));
      }
    }
  }
  return c;
}

// Share of positions on a cyclic loop whose L-neighbourhood (2L+1 edges,
// wrapping around the loop as often as needed) lies in the catalog.
inline Rational weak_convergence_fraction(std::vector<OrientedEdge> const& loop, LeafCatalog const& catalog, int L) {
  if (L < 0 || L > catalog.scale) {
    throw InputError("catalog scale " + std::to_string(catalog.scale) + " below " + std::to_string(L));
  }
  if (loop.empty()) {
    throw InputError("empty loop");
  }
  std::int64_t const n    = static_cast<std::int64_t>(loop.size());
  std::int64_t       good = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<OrientedEdge> w;
    for (std::int64_t j = i - L; j <= i + L; ++j) {
      w.push_back(loop[static_cast<std::size_t>(((j % n) + n) % n)]);
    }
    good += catalog.contains(w, L) ? 1 : 0;
  }
  return Rational::make(good, n);
}

// δ_k: the shortest edge image at power k.
inline std::int64_t min_image_length(GraphMap const& f, int k) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int e = 0; e < f.graph().num_edges(); ++e) {
    best = std::min(best, static_cast<std::int64_t>(leaf_segment(f, 2 * e, k).path.size()));
  }
  return best;
}

// Smallest L' <= cap such that every oriented L-window of the leaf occurs in
// every L'-window.
inline std::optional<int> quasi_periodicity_probe(LeafSegment const& leaf, int L, int cap) {
  auto const& p = leaf.path;
  if (L <= 0 || static_cast<std::size_t>(L) > p.size()) {
    return std::nullopt;
  }
  std::set<std::vector<OrientedEdge>> all;
  for (std::size_t i = 0; i + static_cast<std::size_t>(L) <= p.size(); ++i) {
    all.emplace(p.begin() + static_cast<std::ptrdiff_t>(i), p.begin() + static_cast<std::ptrdiff_t>(i) + L);
  }
  for (int lp = L; lp <= cap && static_cast<std::size_t>(lp) <= p.size(); ++lp) {
    bool ok = true;
    for (std::size_t s = 0; ok && s + static_cast<std::size_t>(lp) <= p.size(); ++s) {
      std::set<std::vector<OrientedEdge>> inside;
      for (std::size_t i = s; i + static_cast<std::size_t>(L) <= s + static_cast<std::size_t>(lp); ++i) {
        inside.emplace(p.begin() + static_cast<std::ptrdiff_t>(i), p.begin() + static_cast<std::ptrdiff_t>(i) + L);
      }
      ok = inside.size() == all.size();
    }
    if (ok) {
      return lp;
    }
  }
  return std::nullopt;
}

enum class IndependenceVerdict { distinct_at_scale, indistinguishable_at_scale };

// One-sided: distinct_at_scale proves the laminations differ,
// indistinguishable proves nothing.
inline IndependenceVerdict independence_probe(GraphMap const& f, GraphMap const& g, int L, int k) {
  if (!(f.graph() == g.graph())) {
    throw InputError("independence probe needs maps on the same graph");
  }
  if (L <= 0) {
    throw InputError("window length must be positive");
  }
  auto windows = [&](GraphMap const& h) {
    std::set<std::vector<OrientedEdge>> w;
    for (int e = 0; e < h.graph().num_edges(); ++e) {
      for (int j = 0; j <= k; ++j) {
        add_windows(w, leaf_segment(h, 2 * e, j).path, static_cast<std::size_t>(L));
      }
    }
    return w;
  };
  return windows(f) == windows(g) ? IndependenceVerdict::indistinguishable_at_scale
                                  : IndependenceVerdict::distinct_at_scale;
}

}  // namespace hnncert
