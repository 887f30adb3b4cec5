#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "zofield/errors.hpp"

namespace zofield {

using Vertex = std::uint64_t;

// Finite L_p exponents are capped so the integer norm test stays
// overflow-free; beyond that the test is indistinguishable from the max norm
// at lattice scale anyway.
inline constexpr int norm_infinity = std::numeric_limits<int>::max();
inline constexpr int max_finite_norm = 62;

// The d-dimensional lattice torus {0..n-1}^d. Two vertices are adjacent when
// the L_p norm of their coordinate difference, reduced componentwise modulo n
// to the smallest absolute representative, is at most rho.
struct TorusParams {
  int d = 1;
  std::uint32_t n = 2;
  int norm_p = 1;
  int rho = 1;

  friend bool operator==(const TorusParams&, const TorusParams&) = default;
};

inline void validate(const TorusParams& t) {
  if (t.d < 1) throw config_error("torus dimension must be >= 1");
  if (t.n < 2) throw config_error("torus side length must be >= 2");
  if (t.rho < 1) throw config_error("neighborhood radius rho must be >= 1");
  if (t.norm_p != norm_infinity && (t.norm_p < 1 || t.norm_p > max_finite_norm))
    throw config_error("norm exponent must be in 1..62 or \"inf\"");
}

inline std::string norm_to_string(int norm_p) {
  return norm_p == norm_infinity ? "inf" : std::to_string(norm_p);
}

inline int norm_from_string(const std::string& s) {
  if (s == "inf") return norm_infinity;
  try {
    const int p = std::stoi(s);
    if (p >= 1 && p <= max_finite_norm) return p;
  } catch (const std::exception&) {
  }
  throw config_error("bad norm exponent \"" + s + "\" (want 1..62 or \"inf\")");
}

inline std::uint64_t vertex_count(const TorusParams& t) {
  validate(t);
  std::uint64_t c = 1;
  for (int i = 0; i < t.d; ++i) {
    if (c > (std::uint64_t{1} << 62) / t.n)
      throw config_error("torus too large to index");
    c *= t.n;
  }
  return c;
}

// Vertices are a single row-major index; the first coordinate varies slowest.
inline Vertex index_of(const TorusParams& t, std::span<const int> coords) {
  Vertex v = 0;
  for (int i = 0; i < t.d; ++i) v = v * t.n + static_cast<Vertex>(coords[i]);
  return v;
}

inline std::vector<int> coords_of(const TorusParams& t, Vertex v) {
  std::vector<int> c(static_cast<std::size_t>(t.d));
  for (int i = t.d - 1; i >= 0; --i) {
    c[static_cast<std::size_t>(i)] = static_cast<int>(v % t.n);
    v /= t.n;
  }
  return c;
}

inline void check_vertex(const TorusParams& t, Vertex v) {
  if (v >= vertex_count(t))
    throw config_error("vertex index " + std::to_string(v) + " out of range");
}

// Smallest absolute representative of (to - from) modulo n, per coordinate.
// Ties at n/2 keep the positive sign.
inline std::vector<int> minimal_offset(const TorusParams& t, Vertex from,
                                       Vertex to) {
  const auto a = coords_of(t, from);
  const auto b = coords_of(t, to);
  std::vector<int> off(static_cast<std::size_t>(t.d));
  const int n = static_cast<int>(t.n);
  for (int i = 0; i < t.d; ++i) {
    int delta = (b[static_cast<std::size_t>(i)] -
                 a[static_cast<std::size_t>(i)] + n) % n;
    if (delta > n / 2) delta -= n;
    off[static_cast<std::size_t>(i)] = delta;
  }
  return off;
}

namespace detail {

inline std::uint64_t ipow_u64(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace detail

// L_p norm test on an already-reduced offset vector.
inline bool offset_within_rho(std::span<const int> off, int norm_p, int rho) {
  if (norm_p == norm_infinity) {
    for (int o : off)
      if (std::abs(o) > rho) return false;
    return true;
  }
  // A single coordinate above rho already fails every finite p.
  std::uint64_t sum = 0;
  for (int o : off) {
    const std::uint64_t a = static_cast<std::uint64_t>(std::abs(o));
    if (a > static_cast<std::uint64_t>(rho)) return false;
    sum += detail::ipow_u64(a, norm_p);
  }
  return sum <= detail::ipow_u64(static_cast<std::uint64_t>(rho), norm_p);
}

namespace detail {

// All nonzero offsets in [-rho, rho]^d with L_p norm <= rho, lexicographic.
// Cached per (d, p, rho); the list is the single-step move set of the graph.
inline std::shared_ptr<const std::vector<std::vector<int>>> move_offsets(
    int d, int norm_p, int rho) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>,
                  std::shared_ptr<const std::vector<std::vector<int>>>>
      cache;
  std::scoped_lock lock(mu);
  const auto key = std::make_tuple(d, norm_p, rho);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  std::vector<std::vector<int>> moves;
  std::vector<int> cur(static_cast<std::size_t>(d), -rho);
  while (true) {
    const bool zero = std::all_of(cur.begin(), cur.end(),
                                  [](int c) { return c == 0; });
    if (!zero && offset_within_rho(cur, norm_p, rho)) moves.push_back(cur);
    int axis = d - 1;
    while (axis >= 0 && ++cur[static_cast<std::size_t>(axis)] > rho) {
      cur[static_cast<std::size_t>(axis)] = -rho;
      --axis;
    }
    if (axis < 0) break;
  }
  auto ptr = std::make_shared<const std::vector<std::vector<int>>>(
      std::move(moves));
  cache.emplace(key, ptr);
  return ptr;
}

}  // namespace detail

// All y != x with ||y - x||_p <= rho on the torus. Sorted by vertex index,
// no duplicates (on very small tori several moves can alias the same vertex).
inline std::vector<Vertex> neighbors(const TorusParams& t, Vertex x) {
  check_vertex(t, x);
  const auto moves = detail::move_offsets(t.d, t.norm_p, t.rho);
  const auto cx = coords_of(t, x);
  const int n = static_cast<int>(t.n);
  std::vector<Vertex> out;
  out.reserve(moves->size());
  std::vector<int> cy(static_cast<std::size_t>(t.d));
  for (const auto& mv : *moves) {
    for (int i = 0; i < t.d; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      cy[ui] = ((cx[ui] + mv[ui]) % n + n) % n;
    }
    const Vertex y = index_of(t, cy);
    if (y != x) out.push_back(y);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// The ball B(0,r) in offset coordinates. For n > 2*rho*r this is independent
// of n, so templates are cached per (d, p, rho, r) and shared across tori.
struct BallTemplate {
  int d = 1;
  int norm_p = 1;
  int rho = 1;
  int radius = 0;
  std::vector<std::vector<int>> offsets;  // lexicographic, coords in [-rho*r, rho*r]

  std::size_t beta() const { return offsets.size(); }

  std::ptrdiff_t find(std::span<const int> off) const {
    const auto it = std::lower_bound(
        offsets.begin(), offsets.end(), off,
        [](const std::vector<int>& a, std::span<const int> b) {
          return std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                              b.end());
        });
    if (it == offsets.end() || !std::equal(it->begin(), it->end(), off.begin()))
      return -1;
    return it - offsets.begin();
  }

  bool contains(std::span<const int> off) const { return find(off) >= 0; }
};

// n-free template builder: breadth-first growth from the origin using the
// move set. Equivalent to BFS on any torus with n > 2*rho*r.
inline std::shared_ptr<const BallTemplate> offset_ball(int d, int norm_p,
                                                       int rho, int r) {
  if (r < 0) throw config_error("ball radius must be >= 0");
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int>,
                  std::shared_ptr<const BallTemplate>>
      cache;
  std::scoped_lock lock(mu);
  const auto key = std::make_tuple(d, norm_p, rho, r);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const auto moves = detail::move_offsets(d, norm_p, rho);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> frontier;
  frontier.emplace_back(static_cast<std::size_t>(d), 0);
  seen.insert(frontier.front());
  for (int level = 0; level < r; ++level) {
    std::vector<std::vector<int>> next;
    for (const auto& p : frontier) {
      std::vector<int> q(static_cast<std::size_t>(d));
      for (const auto& mv : *moves) {
        for (int i = 0; i < d; ++i)
          q[static_cast<std::size_t>(i)] =
              p[static_cast<std::size_t>(i)] + mv[static_cast<std::size_t>(i)];
        if (seen.insert(q).second) next.push_back(q);
      }
    }
    frontier = std::move(next);
  }

  auto tpl = std::make_shared<BallTemplate>();
  tpl->d = d;
  tpl->norm_p = norm_p;
  tpl->rho = rho;
  tpl->radius = r;
  tpl->offsets.assign(seen.begin(), seen.end());  // std::set is already lex
  cache.emplace(key, tpl);
  return tpl;
}

// Ball template for a concrete torus. Requires n > 2*rho*r: below that bound
// a ball wraps onto itself and is no longer isomorphic across sizes.
inline std::shared_ptr<const BallTemplate> ball_template(const TorusParams& t,
                                                         int r) {
  validate(t);
  if (r < 0) throw config_error("ball radius must be >= 0");
  if (static_cast<std::uint64_t>(t.n) <=
      2ull * static_cast<std::uint64_t>(t.rho) * static_cast<std::uint64_t>(r))
    throw config_error("side length " + std::to_string(t.n) +
                       " is too small for radius " + std::to_string(r) +
                       " balls (need n > 2*rho*r): balls would self-overlap");
  return offset_ball(t.d, t.norm_p, t.rho, r);
}

inline void ensure_usable(const BallTemplate& tpl, const TorusParams& t) {
  if (tpl.d != t.d || tpl.norm_p != t.norm_p || tpl.rho != t.rho)
    throw config_error("ball template built for a different geometry");
  if (static_cast<std::uint64_t>(t.n) <= 2ull *
                                             static_cast<std::uint64_t>(t.rho) *
                                             static_cast<std::uint64_t>(tpl.radius))
    throw config_error("ball template radius too large for this torus");
}

// B(x,r) as vertex indices, in the template's canonical offset order.
inline std::vector<Vertex> translate_ball(const BallTemplate& tpl, Vertex x,
                                          const TorusParams& t) {
  ensure_usable(tpl, t);
  check_vertex(t, x);
  const auto cx = coords_of(t, x);
  const int n = static_cast<int>(t.n);
  std::vector<Vertex> out;
  out.reserve(tpl.beta());
  std::vector<int> cy(static_cast<std::size_t>(t.d));
  for (const auto& off : tpl.offsets) {
    for (int i = 0; i < t.d; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      cy[ui] = ((cx[ui] + off[ui]) % n + n) % n;
    }
    out.push_back(index_of(t, cy));
  }
  return out;
}

// Regular sub-lattice with spacing 2R+1: centers {alpha*(2R+1)}^d for
// alpha = 0..floor(n/(2R+1))-1. Translated r-balls around distinct centers
// are pairwise disjoint whenever the spacing exceeds 2*rho*r.
struct SubLattice {
  int spacing = 1;
  std::uint64_t tau = 0;
  std::vector<Vertex> centers;  // row-major order of the alpha tuples
};

inline SubLattice sub_lattice(const TorusParams& t, int R) {
  validate(t);
  if (R < 1) throw config_error("sub-lattice parameter R must be >= 1");
  const int spacing = 2 * R + 1;
  const std::uint64_t per_axis = t.n / static_cast<std::uint32_t>(spacing);
  if (per_axis < 1)
    throw config_error("sub-lattice spacing " + std::to_string(spacing) +
                       " exceeds side length " + std::to_string(t.n));
  SubLattice sl;
  sl.spacing = spacing;
  sl.tau = 1;
  for (int i = 0; i < t.d; ++i) sl.tau *= per_axis;
  sl.centers.reserve(sl.tau);
  std::vector<int> alpha(static_cast<std::size_t>(t.d), 0);
  std::vector<int> coords(static_cast<std::size_t>(t.d));
  for (std::uint64_t c = 0; c < sl.tau; ++c) {
    for (int i = 0; i < t.d; ++i)
      coords[static_cast<std::size_t>(i)] =
          alpha[static_cast<std::size_t>(i)] * spacing;
    sl.centers.push_back(index_of(t, coords));
    for (int i = t.d - 1; i >= 0; --i) {
      if (++alpha[static_cast<std::size_t>(i)] <
          static_cast<int>(per_axis))
        break;
      alpha[static_cast<std::size_t>(i)] = 0;
    }
  }
  return sl;
}

namespace detail {

inline int torus_distance_bfs(const TorusParams& t, Vertex x, Vertex y) {
  const std::uint64_t count = vertex_count(t);
  std::vector<int> dist(count, -1);
  std::vector<Vertex> frontier{x};
  dist[x] = 0;
  int level = 0;
  while (!frontier.empty()) {
    ++level;
    std::vector<Vertex> next;
    for (Vertex v : frontier) {
      for (Vertex w : neighbors(t, v)) {
        if (dist[w] >= 0) continue;
        if (w == y) return level;
        dist[w] = level;
        next.push_back(w);
      }
    }
    frontier = std::move(next);
  }
  throw infeasible_error("torus is not connected (unreachable)");
}

}  // namespace detail

// Graph distance: smallest r with y in B(x,r), answered from the cached ball
// templates while they are valid for this n, with a plain BFS fallback for
// small tori where the templates stop applying.
inline int torus_distance(const TorusParams& t, Vertex x, Vertex y) {
  check_vertex(t, x);
  check_vertex(t, y);
  if (x == y) return 0;
  const auto delta = minimal_offset(t, x, y);
  for (int r = 1;
       static_cast<std::uint64_t>(t.n) >
       2ull * static_cast<std::uint64_t>(t.rho) * static_cast<std::uint64_t>(r);
       ++r) {
    if (offset_ball(t.d, t.norm_p, t.rho, r)->contains(delta)) return r;
  }
  return detail::torus_distance_bfs(t, x, y);
}

}  // namespace zofield
