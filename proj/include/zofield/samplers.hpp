#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "zofield/configuration.hpp"
#include "zofield/errors.hpp"
#include "zofield/rng.hpp"
#include "zofield/torus.hpp"

namespace zofield {

// Exhaustive enumeration of the state space is allowed up to this many
// vertices; 2^24 states is seconds of work, beyond that the table is
// infeasible.
inline constexpr int exact_enumeration_bits = 24;

// Surface potential a and pair potential b of the Gibbs measure
//   mu(eta) = Z^-1 exp(a * sum_x eta(x) + b * sum_edges eta(x)eta(y)).
struct IsingParams {
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const IsingParams&, const IsingParams&) = default;
};

// For b = 0 the measure is a product: spins independent, +1 with this p.
inline double product_probability(double a) {
  return std::exp(a) / (std::exp(a) + std::exp(-a));
}

// ---------------------------------------------------------------------------
// Edge set of the torus graph, each unordered edge exactly once (x < y).

inline std::vector<std::pair<Vertex, Vertex>> edge_set(const TorusParams& t) {
  const std::uint64_t count = vertex_count(t);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Vertex x = 0; x < count; ++x)
    for (Vertex y : neighbors(t, x))
      if (x < y) edges.emplace_back(x, y);
  return edges;
}

// Flat per-vertex neighbor lists; the degree is the same at every vertex.
struct NeighborTable {
  int degree = 0;
  std::vector<std::uint32_t> flat;  // size n^d * degree

  std::span<const std::uint32_t> row(Vertex x) const {
    return {flat.data() + x * static_cast<std::uint64_t>(degree),
            static_cast<std::size_t>(degree)};
  }
};

inline std::shared_ptr<const NeighborTable> neighbor_table(
    const TorusParams& t) {
  const std::uint64_t count = vertex_count(t);
  if (count > (std::uint64_t{1} << 32))
    throw config_error("torus too large for a dense neighbor table");
  auto nt = std::make_shared<NeighborTable>();
  nt->degree = static_cast<int>(neighbors(t, 0).size());
  nt->flat.reserve(count * static_cast<std::uint64_t>(nt->degree));
  for (Vertex x = 0; x < count; ++x) {
    const auto nb = neighbors(t, x);
    if (static_cast<int>(nb.size()) != nt->degree)
      throw config_error("torus is not vertex-transitive (unreachable)");
    for (Vertex y : nb) nt->flat.push_back(static_cast<std::uint32_t>(y));
  }
  return nt;
}

// ---------------------------------------------------------------------------
// Product sampler.

inline Configuration sample_bernoulli(const TorusParams& t, double p,
                                      Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw config_error("bernoulli parameter must lie in [0,1]");
  const std::uint64_t count = vertex_count(t);
  Configuration c(t, false);
  for (Vertex v = 0; v < count; ++v)
    if (rng.bernoulli(p)) c.set(v, true);
  return c;
}

inline Configuration sample_bernoulli(const TorusParams& t, double p,
                                      std::uint64_t seed) {
  Rng rng(seed);
  return sample_bernoulli(t, p, rng);
}

// ---------------------------------------------------------------------------
// Exact Ising distribution on tiny tori: the full probability table over all
// 2^(n^d) configurations, normalized, with an inverse-CDF sampler.

class IsingExactTable {
 public:
  IsingExactTable(const TorusParams& t, const IsingParams& ising)
      : params_(t), ising_(ising) {
    const std::uint64_t count = vertex_count(t);
    if (count > exact_enumeration_bits)
      throw cap_error("exact enumeration needs n^d <= " +
                      std::to_string(exact_enumeration_bits) + " vertices");
    sites_ = static_cast<int>(count);
    const auto edges = edge_set(t);
    const std::uint64_t states = std::uint64_t{1} << sites_;

    std::vector<double> energy(states);
    double max_energy = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < states; ++mask) {
      const int plus = std::popcount(mask);
      const double spin_sum = 2.0 * plus - sites_;
      double pair_sum = 0.0;
      for (const auto& [x, y] : edges) {
        const double sx = (mask >> x) & 1 ? 1.0 : -1.0;
        const double sy = (mask >> y) & 1 ? 1.0 : -1.0;
        pair_sum += sx * sy;
      }
      energy[mask] = ising.a * spin_sum + ising.b * pair_sum;
      max_energy = std::max(max_energy, energy[mask]);
    }
    prob_.resize(states);
    double z = 0.0;
    for (std::uint64_t mask = 0; mask < states; ++mask) {
      prob_[mask] = std::exp(energy[mask] - max_energy);
      z += prob_[mask];
    }
    cdf_.resize(states);
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < states; ++mask) {
      prob_[mask] /= z;
      acc += prob_[mask];
      cdf_[mask] = acc;
    }
    cdf_.back() = 1.0;
  }

  const TorusParams& params() const { return params_; }
  const IsingParams& ising() const { return ising_; }
  int sites() const { return sites_; }

  double probability(std::uint64_t mask) const { return prob_[mask]; }
  std::span<const double> probabilities() const { return prob_; }

  double total_mass() const {
    double s = 0.0;
    for (double p : prob_) s += p;
    return s;
  }

  Configuration sample(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::uint64_t mask = static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                 static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    return Configuration::from_mask(params_, mask);
  }

 private:
  TorusParams params_;
  IsingParams ising_;
  int sites_ = 0;
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

inline IsingExactTable ising_exact_distribution(const TorusParams& t,
                                                const IsingParams& ising) {
  return IsingExactTable(t, ising);
}

inline Configuration ising_exact_sample(const TorusParams& t,
                                        const IsingParams& ising,
                                        std::uint64_t seed) {
  IsingExactTable table(t, ising);
  Rng rng(seed);
  return table.sample(rng);
}

// ---------------------------------------------------------------------------
// Heat-bath Gibbs chain with a systematic site scan. A site update resamples
// the spin from its conditional law given the neighborhood:
//   P(+1) = e^(a + bS) / (e^(a + bS) + e^-(a + bS)),  S = sum of neighbor spins.

struct GibbsOptions {
  std::uint64_t burn_in_sweeps = 64;
  std::uint64_t thin_sweeps = 1;
};

class GibbsChain {
 public:
  GibbsChain(const TorusParams& t, const IsingParams& ising, std::uint64_t seed,
             std::shared_ptr<const NeighborTable> nbrs = nullptr)
      : params_(t),
        ising_(ising),
        nbrs_(nbrs ? std::move(nbrs) : neighbor_table(t)),
        rng_(seed) {
    const std::uint64_t count = vertex_count(t);
    const int deg = nbrs_->degree;
    p_plus_.resize(static_cast<std::size_t>(2 * deg + 1));
    for (int s = -deg; s <= deg; ++s)
      p_plus_[static_cast<std::size_t>(s + deg)] =
          1.0 / (1.0 + std::exp(-2.0 * (ising.a + ising.b * s)));
    // Start from an unbiased coin flip per site, drawn from the chain stream.
    spins_.resize(count);
    for (auto& s : spins_) s = rng_.bernoulli(0.5) ? int8_t{1} : int8_t{-1};
  }

  const TorusParams& params() const { return params_; }
  std::uint64_t site_count() const { return spins_.size(); }
  std::span<const std::int8_t> spins() const { return spins_; }

  void sweep() {
    const int deg = nbrs_->degree;
    const std::uint64_t count = spins_.size();
    for (Vertex x = 0; x < count; ++x) {
      int s = 0;
      for (std::uint32_t y : nbrs_->row(x)) s += spins_[y];
      spins_[x] = rng_.uniform01() < p_plus_[static_cast<std::size_t>(s + deg)]
                      ? int8_t{1}
                      : int8_t{-1};
    }
  }

  void run_sweeps(std::uint64_t k) {
    for (std::uint64_t i = 0; i < k; ++i) sweep();
  }

  Configuration snapshot() const {
    Configuration c(params_, false);
    for (Vertex v = 0; v < spins_.size(); ++v)
      if (spins_[v] > 0) c.set(v, true);
    return c;
  }

  double update_probability_plus(int neighbor_spin_sum) const {
    return p_plus_[static_cast<std::size_t>(neighbor_spin_sum +
                                            nbrs_->degree)];
  }

 private:
  TorusParams params_;
  IsingParams ising_;
  std::shared_ptr<const NeighborTable> nbrs_;
  std::vector<std::int8_t> spins_;
  std::vector<double> p_plus_;
  Rng rng_;
};

// Post-burn-in snapshots, one per sweep. For long chains prefer driving
// GibbsChain directly and folding over spins() to avoid storing snapshots.
inline std::vector<Configuration> ising_gibbs_chain(const TorusParams& t,
                                                    const IsingParams& ising,
                                                    std::uint64_t sweeps,
                                                    std::uint64_t burn_in,
                                                    std::uint64_t seed) {
  if (sweeps < 1) throw config_error("gibbs chain needs sweeps >= 1");
  GibbsChain chain(t, ising, seed);
  chain.run_sweeps(burn_in);
  std::vector<Configuration> out;
  out.reserve(sweeps);
  for (std::uint64_t i = 0; i < sweeps; ++i) {
    chain.sweep();
    out.push_back(chain.snapshot());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local energy of a ball given its boundary colors, and the conditional law
// of the ball colors it induces. The boundary of B(x,r) is exactly the next
// shell B(x,r+1) \ B(x,r); energy terms not touching the ball cancel in the
// conditional, so the ratio of exponentials below is the true conditional of
// the Gibbs measure.

inline std::vector<std::vector<int>> boundary_offsets(int d, int norm_p,
                                                      int rho, int r) {
  const auto inner = offset_ball(d, norm_p, rho, r);
  const auto outer = offset_ball(d, norm_p, rho, r + 1);
  std::vector<std::vector<int>> shell;
  shell.reserve(outer->beta() - inner->beta());
  for (const auto& off : outer->offsets)
    if (!inner->contains(off)) shell.push_back(off);
  return shell;  // already lexicographic
}

namespace detail {

struct BallEnvironment {
  std::vector<Vertex> ball_verts;      // canonical offset order
  std::vector<Vertex> boundary_verts;  // canonical offset order
  // edges as index pairs (positions within ball_verts / boundary_verts)
  std::vector<std::pair<int, int>> inner_edges;  // ball-ball
  std::vector<std::pair<int, int>> cross_edges;  // ball-boundary
};

inline BallEnvironment ball_environment(const TorusParams& t, Vertex x,
                                        int r) {
  const auto ball = ball_template(t, r);
  ball_template(t, r + 1);  // validates that the boundary shell fits too
  BallEnvironment env;
  env.ball_verts = translate_ball(*ball, x, t);
  const auto shell = boundary_offsets(t.d, t.norm_p, t.rho, r);
  const auto cx = coords_of(t, x);
  const int n = static_cast<int>(t.n);
  std::vector<int> cy(static_cast<std::size_t>(t.d));
  for (const auto& off : shell) {
    for (int i = 0; i < t.d; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      cy[ui] = ((cx[ui] + off[ui]) % n + n) % n;
    }
    env.boundary_verts.push_back(index_of(t, cy));
  }
  std::map<Vertex, int> ball_pos, boundary_pos;
  for (std::size_t j = 0; j < env.ball_verts.size(); ++j)
    ball_pos[env.ball_verts[j]] = static_cast<int>(j);
  for (std::size_t j = 0; j < env.boundary_verts.size(); ++j)
    boundary_pos[env.boundary_verts[j]] = static_cast<int>(j);
  for (std::size_t j = 0; j < env.ball_verts.size(); ++j) {
    const Vertex u = env.ball_verts[j];
    for (Vertex v : neighbors(t, u)) {
      if (auto it = ball_pos.find(v); it != ball_pos.end()) {
        if (u < v) env.inner_edges.emplace_back(static_cast<int>(j),
                                                it->second);
      } else if (auto bt = boundary_pos.find(v); bt != boundary_pos.end()) {
        env.cross_edges.emplace_back(static_cast<int>(j), bt->second);
      }
      // neighbors of a ball vertex are inside the next shell by definition
    }
  }
  return env;
}

inline double environment_energy(const BallEnvironment& env,
                                 const IsingParams& ising,
                                 std::uint64_t ball_mask,
                                 std::span<const int8_t> boundary_spins) {
  const auto ball_spin = [&](int j) {
    return (ball_mask >> j) & 1 ? 1.0 : -1.0;
  };
  double spin_sum = 0.0;
  for (std::size_t j = 0; j < env.ball_verts.size(); ++j)
    spin_sum += ball_spin(static_cast<int>(j));
  double pair_sum = 0.0;
  for (const auto& [u, v] : env.inner_edges)
    pair_sum += ball_spin(u) * ball_spin(v);
  for (const auto& [u, v] : env.cross_edges)
    pair_sum += ball_spin(u) * boundary_spins[static_cast<std::size_t>(v)];
  return ising.a * spin_sum + ising.b * pair_sum;
}

}  // namespace detail

// Local energy of (ball colors, boundary colors) around x: surface term over
// the ball plus pair terms over every edge with at least one endpoint inside.
inline double ball_local_energy(const TorusParams& t, const IsingParams& ising,
                                Vertex x, int r, std::uint64_t ball_mask,
                                std::span<const int8_t> boundary_spins) {
  const auto env = detail::ball_environment(t, x, r);
  if (boundary_spins.size() != env.boundary_verts.size())
    throw config_error("boundary spin vector has the wrong length");
  return detail::environment_energy(env, ising, ball_mask, boundary_spins);
}

// Conditional law of the ball colors around x given boundary colors: one
// probability per complete description, indexed by color mask.
inline std::vector<double> conditional_ball_distribution(
    const TorusParams& t, const IsingParams& ising, Vertex x, int r,
    std::span<const int8_t> boundary_spins) {
  const auto env = detail::ball_environment(t, x, r);
  if (boundary_spins.size() != env.boundary_verts.size())
    throw config_error("boundary spin vector has the wrong length");
  const std::size_t beta = env.ball_verts.size();
  if (beta > 20)
    throw cap_error("conditional ball law needs beta <= 20");
  const std::uint64_t states = std::uint64_t{1} << beta;
  std::vector<double> energy(states);
  double max_energy = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    energy[mask] =
        detail::environment_energy(env, ising, mask, boundary_spins);
    max_energy = std::max(max_energy, energy[mask]);
  }
  std::vector<double> prob(states);
  double z = 0.0;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    prob[mask] = std::exp(energy[mask] - max_energy);
    z += prob[mask];
  }
  for (auto& p : prob) p /= z;
  return prob;
}

// Boundary vertices of B(x,r) in canonical shell-offset order; pairs with the
// boundary_spins arguments above.
inline std::vector<Vertex> ball_boundary_vertices(const TorusParams& t,
                                                  Vertex x, int r) {
  return detail::ball_environment(t, x, r).boundary_verts;
}

// ---------------------------------------------------------------------------
// Thresholded moving-average field: iid innovations on the torus, a finite
// convolution kernel, and a threshold mapping the real field to colors.

struct ShiftFieldParams {
  enum class Innovation { gaussian, rademacher, uniform };

  // Kernel taps: offset -> weight, canonical (lexicographic) offset order.
  std::vector<std::pair<std::vector<int>, double>> kernel;
  double threshold = 0.0;
  Innovation innovation = Innovation::gaussian;
};

inline std::string innovation_to_string(ShiftFieldParams::Innovation inn) {
  switch (inn) {
    case ShiftFieldParams::Innovation::gaussian: return "gaussian";
    case ShiftFieldParams::Innovation::rademacher: return "rademacher";
    case ShiftFieldParams::Innovation::uniform: return "uniform";
  }
  return "gaussian";
}

inline ShiftFieldParams::Innovation innovation_from_string(
    const std::string& s) {
  if (s == "gaussian") return ShiftFieldParams::Innovation::gaussian;
  if (s == "rademacher") return ShiftFieldParams::Innovation::rademacher;
  if (s == "uniform") return ShiftFieldParams::Innovation::uniform;
  throw config_error("unknown innovation \"" + s +
                     "\" (want gaussian, rademacher, or uniform)");
}

inline void validate_shift_field(const ShiftFieldParams& sf, const TorusParams& t) {
  if (sf.kernel.empty())
    throw config_error("shift field kernel must not be empty");
  bool nonzero = false;
  for (const auto& [off, w] : sf.kernel) {
    if (static_cast<int>(off.size()) != t.d)
      throw config_error("shift field kernel offset arity must equal d");
    if (w != 0.0) nonzero = true;
  }
  if (!nonzero)
    throw config_error("shift field kernel needs at least one nonzero weight");
  for (int i = 0; i < t.d; ++i) {
    int lo = 0, hi = 0;
    for (const auto& [off, w] : sf.kernel) {
      lo = std::min(lo, off[static_cast<std::size_t>(i)]);
      hi = std::max(hi, off[static_cast<std::size_t>(i)]);
    }
    if (hi - lo >= static_cast<int>(t.n))
      throw config_error("shift field kernel support does not fit the torus");
  }
}

// Innovations are drawn on the torus itself (periodic), an explicit
// approximation of the infinite-lattice definition.
inline Configuration sample_shift_field(const TorusParams& t,
                                        const ShiftFieldParams& sf, Rng& rng) {
  validate_shift_field(sf, t);
  const std::uint64_t count = vertex_count(t);
  std::vector<double> xi(count);
  for (std::uint64_t v = 0; v < count; ++v) {
    switch (sf.innovation) {
      case ShiftFieldParams::Innovation::gaussian:
        xi[v] = rng.gaussian();
        break;
      case ShiftFieldParams::Innovation::rademacher:
        xi[v] = rng.uniform01() < 0.5 ? 1.0 : -1.0;
        break;
      case ShiftFieldParams::Innovation::uniform:
        xi[v] = 2.0 * rng.uniform01() - 1.0;
        break;
    }
  }
  // Y_t = sum_s w_s * xi_{t-s}: gather offsets are the negated taps.
  const int n = static_cast<int>(t.n);
  std::vector<std::vector<Vertex>> tap_term;
  std::vector<double> tap_weight;
  std::vector<Vertex> stride(static_cast<std::size_t>(t.d), 1);
  for (int i = t.d - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] * t.n;
  for (const auto& [off, w] : sf.kernel) {
    tap_weight.push_back(w);
    for (int i = 0; i < t.d; ++i) {
      std::vector<Vertex> tab(static_cast<std::size_t>(n));
      for (int c = 0; c < n; ++c)
        tab[static_cast<std::size_t>(c)] =
            static_cast<Vertex>(((c - off[static_cast<std::size_t>(i)]) % n +
                                 n) % n) *
            stride[static_cast<std::size_t>(i)];
      tap_term.push_back(std::move(tab));
    }
  }
  Configuration out(t, false);
  std::vector<int> coords(static_cast<std::size_t>(t.d), 0);
  const std::size_t d = static_cast<std::size_t>(t.d);
  for (std::uint64_t v = 0; v < count; ++v) {
    double y = 0.0;
    for (std::size_t k = 0; k < tap_weight.size(); ++k) {
      Vertex src = 0;
      for (std::size_t i = 0; i < d; ++i)
        src += tap_term[k * d + i][static_cast<std::size_t>(coords[i])];
      y += tap_weight[k] * xi[src];
    }
    if (y > sf.threshold) out.set(v, true);
    detail::advance_coords(t, coords);
  }
  return out;
}

inline Configuration sample_shift_field(const TorusParams& t,
                                        const ShiftFieldParams& sf,
                                        std::uint64_t seed) {
  Rng rng(seed);
  return sample_shift_field(t, sf, rng);
}

// ---------------------------------------------------------------------------
// Potential schedules a(n), b(n) for threshold sweeps. The parametric rule is
//   a(n) = log(c) - (d / 2k) * theta * log(n),  b(n) = const,
// so e^{a(n)} = c * n^(-theta * d / 2k): theta < 1 sits above the threshold
// for index k, theta > 1 below it.

struct PotentialSchedule {
  struct Parametric {
    double c = 1.0;
    int k = 1;
    double theta = 1.0;
    double b = 0.0;
  };
  using Table = std::map<std::uint32_t, IsingParams>;

  int d = 1;
  std::variant<Parametric, Table> rule;
};

inline IsingParams schedule_eval(const PotentialSchedule& schedule,
                                 std::uint32_t n) {
  IsingParams out;
  if (std::holds_alternative<PotentialSchedule::Parametric>(schedule.rule)) {
    const auto& p = std::get<PotentialSchedule::Parametric>(schedule.rule);
    if (p.c <= 0.0) throw config_error("schedule parameter c must be > 0");
    if (p.k < 1) throw config_error("schedule parameter k must be >= 1");
    out.a = std::log(p.c) -
            (static_cast<double>(schedule.d) / (2.0 * p.k)) * p.theta *
                std::log(static_cast<double>(n));
    out.b = p.b;
  } else {
    const auto& table = std::get<PotentialSchedule::Table>(schedule.rule);
    const auto it = table.find(n);
    if (it == table.end())
      throw config_error("schedule table has no entry for n = " +
                         std::to_string(n));
    out = it->second;
  }
  if (out.a >= 0.0)
    throw config_error("schedule yields a(" + std::to_string(n) +
                       ") >= 0; surface potential must be negative");
  return out;
}

// ---------------------------------------------------------------------------
// A sampler specification: product Bernoulli, Ising, or thresholded
// moving-average field.

struct IsingSamplerOptions {
  enum class Mode { automatic, exact, gibbs };
  Mode mode = Mode::automatic;
  std::uint64_t burn_in_sweeps = 64;
};

struct FieldModel {
  enum class Kind { bernoulli, ising, shift };

  Kind kind = Kind::bernoulli;
  double p = 0.5;  // bernoulli
  IsingParams ising;
  IsingSamplerOptions ising_opts;
  ShiftFieldParams shift;

  static FieldModel make_bernoulli(double p) {
    FieldModel m;
    m.kind = Kind::bernoulli;
    m.p = p;
    return m;
  }

  static FieldModel make_ising(double a, double b,
                               IsingSamplerOptions opts = {}) {
    FieldModel m;
    m.kind = Kind::ising;
    m.ising = {a, b};
    m.ising_opts = opts;
    return m;
  }

  static FieldModel make_shift(ShiftFieldParams sf) {
    FieldModel m;
    m.kind = Kind::shift;
    m.shift = std::move(sf);
    return m;
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string model_to_string(const FieldModel& m) {
  switch (m.kind) {
    case FieldModel::Kind::bernoulli:
      return "bernoulli(p=" + detail::fmt_double(m.p) + ")";
    case FieldModel::Kind::ising:
      return "ising(a=" + detail::fmt_double(m.ising.a) +
             ",b=" + detail::fmt_double(m.ising.b) + ")";
    case FieldModel::Kind::shift: {
      std::string s = "shift(threshold=" + detail::fmt_double(m.shift.threshold) +
                      ",innovation=" + innovation_to_string(m.shift.innovation) +
                      ",kernel=";
      for (std::size_t i = 0; i < m.shift.kernel.size(); ++i) {
        if (i) s += ' ';
        const auto& [off, w] = m.shift.kernel[i];
        for (std::size_t j = 0; j < off.size(); ++j) {
          if (j) s += ',';
          s += std::to_string(off[j]);
        }
        s += ':';
        s += detail::fmt_double(w);
      }
      return s + ")";
    }
  }
  return {};
}

// Prepared repeated-draw sampler for a model on a fixed torus. The draw
// strategy depends only on the parameters, never on sampled data, so a
// (seed, replica) pair always maps to the same configuration:
//   - bernoulli, and ising with b = 0: independent spins;
//   - ising with n^d small enough: exact inverse-CDF table;
//   - other ising: one independent heat-bath chain per draw, burn-in sweeps
//     from the replica's own stream;
//   - shift field: direct convolution.
class ModelSampler {
 public:
  enum class Strategy { product, exact_table, gibbs_chain, shift };

  ModelSampler(const TorusParams& t, const FieldModel& model)
      : params_(t), model_(model) {
    const std::uint64_t count = vertex_count(t);
    switch (model.kind) {
      case FieldModel::Kind::bernoulli:
        strategy_ = Strategy::product;
        product_p_ = model.p;
        if (!(product_p_ >= 0.0 && product_p_ <= 1.0))
          throw config_error("bernoulli parameter must lie in [0,1]");
        break;
      case FieldModel::Kind::shift:
        strategy_ = Strategy::shift;
        validate_shift_field(model.shift, t);
        break;
      case FieldModel::Kind::ising: {
        const auto mode = model.ising_opts.mode;
        if (mode == IsingSamplerOptions::Mode::exact ||
            (mode == IsingSamplerOptions::Mode::automatic &&
             model.ising.b == 0.0)) {
          if (model.ising.b == 0.0) {
            strategy_ = Strategy::product;
            product_p_ = product_probability(model.ising.a);
            break;
          }
        }
        if (mode == IsingSamplerOptions::Mode::exact) {
          strategy_ = Strategy::exact_table;
          table_ = std::make_shared<IsingExactTable>(t, model.ising);
        } else if (mode == IsingSamplerOptions::Mode::gibbs) {
          strategy_ = Strategy::gibbs_chain;
          nbrs_ = neighbor_table(t);
        } else if (count <= exact_enumeration_bits) {
          strategy_ = Strategy::exact_table;
          table_ = std::make_shared<IsingExactTable>(t, model.ising);
        } else {
          strategy_ = Strategy::gibbs_chain;
          nbrs_ = neighbor_table(t);
        }
        break;
      }
    }
  }

  const TorusParams& params() const { return params_; }
  const FieldModel& model() const { return model_; }
  Strategy strategy() const { return strategy_; }

  Configuration sample(Rng& rng) const {
    switch (strategy_) {
      case Strategy::product:
        return sample_bernoulli(params_, product_p_, rng);
      case Strategy::exact_table:
        return table_->sample(rng);
      case Strategy::shift:
        return sample_shift_field(params_, model_.shift, rng);
      case Strategy::gibbs_chain: {
        GibbsChain chain(params_, model_.ising, rng.bits(), nbrs_);
        chain.run_sweeps(model_.ising_opts.burn_in_sweeps);
        chain.sweep();
        return chain.snapshot();
      }
    }
    throw config_error("unreachable sampler strategy");
  }

  // Exact per-configuration mass, available for bernoulli and ising only.
  bool has_exact_mass() const {
    return model_.kind != FieldModel::Kind::shift;
  }

 private:
  TorusParams params_;
  FieldModel model_;
  Strategy strategy_ = Strategy::product;
  double product_p_ = 0.5;
  std::shared_ptr<const IsingExactTable> table_;
  std::shared_ptr<const NeighborTable> nbrs_;
};

}  // namespace zofield
