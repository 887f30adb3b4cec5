#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zofield/errors.hpp"
#include "zofield/torus.hpp"

namespace zofield {

// A spin assignment on the torus, bit-packed in row-major vertex order.
// Bit set <=> spin +1 <=> the vertex is black.
class Configuration {
 public:
  Configuration() = default;

  explicit Configuration(const TorusParams& t, bool black = false)
      : params_(t), size_(vertex_count(t)) {
    words_.assign((size_ + 63) / 64, black ? ~std::uint64_t{0} : 0);
    trim();
  }

  static Configuration all_white(const TorusParams& t) {
    return Configuration(t, false);
  }
  static Configuration all_black(const TorusParams& t) {
    return Configuration(t, true);
  }

  // Build from an integer state index; usable when n^d <= 64.
  static Configuration from_mask(const TorusParams& t, std::uint64_t mask) {
    Configuration c(t, false);
    if (c.size_ > 64) throw cap_error("configuration mask needs n^d <= 64");
    if (c.size_ < 64) mask &= (std::uint64_t{1} << c.size_) - 1;
    if (!c.words_.empty()) c.words_[0] = mask;
    return c;
  }

  std::uint64_t as_mask() const {
    if (size_ > 64) throw cap_error("configuration mask needs n^d <= 64");
    return words_.empty() ? 0 : words_[0];
  }

  const TorusParams& params() const { return params_; }
  std::uint64_t size() const { return size_; }

  bool get(Vertex v) const {
    return (words_[v >> 6] >> (v & 63)) & std::uint64_t{1};
  }

  void set(Vertex v, bool black) {
    const std::uint64_t bit = std::uint64_t{1} << (v & 63);
    if (black)
      words_[v >> 6] |= bit;
    else
      words_[v >> 6] &= ~bit;
  }

  std::uint64_t black_count() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.params_ == b.params_ && a.words_ == b.words_;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  TorusParams params_;
  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Colors on the offsets of one ball template, in canonical offset order.
// Doubles as a complete description: one asserted or negated color per
// ball vertex, nothing missing.
class LocalConfiguration {
 public:
  LocalConfiguration() = default;

  explicit LocalConfiguration(std::shared_ptr<const BallTemplate> ball,
                              bool black = false)
      : ball_(std::move(ball)) {
    bits_.assign((beta() + 63) / 64, black ? ~std::uint64_t{0} : 0);
    trim();
  }

  static LocalConfiguration from_mask(std::shared_ptr<const BallTemplate> ball,
                                      std::uint64_t mask) {
    LocalConfiguration lc(std::move(ball), false);
    if (lc.beta() > 64) throw cap_error("ball mask needs beta <= 64");
    if (lc.beta() < 64) mask &= (std::uint64_t{1} << lc.beta()) - 1;
    if (!lc.bits_.empty()) lc.bits_[0] = mask;
    return lc;
  }

  // Colors as '+'/'-' characters in canonical offset order.
  static LocalConfiguration from_string(std::shared_ptr<const BallTemplate> ball,
                                        std::string_view s) {
    LocalConfiguration lc(std::move(ball), false);
    if (s.size() != lc.beta())
      throw config_error("color string length " + std::to_string(s.size()) +
                         " does not match ball size " +
                         std::to_string(lc.beta()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '+')
        lc.set(i, true);
      else if (s[i] != '-')
        throw config_error("color string may contain only '+' and '-'");
    }
    return lc;
  }

  const std::shared_ptr<const BallTemplate>& ball() const { return ball_; }
  std::size_t beta() const { return ball_ ? ball_->beta() : 0; }

  bool get(std::size_t i) const {
    return (bits_[i >> 6] >> (i & 63)) & std::uint64_t{1};
  }

  void set(std::size_t i, bool black) {
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (black)
      bits_[i >> 6] |= bit;
    else
      bits_[i >> 6] &= ~bit;
  }

  std::uint64_t mask() const {
    if (beta() > 64) throw cap_error("ball mask needs beta <= 64");
    return bits_.empty() ? 0 : bits_[0];
  }

  std::size_t plus_count() const {
    std::size_t c = 0;
    for (std::uint64_t w : bits_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  std::string to_string() const {
    std::string s(beta(), '-');
    for (std::size_t i = 0; i < beta(); ++i)
      if (get(i)) s[i] = '+';
    return s;
  }

  std::span<const std::uint64_t> words() const { return bits_; }

  friend bool operator==(const LocalConfiguration& a,
                         const LocalConfiguration& b) {
    if (!a.ball_ || !b.ball_) return a.ball_ == b.ball_ && a.bits_ == b.bits_;
    return a.ball_->d == b.ball_->d && a.ball_->norm_p == b.ball_->norm_p &&
           a.ball_->rho == b.ball_->rho && a.ball_->radius == b.ball_->radius &&
           a.bits_ == b.bits_;
  }

 private:
  void trim() {
    const std::size_t b = beta();
    if (b % 64 != 0 && !bits_.empty())
      bits_.back() &= (std::uint64_t{1} << (b % 64)) - 1;
  }

  std::shared_ptr<const BallTemplate> ball_;
  std::vector<std::uint64_t> bits_;
};

// Precomputed per-offset, per-axis index terms for translating one ball
// template around a fixed torus. Built once per (template, n), then a gather
// is d table lookups per ball vertex; this is the hot path of every
// counting and matching loop.
class BallGatherPlan {
 public:
  BallGatherPlan(std::shared_ptr<const BallTemplate> ball,
                 const TorusParams& t)
      : ball_(std::move(ball)), params_(t) {
    ensure_usable(*ball_, t);
    const int n = static_cast<int>(t.n);
    std::vector<Vertex> stride(static_cast<std::size_t>(t.d), 1);
    for (int i = t.d - 2; i >= 0; --i)
      stride[static_cast<std::size_t>(i)] =
          stride[static_cast<std::size_t>(i + 1)] * t.n;
    axis_term_.resize(ball_->beta() * static_cast<std::size_t>(t.d));
    for (std::size_t j = 0; j < ball_->beta(); ++j) {
      for (int i = 0; i < t.d; ++i) {
        auto& tab = axis_term_[j * static_cast<std::size_t>(t.d) +
                               static_cast<std::size_t>(i)];
        tab.resize(static_cast<std::size_t>(n));
        const int off = ball_->offsets[j][static_cast<std::size_t>(i)];
        for (int c = 0; c < n; ++c)
          tab[static_cast<std::size_t>(c)] =
              static_cast<Vertex>(((c + off) % n + n) % n) *
              stride[static_cast<std::size_t>(i)];
      }
    }
  }

  const BallTemplate& ball() const { return *ball_; }
  const TorusParams& params() const { return params_; }

  // Vertex index of ball offset j around the site with the given coordinates.
  Vertex at(std::span<const int> coords, std::size_t j) const {
    const std::size_t d = static_cast<std::size_t>(params_.d);
    Vertex v = 0;
    const auto* tabs = &axis_term_[j * d];
    for (std::size_t i = 0; i < d; ++i)
      v += tabs[i][static_cast<std::size_t>(coords[i])];
    return v;
  }

  // True iff the configuration matches `local` on the ball around `coords`.
  bool matches(const Configuration& config, std::span<const int> coords,
               const LocalConfiguration& local) const {
    const std::size_t b = ball_->beta();
    for (std::size_t j = 0; j < b; ++j)
      if (config.get(at(coords, j)) != local.get(j)) return false;
    return true;
  }

  // Gather ball colors around `coords` into `out` (word-packed, beta bits).
  void gather(const Configuration& config, std::span<const int> coords,
              std::span<std::uint64_t> out) const {
    const std::size_t b = ball_->beta();
    for (std::size_t w = 0; w < out.size(); ++w) out[w] = 0;
    for (std::size_t j = 0; j < b; ++j)
      if (config.get(at(coords, j))) out[j >> 6] |= std::uint64_t{1} << (j & 63);
  }

 private:
  std::shared_ptr<const BallTemplate> ball_;
  TorusParams params_;
  std::vector<std::vector<Vertex>> axis_term_;
};

namespace detail {

// Row-major odometer: advance `coords` to the next vertex index.
inline void advance_coords(const TorusParams& t, std::vector<int>& coords) {
  for (int i = t.d - 1; i >= 0; --i) {
    if (++coords[static_cast<std::size_t>(i)] < static_cast<int>(t.n)) return;
    coords[static_cast<std::size_t>(i)] = 0;
  }
}

}  // namespace detail

// Restriction of a configuration to the ball around x.
inline LocalConfiguration restrict_to_ball(
    const Configuration& config, Vertex x,
    std::shared_ptr<const BallTemplate> ball) {
  const auto verts = translate_ball(*ball, x, config.params());
  LocalConfiguration lc(std::move(ball));
  for (std::size_t j = 0; j < verts.size(); ++j) lc.set(j, config.get(verts[j]));
  return lc;
}

// Indicator of "the configuration realizes `local` on the ball around x".
inline bool match_at(const Configuration& config, Vertex x,
                     const LocalConfiguration& local) {
  const auto verts = translate_ball(*local.ball(), x, config.params());
  for (std::size_t j = 0; j < verts.size(); ++j)
    if (config.get(verts[j]) != local.get(j)) return false;
  return true;
}

// Number of vertices whose ball realizes `local`, over the whole torus.
inline std::uint64_t count_matches(const Configuration& config,
                                   const LocalConfiguration& local) {
  const TorusParams& t = config.params();
  BallGatherPlan plan(local.ball(), t);
  const std::uint64_t count = vertex_count(t);
  std::vector<int> coords(static_cast<std::size_t>(t.d), 0);
  std::uint64_t hits = 0;
  for (std::uint64_t v = 0; v < count; ++v) {
    if (plan.matches(config, coords, local)) ++hits;
    detail::advance_coords(t, coords);
  }
  return hits;
}

// Same count restricted to the centers of a sub-lattice.
inline std::uint64_t count_matches(const Configuration& config,
                                   const LocalConfiguration& local,
                                   const SubLattice& sl) {
  const TorusParams& t = config.params();
  BallGatherPlan plan(local.ball(), t);
  std::uint64_t hits = 0;
  for (Vertex c : sl.centers) {
    const auto coords = coords_of(t, c);
    if (plan.matches(config, coords, local)) ++hits;
  }
  return hits;
}

// Cyclic shift of the whole configuration by the given coordinate offset.
inline Configuration translate_configuration(const Configuration& config,
                                             std::span<const int> shift) {
  const TorusParams& t = config.params();
  if (static_cast<int>(shift.size()) != t.d)
    throw config_error("shift arity does not match torus dimension");
  Configuration out(t, false);
  const std::uint64_t count = vertex_count(t);
  const int n = static_cast<int>(t.n);
  std::vector<int> coords(static_cast<std::size_t>(t.d), 0);
  std::vector<int> moved(static_cast<std::size_t>(t.d));
  for (std::uint64_t v = 0; v < count; ++v) {
    for (int i = 0; i < t.d; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      moved[ui] = ((coords[ui] + shift[ui]) % n + n) % n;
    }
    if (config.get(v)) out.set(index_of(t, moved), true);
    detail::advance_coords(t, coords);
  }
  return out;
}

// Textual dump: header "d n p rho", then n^d characters '+'/'-' in row-major
// order on the next line.
inline std::string configuration_to_text(const Configuration& config) {
  const TorusParams& t = config.params();
  std::ostringstream os;
  os << t.d << ' ' << t.n << ' ' << norm_to_string(t.norm_p) << ' ' << t.rho
     << '\n';
  const std::uint64_t count = vertex_count(t);
  std::string body(count, '-');
  for (std::uint64_t v = 0; v < count; ++v)
    if (config.get(v)) body[v] = '+';
  os << body << '\n';
  return os.str();
}

inline Configuration configuration_from_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  TorusParams t;
  std::string p;
  if (!(is >> t.d >> t.n >> p >> t.rho))
    throw config_error("bad configuration dump header (want \"d n p rho\")");
  t.norm_p = norm_from_string(p);
  const std::uint64_t count = vertex_count(t);
  std::string body;
  if (!(is >> body) || body.size() != count)
    throw config_error("configuration dump body must hold exactly n^d colors");
  Configuration c(t, false);
  for (std::uint64_t v = 0; v < count; ++v) {
    if (body[v] == '+')
      c.set(v, true);
    else if (body[v] != '-')
      throw config_error("configuration dump may contain only '+' and '-'");
  }
  return c;
}

}  // namespace zofield
