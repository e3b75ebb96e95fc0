#include "ddvi/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ddvi {

namespace {

// Draws from [lo, hi] with both endpoints excluded.
double draw_open(std::mt19937_64& rng, double lo, double hi, PointDistribution dist) {
  if (dist == PointDistribution::uniform) {
    std::uniform_real_distribution<double> u(lo, hi);
    for (;;) {
      const double v = u(rng);
      if (v > lo && v < hi) return v;
    }
  }
  std::normal_distribution<double> n(0.5 * (lo + hi), 0.25 * (hi - lo));
  for (;;) {
    const double v = n(rng);
    if (v > lo && v < hi) return v;
  }
}

std::vector<Point> draw_interior(const Rect& r, std::size_t count, PointDistribution dist,
                                 std::mt19937_64& rng) {
  std::vector<Point> pts(count);
  for (auto& p : pts) {
    p.x = draw_open(rng, r.x_min, r.x_max, dist);
    p.y = draw_open(rng, r.y_min, r.y_max, dist);
  }
  return pts;
}

std::vector<Point> draw_on_segment(const Segment& s, std::size_t count, PointDistribution dist,
                                   std::mt19937_64& rng) {
  std::vector<Point> pts(count);
  for (auto& p : pts) {
    const double t = draw_open(rng, 0.0, 1.0, dist);
    p = {s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)};
  }
  return pts;
}

void draw_edges(const Subdomain& sub, const SamplerConfig& cfg, std::mt19937_64& rng, TrainSet& ts) {
  ts.boundary.clear();
  for (const auto& e : sub.physical_edges) {
    auto pts = draw_on_segment(e, edge_count(e, cfg.spacing_h), cfg.distribution, rng);
    ts.boundary.insert(ts.boundary.end(), pts.begin(), pts.end());
  }
  ts.interface.clear();
  for (const auto& itf : sub.interfaces) {
    ts.interface.push_back(
        draw_on_segment(itf.segment, edge_count(itf.segment, cfg.spacing_h), cfg.distribution, rng));
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(seed ^ mix_seed(stream));
}

const char* to_string(PointDistribution d) {
  return d == PointDistribution::uniform ? "uniform" : "normal_clipped";
}

PointDistribution distribution_from_string(const std::string& s) {
  if (s == "uniform") return PointDistribution::uniform;
  if (s == "normal_clipped" || s == "normal-clipped" || s == "normal") {
    return PointDistribution::normal_clipped;
  }
  throw std::invalid_argument("unknown distribution '" + s + "'");
}

void SamplerConfig::validate() const {
  if (!(spacing_h > 0.0) || !std::isfinite(spacing_h)) {
    throw std::invalid_argument("SamplerConfig: spacing_h must be positive");
  }
  if (adopt_k > pool_size) {
    throw std::invalid_argument("SamplerConfig: adopt_k must not exceed pool_size");
  }
}

std::size_t TrainSet::interface_count() const {
  std::size_t n = 0;
  for (const auto& s : interface) n += s.size();
  return n;
}

std::vector<Point> TrainSet::interface_flat() const {
  std::vector<Point> out;
  out.reserve(interface_count());
  for (const auto& s : interface) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::size_t interior_count(const Rect& r, double h) {
  // Guard against 2.2/0.01 evaluating to 220.00000000000003.
  const double q = r.area() / (h * h);
  return static_cast<std::size_t>(std::ceil(q * (1.0 - 1e-12)));
}

std::size_t edge_count(const Segment& s, double h) {
  const double q = s.length() / h;
  return static_cast<std::size_t>(std::ceil(q * (1.0 - 1e-12)));
}

TrainSet sample_trainset(const Subdomain& sub, const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.spacing_h > sub.rect.width() || cfg.spacing_h > sub.rect.height()) {
    throw std::invalid_argument("sample_trainset: spacing_h exceeds a side of the subdomain");
  }
  std::mt19937_64 rng(seed);
  TrainSet ts;
  ts.seed = seed;
  ts.interior = draw_interior(sub.rect, interior_count(sub.rect, cfg.spacing_h), cfg.distribution, rng);
  draw_edges(sub, cfg, rng, ts);
  return ts;
}

TrainSet adaptive_update(const TrainSet& ts, const Subdomain& sub, const BatchIndicator& indicator,
                         const SamplerConfig& cfg) {
  cfg.validate();
  if (cfg.adopt_k > ts.interior.size()) {
    throw std::invalid_argument("adaptive_update: adopt_k exceeds the interior set size");
  }
  TrainSet out;
  out.seed = derive_seed(ts.seed, 0x5a4d);
  std::mt19937_64 rng(out.seed);
  out.interior = ts.interior;

  if (cfg.adopt_k > 0) {
    const auto pool = draw_interior(sub.rect, cfg.pool_size, cfg.distribution, rng);
    const auto pool_scores = indicator(pool);
    const auto cur_scores = indicator(ts.interior);
    if (pool_scores.size() != pool.size() || cur_scores.size() != ts.interior.size()) {
      throw std::invalid_argument("adaptive_update: indicator returned the wrong number of scores");
    }
    std::vector<std::size_t> pool_idx(pool.size());
    std::iota(pool_idx.begin(), pool_idx.end(), 0);
    // Highest candidate scores first; ties keep index order.
    std::stable_sort(pool_idx.begin(), pool_idx.end(),
                     [&](std::size_t a, std::size_t b) { return pool_scores[a] > pool_scores[b]; });
    std::vector<std::size_t> cur_idx(ts.interior.size());
    std::iota(cur_idx.begin(), cur_idx.end(), 0);
    std::stable_sort(cur_idx.begin(), cur_idx.end(),
                     [&](std::size_t a, std::size_t b) { return cur_scores[a] < cur_scores[b]; });
    for (std::size_t k = 0; k < cfg.adopt_k; ++k) {
      out.interior[cur_idx[k]] = pool[pool_idx[k]];
    }
  } else {
    // keep the RNG stream aligned regardless of adopt_k
    (void)draw_interior(sub.rect, cfg.pool_size, cfg.distribution, rng);
  }
  draw_edges(sub, cfg, rng, out);
  return out;
}

}  // namespace ddvi
