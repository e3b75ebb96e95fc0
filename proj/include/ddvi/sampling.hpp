#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ddvi/problem.hpp"

namespace ddvi {

/// splitmix64 finalizer; used to derive independent RNG streams.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class PointDistribution { uniform, normal_clipped };

const char* to_string(PointDistribution d);
PointDistribution distribution_from_string(const std::string& s);

struct SamplerConfig {
  double spacing_h = 0.02;
  PointDistribution distribution = PointDistribution::uniform;
  std::size_t pool_size = 512;
  std::size_t adopt_k = 64;

  void validate() const;
};

struct TrainSet {
  std::vector<Point> interior;
  std::vector<Point> boundary;
  /// One list per interface segment of the subdomain, in the same order.
  std::vector<std::vector<Point>> interface;
  std::uint64_t seed = 0;

  std::size_t interface_count() const;
  /// All interface points, segment by segment.
  std::vector<Point> interface_flat() const;
};

/// ceil(area / h^2) interior points, ceil(length / h) points per physical edge
/// and per interface segment.
std::size_t interior_count(const Rect& r, double h);
std::size_t edge_count(const Segment& s, double h);

TrainSet sample_trainset(const Subdomain& sub, const SamplerConfig& cfg, std::uint64_t seed);

/// Scores a batch of points; larger means worse.
using BatchIndicator = std::function<std::vector<double>(std::span<const Point>)>;

/// Replaces the adopt_k lowest-scoring interior points with the adopt_k
/// highest-scoring candidates from a fresh pool; boundary and interface sets
/// are redrawn from a derived seed. Sizes are preserved.
TrainSet adaptive_update(const TrainSet& ts, const Subdomain& sub, const BatchIndicator& indicator,
                         const SamplerConfig& cfg);

}  // namespace ddvi
