#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ddvi {

struct BoObservation {
  std::vector<double> x;  // log10 weights
  double objective = 0.0;
};

struct BoBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
};

/// Gaussian-process surrogate state: squared-exponential kernel with fixed
/// length scale; the signal variance is taken from the observed objectives.
struct BoState {
  BoBounds bounds{std::vector<double>(4, 0.0), std::vector<double>(4, 6.0)};
  std::vector<BoObservation> observations;
  double length_scale = 1.0;
  double jitter = 1e-6;
  std::size_t trials_budget = 30;
  std::size_t candidates = 1024;
  std::uint64_t seed = 0;

  void observe(std::vector<double> x, double objective);
  /// Index of the lowest objective; earliest wins ties.
  std::size_t best_index() const;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

class SingularKernel : public std::runtime_error {
 public:
  SingularKernel() : std::runtime_error("GP kernel matrix is singular even with jitter") {}
};

/// Exact GP regression fitted once to a BoState's observations.
class GpSurrogate {
 public:
  explicit GpSurrogate(const BoState& state);

  GpPrediction predict(std::span<const double> q) const;
  double signal_variance() const { return signal_var_; }
  double prior_mean() const { return prior_mean_; }
  double best_observed() const { return best_; }

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const;

  std::vector<std::vector<double>> xs_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double length_scale_;
  double signal_var_ = 1.0;
  double prior_mean_ = 0.0;
  double best_ = 0.0;
};

GpPrediction gp_posterior(const BoState& state, std::span<const double> q);

/// EI for minimisation.
double expected_improvement(const GpPrediction& p, double best);

/// Maximiser of expected improvement inside the bounds: random multi-start
/// search followed by coordinate descent from the best starts.
std::vector<double> propose(const BoState& state);

}  // namespace ddvi
