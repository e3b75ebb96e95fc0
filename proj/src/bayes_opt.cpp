#include "ddvi/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ddvi/sampling.hpp"

namespace ddvi {

bool BoBounds::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

void BoState::observe(std::vector<double> x, double objective) {
  if (!bounds.contains(x)) throw std::invalid_argument("BoState::observe: point outside bounds");
  if (!std::isfinite(objective)) throw std::invalid_argument("BoState::observe: non-finite objective");
  observations.push_back({std::move(x), objective});
}

std::size_t BoState::best_index() const {
  if (observations.empty()) throw std::logic_error("BoState::best_index: no observations");
  std::size_t best = 0;
  for (std::size_t i = 1; i < observations.size(); ++i) {
    if (observations[i].objective < observations[best].objective) best = i;
  }
  return best;
}

GpSurrogate::GpSurrogate(const BoState& state) : length_scale_(state.length_scale) {
  const auto& obs = state.observations;
  if (obs.empty()) throw std::invalid_argument("GpSurrogate: need at least one observation");
  if (!(state.length_scale > 0.0)) throw std::invalid_argument("GpSurrogate: length scale must be > 0");
  const auto n = static_cast<Eigen::Index>(obs.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xs_.push_back(obs[static_cast<std::size_t>(i)].x);
    y(i) = obs[static_cast<std::size_t>(i)].objective;
  }
  prior_mean_ = y.mean();
  best_ = y.minCoeff();
  const double var = (y.array() - prior_mean_).square().mean();
  // A flat history carries no scale information; fall back to unit variance.
  signal_var_ = var > 1e-12 ? var : 1.0;

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = kernel(xs_[static_cast<std::size_t>(i)], xs_[static_cast<std::size_t>(j)]);

  double jitter = state.jitter;
  for (int attempt = 0; attempt < 6; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter * signal_var_;
    llt_.compute(kj);
    if (llt_.info() == Eigen::Success) {
      alpha_ = llt_.solve((y.array() - prior_mean_).matrix());
      return;
    }
  }
  throw SingularKernel();
}

double GpSurrogate::kernel(std::span<const double> a, std::span<const double> b) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return signal_var_ * std::exp(-0.5 * d2 / (length_scale_ * length_scale_));
}

GpPrediction GpSurrogate::predict(std::span<const double> q) const {
  const auto n = static_cast<Eigen::Index>(xs_.size());
  Eigen::VectorXd kq(n);
  for (Eigen::Index i = 0; i < n; ++i) kq(i) = kernel(q, xs_[static_cast<std::size_t>(i)]);
  GpPrediction p;
  p.mean = prior_mean_ + kq.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(kq);
  p.variance = std::max(signal_var_ - v.squaredNorm(), 0.0);
  return p;
}

GpPrediction gp_posterior(const BoState& state, std::span<const double> q) {
  return GpSurrogate(state).predict(q);
}

double expected_improvement(const GpPrediction& p, double best) {
  const double sd = std::sqrt(p.variance);
  const double gain = best - p.mean;
  if (sd < 1e-300) return std::max(gain, 0.0);
  const double z = gain / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gain * cdf + sd * pdf;
}

std::vector<double> propose(const BoState& state) {
  // Losses span orders of magnitude (and diverged trials record a large
  // sentinel), so a positive history is modelled in log space; the argmin is
  // unchanged by the monotone transform.
  BoState modelled = state;
  const bool positive = std::all_of(state.observations.begin(), state.observations.end(),
                                    [](const BoObservation& o) { return o.objective > 0.0; });
  if (positive) {
    for (auto& o : modelled.observations) o.objective = std::log(o.objective);
  }
  const GpSurrogate gp(modelled);
  const auto& bd = state.bounds;
  const std::size_t dim = bd.dim();
  const double best = gp.best_observed();
  const auto score = [&](const std::vector<double>& x) {
    return expected_improvement(gp.predict(x), best);
  };

  std::mt19937_64 rng(derive_seed(state.seed, state.observations.size()));
  std::vector<std::vector<double>> starts(std::max<std::size_t>(state.candidates, 1));
  std::vector<double> scores(starts.size());
  for (std::size_t c = 0; c < starts.size(); ++c) {
    starts[c].resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      starts[c][i] = std::uniform_real_distribution<double>(bd.lower[i], bd.upper[i])(rng);
    }
    scores[c] = score(starts[c]);
  }
  std::vector<std::size_t> order(starts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<double> best_x = starts[order[0]];
  double best_s = scores[order[0]];
  const std::size_t refine = std::min<std::size_t>(5, order.size());
  for (std::size_t r = 0; r < refine; ++r) {
    std::vector<double> x = starts[order[r]];
    double s = scores[order[r]];
    for (std::size_t i = 0; i < dim; ++i) {
      double step = (bd.upper[i] - bd.lower[i]) / 8.0;
      const double min_step = (bd.upper[i] - bd.lower[i]) * 1e-4;
      while (step > min_step) {
        bool moved = false;
        for (double dir : {1.0, -1.0}) {
          auto y = x;
          y[i] = std::clamp(x[i] + dir * step, bd.lower[i], bd.upper[i]);
          const double sy = score(y);
          if (sy > s) {
            x = std::move(y);
            s = sy;
            moved = true;
            break;
          }
        }
        if (!moved) step *= 0.5;
      }
    }
    if (s > best_s) {
      best_s = s;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace ddvi
