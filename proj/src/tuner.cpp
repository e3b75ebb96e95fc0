#include "ddvi/tuner.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ddvi/csv.hpp"

namespace ddvi {

std::vector<double> log10_weights(const LossWeights& w) {
  return {std::log10(w.w1), std::log10(w.w2), std::log10(w.w3), std::log10(w.w4)};
}

LossWeights weights_from_log10(std::span<const double> x) {
  if (x.size() != 4) throw std::invalid_argument("weights_from_log10: need 4 coordinates");
  return {std::pow(10.0, x[0]), std::pow(10.0, x[1]), std::pow(10.0, x[2]), std::pow(10.0, x[3])};
}

LossWeights tune_weights(BoState& state, const WeightObjective& objective) {
  if (state.trials_budget < 1) throw std::invalid_argument("tune_weights: trials_budget must be >= 1");
  if (state.bounds.dim() != 4) throw std::invalid_argument("tune_weights: bounds must be 4-dimensional");
  while (state.observations.size() < state.trials_budget) {
    std::vector<double> x;
    if (state.observations.empty()) {
      x.assign(4, 4.0);
    } else {
      x = propose(state);
    }
    double value = kDivergedObjective;
    try {
      value = objective(weights_from_log10(x));
    } catch (const NonFiniteLoss&) {
    }
    if (!std::isfinite(value)) value = kDivergedObjective;
    state.observe(std::move(x), value);
  }
  return weights_from_log10(state.observations[state.best_index()].x);
}

double validation_objective(std::span<const NetworkParams> nets, const Decomposition& decomp,
                            const ViProblem& prob, const DdmConfig& cfg, double spacing,
                            std::uint64_t seed) {
  SamplerConfig sc = cfg.sampler;
  sc.spacing_h = spacing;
  sc.distribution = PointDistribution::uniform;
  double total = 0.0;
  for (const auto& sub : decomp.subdomains) {
    const auto ts = sample_trainset(sub, sc, derive_seed(seed, 7000 + sub.id));
    const auto& net = nets[sub.id];
    double res = 0.0;
    for (double r : complementarity_indicator(net, ts.interior, prob, cfg.loss.h_fd)) res += r * r;
    total += res / static_cast<double>(ts.interior.size());
    total += boundary_loss(net, ts.boundary, prob).value;
    for (std::size_t k = 0; k < sub.interfaces.size(); ++k) {
      const auto& pts = ts.interface[k];
      const auto other = evaluate_batch(nets[sub.interfaces[k].neighbor], pts, false).u;
      total += interface_loss(net, pts, {other.data(), static_cast<std::size_t>(other.size())});
    }
    total += positivity_penalty(net, ts.interior, PenaltyForm::hinge);
  }
  return total;
}

LossWeights tune_weights(const ViProblem& prob, const Decomposition& decomp,
                         const DdmConfig& train_cfg, BoState& state, const TuneOptions& opt) {
  DdmConfig cfg = train_cfg;
  cfg.max_outer = opt.outer_iterations;
  cfg.inner_epoch_cap = opt.inner_epochs;
  const WeightObjective objective = [&](const LossWeights& w) {
    cfg.weights = w;
    const auto res = outer_solve(prob, decomp, cfg, opt.seed);
    return validation_objective(res.nets, decomp, prob, cfg, opt.validation_spacing,
                                derive_seed(opt.seed, 0xb0));
  };
  return tune_weights(state, objective);
}

void write_trials_csv(std::ostream& os, const BoState& state) {
  os << "trial,w1,w2,w3,w4,objective\n";
  for (std::size_t i = 0; i < state.observations.size(); ++i) {
    const auto w = weights_from_log10(state.observations[i].x);
    os << (i + 1) << ',' << csv::real(w.w1) << ',' << csv::real(w.w2) << ',' << csv::real(w.w3)
       << ',' << csv::real(w.w4) << ',' << csv::real(state.observations[i].objective) << '\n';
  }
}

}  // namespace ddvi
