#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ddvi/bayes_opt.hpp"
#include "ddvi/ddm.hpp"

namespace ddvi {

/// Objective value recorded when a trial's training produces a non-finite loss.
inline constexpr double kDivergedObjective = 1e6;

std::vector<double> log10_weights(const LossWeights& w);
LossWeights weights_from_log10(std::span<const double> x);

/// Scores one weight setting; smaller is better.
using WeightObjective = std::function<double(const LossWeights&)>;

/// Bayesian optimisation over log10 weights. The first trial is 10^4 for
/// every weight; later trials maximise expected improvement. Returns the
/// best observed weights (earliest trial on ties).
LossWeights tune_weights(BoState& state, const WeightObjective& objective);

struct TuneOptions {
  std::size_t outer_iterations = 1;
  std::size_t inner_epochs = 200;
  /// Validation points per subdomain side length unit: spacing for the
  /// held-out set.
  double validation_spacing = 0.05;
  std::uint64_t seed = 0;
};

/// Weight-independent held-out score of a trained decomposition: for every
/// subdomain, mean squared complementarity indicator + boundary misfit +
/// interface mismatch against the neighbour + positivity penalty, summed.
double validation_objective(std::span<const NetworkParams> nets, const Decomposition& decomp,
                            const ViProblem& prob, const DdmConfig& cfg, double spacing,
                            std::uint64_t seed);

/// Runs a short fixed-seed outer_solve per trial and scores it with
/// validation_objective.
LossWeights tune_weights(const ViProblem& prob, const Decomposition& decomp,
                         const DdmConfig& train_cfg, BoState& state, const TuneOptions& opt);

/// trial, w1, w2, w3, w4, objective (weights in linear scale).
void write_trials_csv(std::ostream& os, const BoState& state);

}  // namespace ddvi
