#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ddvi/loss.hpp"
#include "ddvi/net.hpp"
#include "ddvi/problem.hpp"
#include "ddvi/sampling.hpp"

namespace ddvi {

struct DdmConfig {
  NetArchitecture arch;
  SamplerConfig sampler;
  LossWeights weights;
  LossOptions loss;

  double lr = 1e-3;
  /// Multiplier applied to the learning rate after every outer iteration.
  double lr_decay = 0.9;
  double lr_min = 1e-7;

  double tol_loss = 1e-4;
  double tol_interface = 1e-4;
  double tol_interior = 1e-4;
  std::size_t stagnation_window = 50;
  std::size_t max_outer = 200;
  std::size_t inner_epoch_cap = 1000;
  std::size_t minibatch_size = 128;
  /// Off by default: replacing low-residual points biases the Monte Carlo
  /// Ritz estimate, which assumes uniform samples.
  bool adaptive_refresh = false;
  /// Train subdomains one after another instead of one thread each.
  bool serial = false;

  void validate() const;
  double lr_at(std::size_t outer_iter) const;
};

/// Dirichlet targets for one subdomain, one vector per interface segment,
/// aligned with TrainSet::interface.
using InterfaceTargets = std::vector<std::vector<double>>;
/// Indexed by subdomain id.
using InterfaceData = std::vector<InterfaceTargets>;

struct InnerStats {
  std::size_t epochs = 0;
  bool stagnated = false;
  LossBreakdown initial;
  LossBreakdown final;
};

/// Minibatch Adam epochs on the weighted loss with W held fixed. Stops once
/// the full-set loss has changed by less than tol_loss (relative) over the
/// last stagnation_window epochs, or at inner_epoch_cap.
InnerStats train_subdomain(NetworkParams& params, AdamState& adam, const TrainSet& ts,
                           const InterfaceTargets& targets, const Subdomain& sub,
                           const DdmConfig& cfg, const ViProblem& prob, std::mt19937_64& rng);

/// W_s = neighbor r's network evaluated on subdomain s's interface points.
InterfaceData exchange_interface(std::span<const NetworkParams> nets, const Decomposition& decomp,
                                 std::span<const TrainSet> trainsets);

struct HistoryRow {
  std::size_t outer_iter = 0;
  std::size_t subdomain = 0;
  std::size_t inner_epochs = 0;
  LossBreakdown loss;
  double interface_rel_change = 0.0;
  double interior_rel_change = 0.0;
  double wall_ms = 0.0;
};

struct DdmHistory {
  std::vector<HistoryRow> rows;

  /// wall_ms is written as 0 when include_timing is false.
  void write_csv(std::ostream& os, bool include_timing = true) const;
};

enum class StopReason { none, interface, interior, max_outer };
const char* to_string(StopReason r);

struct DdmResult {
  std::vector<NetworkParams> nets;
  std::vector<TrainSet> trainsets;
  DdmHistory history;
  bool converged = false;
  StopReason stop = StopReason::none;
  std::size_t outer_iterations = 0;
  double wall_ms = 0.0;
};

/// ||a - b|| / ||a||, or the absolute change when ||a|| < 1e-12.
double relative_change(std::span<const double> current, std::span<const double> previous);

/// Additive overlapping Schwarz iteration. With warm_start, the given nets
/// replace the random initialisation and W^0 is their exchanged trace;
/// otherwise W^0 = 0.
DdmResult outer_solve(const ViProblem& prob, const Decomposition& decomp, const DdmConfig& cfg,
                      std::uint64_t seed,
                      const std::vector<NetworkParams>* warm_start = nullptr);

/// Global solution: the owning net outside overlaps, a distance-weighted
/// blend inside them (each weight vanishes on its own interface line).
double evaluate_global(std::span<const NetworkParams> nets, const Decomposition& decomp, Point x);

std::vector<double> evaluate_global_batch(std::span<const NetworkParams> nets,
                                          const Decomposition& decomp, std::span<const Point> pts);

}  // namespace ddvi
