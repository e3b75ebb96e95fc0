#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "ddvi/lcp.hpp"
#include "ddvi/metrics.hpp"

namespace ddvi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

/// PSOR solution for the configured problem, computed once per process for
/// each (problem, grid, PSOR options) combination. Throws PsorNotConverged.
const GridField& reference_solution(const RunConfig& cfg);

/// Interior nodes of the reference grid in LcpSystem order.
std::vector<Point> reference_points(const GridField& ref);

struct SolveSummary {
  DdmResult result;
  std::vector<Point> points;  // reference interior nodes
  std::vector<double> values;
  ErrorReport report;
};

/// Everything cmd_solve computes, without touching the file system.
SolveSummary run_solve(const RunConfig& cfg, std::ostream* log = nullptr);

/// solution.csv, history.csv, report.csv, config_resolved.
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// reference.csv and diagnostics.csv.
int cmd_oracle(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

struct BenchCell {
  std::string delta_spec;
  double delta = 0.0;
  double h = 0.0;
  std::vector<std::size_t> iterations;  // one per seed
  std::vector<double> wall_ms;
  bool all_converged = true;

  double mean_iterations() const;
  double mean_wall_ms() const;
};

/// Resolves "h" and "2h" against the column's h.
double resolve_delta(const std::string& spec, double h);

std::vector<BenchCell> run_bench(const RunConfig& cfg, std::ostream& log);

/// bench.csv (mean outer iterations), bench_time.csv (mean wall seconds),
/// bench_runs.csv (one row per run). Non-converged cells read DNF.
int cmd_bench(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// bo_trials.csv and best_weights (a [weights] fragment for --config). A
/// non-null objective replaces the training-based one.
int cmd_tune(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
             const WeightObjective* objective = nullptr);

}  // namespace ddvi::cli
