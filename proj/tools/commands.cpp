#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ddvi/csv.hpp"

namespace ddvi::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void write_config_resolved(const RunConfig& cfg, const fs::path& out_dir) {
  auto os = open_out(out_dir / "config_resolved");
  write_config(os, cfg);
}

void write_field_csv(const fs::path& path, std::span<const Point> pts, std::span<const double> u) {
  auto os = open_out(path);
  os << "x,y,u\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    os << csv::real(pts[i].x) << ',' << csv::real(pts[i].y) << ',' << csv::real(u[i]) << '\n';
  }
}

std::string reference_tag(const RunConfig& cfg) { return "psor-" + std::to_string(cfg.grid_n); }

}  // namespace

const GridField& reference_solution(const RunConfig& cfg) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<GridField>> cache;
  std::ostringstream key;
  key << cfg.source << '|' << csv::real(cfg.alpha) << '|' << cfg.grid_n << '|' << csv::real(cfg.omega)
      << '|' << csv::real(cfg.psor_tol) << '|' << cfg.psor_max_sweeps;
  const std::lock_guard lock(mu);
  auto& slot = cache[key.str()];
  if (!slot) {
    const auto sys = assemble_lcp(cfg.problem(), cfg.grid_n);
    slot = std::make_unique<GridField>(psor_solve(sys, cfg.psor()));
  }
  return *slot;
}

std::vector<Point> reference_points(const GridField& ref) {
  std::vector<Point> pts;
  pts.reserve((ref.nodes - 2) * (ref.nodes - 2));
  for (std::size_t j = 1; j + 1 < ref.nodes; ++j)
    for (std::size_t i = 1; i + 1 < ref.nodes; ++i) pts.push_back({ref.x(i), ref.y(j)});
  return pts;
}

SolveSummary run_solve(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  const auto prob = cfg.problem();
  const auto decomp = cfg.decomposition(prob);
  auto ddm = cfg.ddm();
  if (cfg.bo_enabled) {
    auto state = cfg.bo_state();
    ddm.weights = tune_weights(prob, decomp, ddm, state, cfg.tune_options());
    if (log) {
      *log << "tuned weights: " << ddm.weights.w1 << ' ' << ddm.weights.w2 << ' '
           << ddm.weights.w3 << ' ' << ddm.weights.w4 << '\n';
    }
  }
  SolveSummary s{outer_solve(prob, decomp, ddm, cfg.seed), {}, {}, {}};
  const auto& ref = reference_solution(cfg);
  s.points = reference_points(ref);
  s.values = evaluate_global_batch(s.result.nets, decomp, s.points);
  s.report = compute_metrics(ref.interior(), s.values, reference_tag(cfg));
  return s;
}

int cmd_solve(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  write_config_resolved(cfg, out_dir);
  const auto s = run_solve(cfg, &log);
  {
    auto os = open_out(out_dir / "history.csv");
    s.result.history.write_csv(os, !cfg.serial);
  }
  write_field_csv(out_dir / "solution.csv", s.points, s.values);
  {
    auto os = open_out(out_dir / "report.csv");
    write_report_csv(os, s.report);
  }
  const auto& res = s.result;
  const auto& report = s.report;
  log << "outer iterations: " << res.outer_iterations << ", stop: " << to_string(res.stop)
      << (res.converged ? " (converged)" : " (not converged)") << '\n'
      << "mse " << report.mse << ", mae " << report.mae << ", rel_l2 "
      << (report.rel_l2 ? std::to_string(*report.rel_l2) : std::string("undefined")) << ", max_err "
      << report.max_err << " vs " << report.reference_tag << '\n';
  return res.converged ? kExitOk : kExitNotConverged;
}

int cmd_oracle(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  write_config_resolved(cfg, out_dir);
  const auto sys = assemble_lcp(cfg.problem(), cfg.grid_n);
  std::size_t sweeps = 0;
  GridField field;
  try {
    field = psor_solve(sys, cfg.psor(), &sweeps);
  } catch (const PsorNotConverged& e) {
    log << "PSOR did not converge: " << e.what() << '\n';
    return kExitNotConverged;
  }
  const auto u = field.interior();
  write_field_csv(out_dir / "reference.csv", reference_points(field), u);
  const auto d = complementarity_diagnostics(sys, u);
  {
    auto os = open_out(out_dir / "diagnostics.csv");
    os << "grid_n,sweeps,obstacle_violation,residual_negativity,complementarity,discrete_energy\n"
       << cfg.grid_n << ',' << sweeps << ',' << csv::real(d.obstacle_violation) << ','
       << csv::real(d.residual_negativity) << ',' << csv::real(d.complementarity) << ','
       << csv::real(discrete_energy(sys, u)) << '\n';
  }
  log << "sweeps " << sweeps << ", obstacle violation " << d.obstacle_violation
      << ", residual negativity " << d.residual_negativity << ", complementarity "
      << d.complementarity << '\n';
  return kExitOk;
}

double BenchCell::mean_iterations() const {
  if (iterations.empty()) return 0.0;
  return static_cast<double>(std::accumulate(iterations.begin(), iterations.end(), std::size_t{0})) /
         static_cast<double>(iterations.size());
}

double BenchCell::mean_wall_ms() const {
  if (wall_ms.empty()) return 0.0;
  return std::accumulate(wall_ms.begin(), wall_ms.end(), 0.0) / static_cast<double>(wall_ms.size());
}

double resolve_delta(const std::string& spec, double h) {
  if (spec == "h") return h;
  if (spec == "2h") return 2.0 * h;
  RunConfig scratch;
  set_value(scratch, "decomposition.delta", spec);
  return scratch.delta;
}

std::vector<BenchCell> run_bench(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto deltas = split_list(cfg.bench_deltas);
  const auto hs_text = split_list(cfg.bench_hs);
  if (deltas.empty()) throw ConfigError("bench.deltas", "empty list");
  if (hs_text.empty()) throw ConfigError("bench.hs", "empty list");
  std::vector<double> hs;
  for (const auto& t : hs_text) {
    RunConfig scratch;
    set_value(scratch, "sampling.h", t);
    hs.push_back(scratch.h);
  }

  const auto prob = cfg.problem();
  std::vector<BenchCell> cells;
  for (const auto& spec : deltas) {
    for (double h : hs) {
      BenchCell cell{spec, resolve_delta(spec, h), h, {}, {}, true};
      RunConfig c = cfg;
      c.delta = cell.delta;
      c.h = h;
      c.validate();
      const auto decomp = c.decomposition(prob);
      const auto ddm = c.ddm();
      for (std::size_t k = 0; k < cfg.bench_seeds; ++k) {
        const auto res = outer_solve(prob, decomp, ddm, cfg.seed + k);
        cell.iterations.push_back(res.outer_iterations);
        cell.wall_ms.push_back(res.wall_ms);
        cell.all_converged = cell.all_converged && res.converged;
        log << "delta " << spec << " (" << cell.delta << "), h " << h << ", seed " << cfg.seed + k
            << ": " << res.outer_iterations << " outer iterations, " << to_string(res.stop) << ", "
            << res.wall_ms / 1000.0 << " s\n";
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

int cmd_bench(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  write_config_resolved(cfg, out_dir);
  const auto cells = run_bench(cfg, log);
  const auto hs = split_list(cfg.bench_hs);

  const auto table = [&](const fs::path& path, auto&& value) {
    auto os = open_out(path);
    os << "delta";
    for (const auto& h : hs) os << ",h=" << h;
    os << '\n';
    for (std::size_t r = 0; r < cells.size(); r += hs.size()) {
      os << csv::field(cells[r].delta_spec);
      for (std::size_t c = 0; c < hs.size(); ++c) {
        const auto& cell = cells[r + c];
        os << ',' << (cell.all_converged ? csv::real(value(cell)) : std::string("DNF"));
      }
      os << '\n';
    }
  };
  table(out_dir / "bench.csv", [](const BenchCell& c) { return c.mean_iterations(); });
  table(out_dir / "bench_time.csv", [](const BenchCell& c) { return c.mean_wall_ms() / 1000.0; });

  auto os = open_out(out_dir / "bench_runs.csv");
  os << "delta_spec,delta,h,seed,outer_iterations,wall_ms\n";
  for (const auto& cell : cells) {
    for (std::size_t k = 0; k < cell.iterations.size(); ++k) {
      os << csv::field(cell.delta_spec) << ',' << csv::real(cell.delta) << ',' << csv::real(cell.h)
         << ',' << cfg.seed + k << ',' << cell.iterations[k] << ',' << csv::real(cell.wall_ms[k])
         << '\n';
    }
  }
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log,
             const WeightObjective* objective) {
  cfg.validate();
  fs::create_directories(out_dir);
  write_config_resolved(cfg, out_dir);
  auto state = cfg.bo_state();
  LossWeights best;
  if (objective) {
    best = tune_weights(state, *objective);
  } else {
    const auto prob = cfg.problem();
    const auto decomp = cfg.decomposition(prob);
    best = tune_weights(prob, decomp, cfg.ddm(), state, cfg.tune_options());
  }
  {
    auto os = open_out(out_dir / "bo_trials.csv");
    write_trials_csv(os, state);
  }
  {
    auto os = open_out(out_dir / "best_weights");
    os << "[weights]\nw1 = " << csv::real(best.w1) << "\nw2 = " << csv::real(best.w2)
       << "\nw3 = " << csv::real(best.w3) << "\nw4 = " << csv::real(best.w4) << '\n';
  }
  const auto& b = state.observations[state.best_index()];
  log << state.observations.size() << " trials, best objective " << b.objective << " at trial "
      << state.best_index() + 1 << ": w = " << best.w1 << ' ' << best.w2 << ' ' << best.w3 << ' '
      << best.w4 << '\n';
  return kExitOk;
}

}  // namespace ddvi::cli
