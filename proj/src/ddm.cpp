#include "ddvi/ddm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ddvi/csv.hpp"

namespace ddvi {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::vector<double> flatten(const InterfaceTargets& t) {
  std::vector<double> out;
  for (const auto& s : t) out.insert(out.end(), s.begin(), s.end());
  return out;
}

// Per-subdomain mutable state; owned exclusively by one worker during training.
struct SubdomainRun {
  NetworkParams params;
  AdamState adam;
  TrainSet trainset;
  std::mt19937_64 rng;
  std::vector<Point> monitor_interior;
  TrainSet monitor_edges;  // initial interface points, fixed for the stopping tests
  InnerStats stats;
  double wall_ms = 0.0;
};

template <class Fn>
void for_each_subdomain(std::size_t n, bool serial, Fn&& fn) {
  if (serial || n <= 1) {
    for (std::size_t s = 0; s < n; ++s) fn(s);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  workers.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    workers.emplace_back([&, s] {
      try {
        fn(s);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void DdmConfig::validate() const {
  arch.validate();
  sampler.validate();
  weights.validate();
  if (!(tol_loss > 0.0 && tol_interface > 0.0 && tol_interior > 0.0)) {
    throw std::invalid_argument("DdmConfig: tolerances must be positive");
  }
  if (stagnation_window < 1 || minibatch_size < 1) {
    throw std::invalid_argument("DdmConfig: stagnation_window and minibatch_size must be >= 1");
  }
  if (!(lr > 0.0) || !(lr_decay > 0.0 && lr_decay <= 1.0) || !(lr_min >= 0.0)) {
    throw std::invalid_argument("DdmConfig: invalid learning-rate schedule");
  }
  if (!(loss.h_fd > 0.0)) throw std::invalid_argument("DdmConfig: h_fd must be positive");
}

double DdmConfig::lr_at(std::size_t outer_iter) const {
  const double k = outer_iter == 0 ? 0.0 : static_cast<double>(outer_iter - 1);
  return std::max(lr * std::pow(lr_decay, k), std::min(lr, lr_min));
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::interface: return "interface";
    case StopReason::interior: return "interior";
    case StopReason::max_outer: return "max_outer";
    case StopReason::none: break;
  }
  return "none";
}

double relative_change(std::span<const double> current, std::span<const double> previous) {
  if (current.size() != previous.size()) {
    throw std::invalid_argument("relative_change: length mismatch");
  }
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    diff += (current[i] - previous[i]) * (current[i] - previous[i]);
    norm += current[i] * current[i];
  }
  diff = std::sqrt(diff);
  norm = std::sqrt(norm);
  return norm < 1e-12 ? diff : diff / norm;
}

InnerStats train_subdomain(NetworkParams& params, AdamState& adam, const TrainSet& ts,
                           const InterfaceTargets& targets, const Subdomain& sub,
                           const DdmConfig& cfg, const ViProblem& prob, std::mt19937_64& rng) {
  if (targets.size() != ts.interface.size()) {
    throw std::invalid_argument("train_subdomain: interface target segments do not match trainset");
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k].size() != ts.interface[k].size()) {
      throw std::invalid_argument("train_subdomain: interface target count mismatch");
    }
  }
  const auto itf_pts = ts.interface_flat();
  const auto itf_w = flatten(targets);
  const LossData full{ts.interior, ts.boundary, itf_pts, itf_w, sub.rect.area()};

  InnerStats st;
  st.initial = evaluate_loss(params, full, prob, cfg.weights, cfg.loss);
  st.final = st.initial;
  if (cfg.inner_epoch_cap == 0) return st;

  const std::size_t nf = ts.interior.size();
  const std::size_t ng = ts.boundary.size();
  const std::size_t ni = itf_pts.size();
  const std::size_t batches = std::max<std::size_t>(1, (nf + cfg.minibatch_size - 1) / cfg.minibatch_size);

  std::vector<std::size_t> pf(nf), pg(ng), pi(ni);
  std::iota(pf.begin(), pf.end(), 0);
  std::iota(pg.begin(), pg.end(), 0);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<Point> sf(nf), sg(ng), si(ni);
  std::vector<double> sw(ni);

  std::vector<double> history{st.initial.total};
  history.reserve(cfg.inner_epoch_cap + 1);

  for (std::size_t epoch = 1; epoch <= cfg.inner_epoch_cap; ++epoch) {
    std::shuffle(pf.begin(), pf.end(), rng);
    std::shuffle(pg.begin(), pg.end(), rng);
    std::shuffle(pi.begin(), pi.end(), rng);
    for (std::size_t i = 0; i < nf; ++i) sf[i] = ts.interior[pf[i]];
    for (std::size_t i = 0; i < ng; ++i) sg[i] = ts.boundary[pg[i]];
    for (std::size_t i = 0; i < ni; ++i) {
      si[i] = itf_pts[pi[i]];
      sw[i] = itf_w[pi[i]];
    }
    const auto slice = [batches](std::size_t n, std::size_t k) {
      return std::pair{n * k / batches, n * (k + 1) / batches};
    };
    for (std::size_t k = 0; k < batches; ++k) {
      const auto [f0, f1] = slice(nf, k);
      const auto [g0, g1] = slice(ng, k);
      const auto [i0, i1] = slice(ni, k);
      const LossData batch{std::span<const Point>(sf).subspan(f0, f1 - f0),
                           std::span<const Point>(sg).subspan(g0, g1 - g0),
                           std::span<const Point>(si).subspan(i0, i1 - i0),
                           std::span<const double>(sw).subspan(i0, i1 - i0), sub.rect.area()};
      const auto lg = loss_gradient(params, batch, prob, cfg.weights, cfg.loss);
      adam_step(adam, params, lg.gradient);
    }

    st.final = evaluate_loss(params, full, prob, cfg.weights, cfg.loss);
    st.epochs = epoch;
    history.push_back(st.final.total);
    if (epoch >= cfg.stagnation_window) {
      const double now = history[epoch];
      const double then = history[epoch - cfg.stagnation_window];
      const double denom = std::abs(now);
      const double change = denom > 0.0 ? std::abs(now - then) / denom
                                        : (now == then ? 0.0 : std::numeric_limits<double>::infinity());
      if (change < cfg.tol_loss) {
        st.stagnated = true;
        break;
      }
    }
  }
  return st;
}

InterfaceData exchange_interface(std::span<const NetworkParams> nets, const Decomposition& decomp,
                                 std::span<const TrainSet> trainsets) {
  if (nets.size() != decomp.subdomains.size() || trainsets.size() != decomp.subdomains.size()) {
    throw std::invalid_argument("exchange_interface: one net and one trainset per subdomain required");
  }
  InterfaceData data(decomp.subdomains.size());
  for (const auto& sub : decomp.subdomains) {
    const auto& ts = trainsets[sub.id];
    if (ts.interface.size() != sub.interfaces.size()) {
      throw std::invalid_argument("exchange_interface: trainset does not match subdomain interfaces");
    }
    auto& out = data[sub.id];
    out.resize(sub.interfaces.size());
    for (std::size_t k = 0; k < sub.interfaces.size(); ++k) {
      const auto r = sub.interfaces[k].neighbor;
      const auto& owner = decomp.subdomains.at(r);
      for (const auto& p : ts.interface[k]) {
        if (!owner.rect.contains(p)) {
          throw std::logic_error("exchange_interface: interface point outside the neighbor's rectangle");
        }
      }
      const auto u = evaluate_batch(nets[r], ts.interface[k], false).u;
      out[k].assign(u.data(), u.data() + u.size());
    }
  }
  return data;
}

void DdmHistory::write_csv(std::ostream& os, bool include_timing) const {
  os << "outer_iter,subdomain,inner_epochs,loss_interior,loss_boundary,loss_interface,"
        "loss_penalty,loss_total,interface_rel_change,interior_rel_change,wall_ms\n";
  for (const auto& r : rows) {
    os << r.outer_iter << ',' << r.subdomain << ',' << r.inner_epochs << ','
       << csv::real(r.loss.interior) << ',' << csv::real(r.loss.boundary) << ','
       << csv::real(r.loss.interface) << ',' << csv::real(r.loss.penalty) << ','
       << csv::real(r.loss.total) << ',' << csv::real(r.interface_rel_change) << ','
       << csv::real(r.interior_rel_change) << ',' << csv::real(include_timing ? r.wall_ms : 0.0)
       << '\n';
  }
}

DdmResult outer_solve(const ViProblem& prob, const Decomposition& decomp, const DdmConfig& cfg,
                      std::uint64_t seed, const std::vector<NetworkParams>* warm_start) {
  prob.validate();
  cfg.validate();
  const auto start = Clock::now();
  const std::size_t n = decomp.subdomains.size();
  if (warm_start && warm_start->size() != n) {
    throw std::invalid_argument("outer_solve: warm start must provide one net per subdomain");
  }

  std::vector<SubdomainRun> runs(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& sub = decomp.subdomains[s];
    auto& r = runs[s];
    r.trainset = sample_trainset(sub, cfg.sampler, derive_seed(seed, 1000 + s));
    r.params = warm_start ? (*warm_start)[s] : init_params(cfg.arch, derive_seed(seed, 2000 + s));
    r.params.validate();
    r.adam = AdamState::fresh(r.params.theta.size(), cfg.lr);
    r.rng.seed(derive_seed(seed, 3000 + s));
    r.monitor_interior = r.trainset.interior;
    r.monitor_edges = r.trainset;
  }

  std::vector<NetworkParams> nets(n);
  std::vector<TrainSet> trainsets(n), monitors(n);
  const auto sync_views = [&] {
    for (std::size_t s = 0; s < n; ++s) {
      nets[s] = runs[s].params;
      trainsets[s] = runs[s].trainset;
      monitors[s] = runs[s].monitor_edges;
    }
  };
  sync_views();

  InterfaceData targets(n);
  if (warm_start) {
    targets = exchange_interface(nets, decomp, trainsets);
  } else {
    for (std::size_t s = 0; s < n; ++s) {
      for (const auto& seg : runs[s].trainset.interface) targets[s].emplace_back(seg.size(), 0.0);
    }
  }
  // Stopping-test samples live on the fixed initial point sets so that successive
  // iterates are compared node for node even when the training set is refreshed.
  auto monitor_w = warm_start ? exchange_interface(nets, decomp, monitors) : targets;
  std::vector<std::vector<double>> monitor_u(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto u = evaluate_batch(runs[s].params, runs[s].monitor_interior, false).u;
    monitor_u[s].assign(u.data(), u.data() + u.size());
  }
  const bool has_interfaces = std::any_of(decomp.subdomains.begin(), decomp.subdomains.end(),
                                          [](const Subdomain& s) { return !s.interfaces.empty(); });

  DdmResult result;
  for (std::size_t it = 1; it <= cfg.max_outer; ++it) {
    const double lr = cfg.lr_at(it);
    for_each_subdomain(n, cfg.serial, [&](std::size_t s) {
      auto& r = runs[s];
      const auto t0 = Clock::now();
      r.adam.lr = lr;
      r.stats = train_subdomain(r.params, r.adam, r.trainset, targets[s], decomp.subdomains[s], cfg,
                                prob, r.rng);
      if (cfg.adaptive_refresh) {
        const auto& net = r.params;
        BatchIndicator ind = [&](std::span<const Point> pts) {
          return complementarity_indicator(net, pts, prob, cfg.loss.h_fd);
        };
        r.trainset = adaptive_update(r.trainset, decomp.subdomains[s], ind, cfg.sampler);
      }
      r.wall_ms = elapsed_ms(t0);
    });

    sync_views();
    targets = exchange_interface(nets, decomp, trainsets);
    const auto new_monitor_w = exchange_interface(nets, decomp, monitors);

    bool all_interface = has_interfaces;
    bool all_interior = true;
    for (std::size_t s = 0; s < n; ++s) {
      const auto& r = runs[s];
      const auto u = evaluate_batch(r.params, r.monitor_interior, false).u;
      std::vector<double> cur(u.data(), u.data() + u.size());
      HistoryRow row;
      row.outer_iter = it;
      row.subdomain = s;
      row.inner_epochs = r.stats.epochs;
      row.loss = r.stats.final;
      row.interior_rel_change = relative_change(cur, monitor_u[s]);
      if (!decomp.subdomains[s].interfaces.empty()) {
        const auto w_now = flatten(new_monitor_w[s]);
        const auto w_prev = flatten(monitor_w[s]);
        row.interface_rel_change = relative_change(w_now, w_prev);
        all_interface = all_interface && row.interface_rel_change < cfg.tol_interface;
      }
      all_interior = all_interior && row.interior_rel_change < cfg.tol_interior;
      row.wall_ms = r.wall_ms;
      result.history.rows.push_back(row);
      monitor_u[s] = std::move(cur);
    }
    monitor_w = new_monitor_w;
    result.outer_iterations = it;

    if (all_interface || all_interior) {
      result.converged = true;
      result.stop = all_interface ? StopReason::interface : StopReason::interior;
      break;
    }
  }
  if (!result.converged) result.stop = StopReason::max_outer;

  result.nets = std::move(nets);
  result.trainsets = std::move(trainsets);
  result.wall_ms = elapsed_ms(start);
  return result;
}

std::vector<double> evaluate_global_batch(std::span<const NetworkParams> nets,
                                          const Decomposition& decomp, std::span<const Point> pts) {
  if (nets.size() != decomp.subdomains.size()) {
    throw std::invalid_argument("evaluate_global: one net per subdomain required");
  }
  for (const auto& p : pts) {
    if (!decomp.domain.contains(p)) throw std::out_of_range("evaluate_global: point outside the domain");
  }
  struct Contribution {
    double weight;
    double value;
  };
  std::vector<std::vector<Contribution>> parts(pts.size());
  for (const auto& sub : decomp.subdomains) {
    std::vector<std::size_t> idx;
    std::vector<Point> mine;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (sub.rect.contains(pts[i])) {
        idx.push_back(i);
        mine.push_back(pts[i]);
      }
    }
    if (mine.empty()) continue;
    const auto u = evaluate_batch(nets[sub.id], mine, false).u;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      parts[idx[k]].push_back({sub.distance_to_interface(mine[k]), u(static_cast<Eigen::Index>(k))});
    }
  }
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& c = parts[i];
    if (c.size() == 1) {
      out[i] = c[0].value;
      continue;
    }
    double num = 0.0, den = 0.0, plain = 0.0;
    for (const auto& [w, v] : c) {
      num += w * v;
      den += w;
      plain += v;
    }
    out[i] = den > 0.0 ? num / den : plain / static_cast<double>(c.size());
  }
  return out;
}

double evaluate_global(std::span<const NetworkParams> nets, const Decomposition& decomp, Point x) {
  const Point p[1] = {x};
  return evaluate_global_batch(nets, decomp, p)[0];
}

}  // namespace ddvi
