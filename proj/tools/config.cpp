#include "config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "ddvi/csv.hpp"

namespace ddvi::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected on/off, got '" + v + "'");
}

template <class Fn>
auto parse_enum(const std::string& key, const std::string& v, Fn&& fn) {
  try {
    return fn(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

std::string show(double v) { return csv::real(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "on" : "off"; }

// Registers a key bound to one RunConfig member.
template <class T>
ConfigKey key(std::string section, std::string name, T RunConfig::*member, std::string help) {
  const std::string full = section + "." + name;
  ConfigKey k{std::move(section), std::move(name), std::move(help), {}, {}};
  k.set = [member, full](RunConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, double>) {
      c.*member = parse_real(full, v);
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = parse_bool(full, v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else if constexpr (std::is_same_v<T, Activation>) {
      c.*member = parse_enum(full, v, activation_from_string);
    } else if constexpr (std::is_same_v<T, InteriorMode>) {
      c.*member = parse_enum(full, v, interior_mode_from_string);
    } else if constexpr (std::is_same_v<T, PenaltyForm>) {
      c.*member = parse_enum(full, v, penalty_form_from_string);
    } else if constexpr (std::is_same_v<T, PointDistribution>) {
      c.*member = parse_enum(full, v, distribution_from_string);
    } else {
      c.*member = static_cast<T>(parse_uint(full, v));
    }
  };
  k.get = [member](const RunConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, bool>) {
      return show(c.*member);
    } else if constexpr (std::is_same_v<T, std::string>) {
      return c.*member;
    } else if constexpr (std::is_enum_v<T>) {
      return to_string(c.*member);
    } else {
      return show(static_cast<std::uint64_t>(c.*member));
    }
  };
  return k;
}

std::vector<ConfigKey> make_keys() {
  using C = RunConfig;
  return {
      key("problem", "source", &C::source, "right-hand side: example1 or zero"),
      key("problem", "alpha", &C::alpha, "reaction coefficient"),
      key("decomposition", "n_strips", &C::n_strips, "number of vertical strips"),
      key("decomposition", "delta", &C::delta, "overlap width"),
      key("net", "depth", &C::depth, "hidden layers"),
      key("net", "width", &C::width, "units per hidden layer"),
      key("net", "activation", &C::activation, "relu or tanh"),
      key("train", "lr", &C::lr, "Adam learning rate"),
      key("train", "lr_decay", &C::lr_decay, "learning-rate factor per outer iteration"),
      key("train", "lr_min", &C::lr_min, "learning-rate floor"),
      key("train", "minibatch", &C::minibatch, "interior points per Adam step"),
      key("train", "inner_epoch_cap", &C::inner_epoch_cap, "epochs per subdomain solve"),
      key("train", "seed", &C::seed, "master seed (DDVI_SEED overrides)"),
      key("train", "interior_mode", &C::interior_mode, "ritz or residual"),
      key("train", "penalty", &C::penalty, "hinge or squared_hinge"),
      key("train", "h_fd", &C::h_fd, "finite-difference step for the residual"),
      key("sampling", "h", &C::h, "collocation spacing"),
      key("sampling", "distribution", &C::distribution, "uniform or normal_clipped"),
      key("sampling", "pool_size", &C::pool_size, "adaptive candidate pool"),
      key("sampling", "adopt_k", &C::adopt_k, "points replaced per refresh"),
      key("sampling", "adaptive", &C::adaptive, "residual-driven point refresh"),
      key("ddm", "tol_loss", &C::tol_loss, "inner stagnation tolerance"),
      key("ddm", "tol_interface", &C::tol_interface, "outer interface tolerance"),
      key("ddm", "tol_interior", &C::tol_interior, "outer interior tolerance"),
      key("ddm", "stagnation_window", &C::stagnation_window, "epochs compared for stagnation"),
      key("ddm", "max_outer", &C::max_outer, "outer iteration cap"),
      key("ddm", "serial", &C::serial, "train subdomains one after another"),
      key("weights", "w1", &C::w1, "interior weight"),
      key("weights", "w2", &C::w2, "boundary weight"),
      key("weights", "w3", &C::w3, "interface weight"),
      key("weights", "w4", &C::w4, "positivity weight"),
      key("weights", "bo_enabled", &C::bo_enabled, "tune weights before solving"),
      key("weights", "bo_trials", &C::bo_trials, "tuning budget"),
      key("tune", "outer_iterations", &C::tune_outer, "outer iterations per trial"),
      key("tune", "inner_epochs", &C::tune_inner_epochs, "epoch cap per trial"),
      key("tune", "validation_h", &C::tune_validation_h, "held-out point spacing"),
      key("oracle", "grid_n", &C::grid_n, "interior nodes per axis"),
      key("oracle", "omega", &C::omega, "over-relaxation factor"),
      key("oracle", "tol", &C::psor_tol, "max nodal change at convergence"),
      key("oracle", "max_sweeps", &C::psor_max_sweeps, "sweep cap"),
      key("bench", "deltas", &C::bench_deltas, "overlaps: numbers, h or 2h"),
      key("bench", "hs", &C::bench_hs, "collocation spacings"),
      key("bench", "seeds", &C::bench_seeds, "seeds per cell"),
  };
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void set_value(RunConfig& cfg, const std::string& full_key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.full() == full_key) {
      k.set(cfg, trim(value));
      return;
    }
  }
  throw ConfigError(full_key, "unknown key");
}

void read_config(std::istream& is, RunConfig& cfg) {
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const auto key = trim(line.substr(0, eq));
    set_value(cfg, section.empty() ? key : section + "." + key, line.substr(eq + 1));
  }
}

void read_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw ConfigError("--config", "cannot open '" + path + "'");
  read_config(is, cfg);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  std::string section;
  for (const auto& k : config_keys()) {
    if (k.section != section) {
      if (!section.empty()) os << '\n';
      section = k.section;
      os << '[' << section << "]\n";
    }
    os << k.name << " = " << k.get(cfg) << '\n';
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ViProblem RunConfig::problem() const {
  ViProblem p;
  if (source == "example1") {
    p = example1_problem();
  } else if (source == "zero") {
    p = zero_source_problem();
  } else {
    throw ConfigError("problem.source", "expected example1 or zero, got '" + source + "'");
  }
  p.alpha = alpha;
  return p;
}

Decomposition RunConfig::decomposition(const ViProblem& prob) const {
  try {
    return strip_decomposition(prob, n_strips, delta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("decomposition.delta", e.what());
  }
}

DdmConfig RunConfig::ddm() const {
  DdmConfig c;
  c.arch.hidden_widths.assign(depth, width);
  c.arch.activation = activation;
  c.sampler.spacing_h = h;
  c.sampler.distribution = distribution;
  c.sampler.pool_size = pool_size;
  c.sampler.adopt_k = adopt_k;
  c.weights = {w1, w2, w3, w4};
  c.loss.interior_mode = interior_mode;
  c.loss.penalty = penalty;
  c.loss.h_fd = h_fd;
  c.lr = lr;
  c.lr_decay = lr_decay;
  c.lr_min = lr_min;
  c.tol_loss = tol_loss;
  c.tol_interface = tol_interface;
  c.tol_interior = tol_interior;
  c.stagnation_window = stagnation_window;
  c.max_outer = max_outer;
  c.inner_epoch_cap = inner_epoch_cap;
  c.minibatch_size = minibatch;
  c.adaptive_refresh = adaptive;
  c.serial = serial;
  return c;
}

PsorOptions RunConfig::psor() const { return {omega, psor_tol, psor_max_sweeps}; }

BoState RunConfig::bo_state() const {
  BoState s;
  s.trials_budget = bo_trials;
  s.seed = seed;
  return s;
}

TuneOptions RunConfig::tune_options() const {
  TuneOptions t;
  t.outer_iterations = tune_outer;
  t.inner_epochs = tune_inner_epochs;
  t.validation_spacing = tune_validation_h;
  t.seed = seed;
  return t;
}

void RunConfig::validate() const {
  const auto check = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
  };
  problem().validate();
  check(alpha >= 0.0, "problem.alpha", "must be >= 0");
  check(n_strips >= 1, "decomposition.n_strips", "must be >= 1");
  check(delta >= 0.0, "decomposition.delta", "must be >= 0");
  check(depth >= 1, "net.depth", "must be >= 1");
  check(width >= 1, "net.width", "must be >= 1");
  check(lr > 0.0, "train.lr", "must be > 0");
  check(lr_decay > 0.0 && lr_decay <= 1.0, "train.lr_decay", "must be in (0, 1]");
  check(lr_min >= 0.0, "train.lr_min", "must be >= 0");
  check(minibatch >= 1, "train.minibatch", "must be >= 1");
  check(h_fd > 0.0, "train.h_fd", "must be > 0");
  check(h > 0.0, "sampling.h", "must be > 0");
  check(adopt_k <= pool_size, "sampling.adopt_k", "must not exceed sampling.pool_size");
  check(tol_loss > 0.0, "ddm.tol_loss", "must be > 0");
  check(tol_interface > 0.0, "ddm.tol_interface", "must be > 0");
  check(tol_interior > 0.0, "ddm.tol_interior", "must be > 0");
  check(stagnation_window >= 1, "ddm.stagnation_window", "must be >= 1");
  check(w1 > 0.0, "weights.w1", "must be > 0");
  check(w2 > 0.0, "weights.w2", "must be > 0");
  check(w3 > 0.0, "weights.w3", "must be > 0");
  check(w4 > 0.0, "weights.w4", "must be > 0");
  check(bo_trials >= 1, "weights.bo_trials", "must be >= 1");
  check(tune_validation_h > 0.0, "tune.validation_h", "must be > 0");
  check(grid_n >= 2, "oracle.grid_n", "must be >= 2");
  check(omega > 0.0 && omega < 2.0, "oracle.omega", "must be in (0, 2)");
  check(psor_tol > 0.0, "oracle.tol", "must be > 0");
  check(bench_seeds >= 1, "bench.seeds", "must be >= 1");
  decomposition(problem());
}

}  // namespace ddvi::cli
