#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddvi/ddm.hpp"
#include "ddvi/lcp.hpp"
#include "ddvi/tuner.hpp"

namespace ddvi::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  // [problem]
  std::string source = "example1";  // example1 | zero
  double alpha = 0.0;
  // [decomposition]
  std::size_t n_strips = 2;
  double delta = 0.2;
  // [net]
  std::size_t depth = 4;
  std::size_t width = 32;
  Activation activation = Activation::relu;
  // [train]
  double lr = 1e-3;
  double lr_decay = 0.9;
  double lr_min = 1e-7;
  std::size_t minibatch = 128;
  std::size_t inner_epoch_cap = 1000;
  std::uint64_t seed = 0;
  InteriorMode interior_mode = InteriorMode::ritz;
  PenaltyForm penalty = PenaltyForm::hinge;
  double h_fd = 1e-3;
  // [sampling]
  double h = 0.02;
  PointDistribution distribution = PointDistribution::uniform;
  std::size_t pool_size = 512;
  std::size_t adopt_k = 64;
  bool adaptive = false;
  // [ddm]
  double tol_loss = 1e-4;
  double tol_interface = 1e-4;
  double tol_interior = 1e-4;
  std::size_t stagnation_window = 50;
  std::size_t max_outer = 200;
  bool serial = false;
  // [weights]
  double w1 = 1.0;
  double w2 = 1e4;
  double w3 = 1e4;
  double w4 = 1e4;
  bool bo_enabled = false;
  std::size_t bo_trials = 30;
  // [tune]
  std::size_t tune_outer = 1;
  std::size_t tune_inner_epochs = 200;
  double tune_validation_h = 0.05;
  // [oracle]
  std::size_t grid_n = 256;
  double omega = 1.5;
  double psor_tol = 1e-13;
  std::size_t psor_max_sweeps = 2'000'000;
  // [bench]
  std::string bench_deltas = "0.1,0.2,h,2h";
  std::string bench_hs = "0.05,0.02";
  std::size_t bench_seeds = 3;

  ViProblem problem() const;
  Decomposition decomposition(const ViProblem& prob) const;
  DdmConfig ddm() const;
  PsorOptions psor() const;
  BoState bo_state() const;
  TuneOptions tune_options() const;

  /// Range and consistency checks; throws ConfigError naming the key.
  void validate() const;
};

/// One "section.key" entry of the config file.
struct ConfigKey {
  std::string section;
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;

  std::string full() const { return section + "." + name; }
};

const std::vector<ConfigKey>& config_keys();

/// Sets "section.key" from text; throws ConfigError on an unknown key or a
/// malformed value.
void set_value(RunConfig& cfg, const std::string& full_key, const std::string& value);

/// Flat "key = value" lines under "[section]" headers; '#' starts a comment.
void read_config(std::istream& is, RunConfig& cfg);
void read_config_file(const std::string& path, RunConfig& cfg);
void write_config(std::ostream& os, const RunConfig& cfg);

/// Comma-separated list of numbers or the symbols "h" / "2h".
std::vector<std::string> split_list(const std::string& text);

}  // namespace ddvi::cli
