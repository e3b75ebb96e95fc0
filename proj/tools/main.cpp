#include <CLI11.hpp>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>

#include "commands.hpp"

namespace {

using namespace ddvi::cli;

// Short spellings for the most used keys, in addition to --section-key.
const std::map<std::string, std::string> kAliases = {
    {"decomposition.n_strips", "--n-strips"}, {"decomposition.delta", "--delta"},
    {"ddm.max_outer", "--max-outer"},
    {"train.seed", "--seed"},                 {"train.lr", "--lr"},
    {"oracle.grid_n", "--grid-n"},            {"weights.bo_trials", "--bo-trials"},
    {"bench.deltas", "--deltas"},             {"bench.hs", "--hs"},
    {"bench.seeds", "--seeds"},
};

std::string flag_name(const ConfigKey& k) {
  std::string name = "--" + k.section + "-" + k.name;
  for (auto& c : name) {
    if (c == '_') c = '-';
  }
  return name;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Full-set loss evaluations allocate multi-megabyte temporaries every
  // epoch; keep them on the heap instead of a fresh mmap each time.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  CLI::App app{"Deep domain decomposition for the obstacle problem"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  bool serial = false;
  app.add_option("--config", config_path, "key = value config file with [section] headers");
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  app.add_flag("--serial", serial, "train subdomains one after another (reproducible)");

  std::map<std::string, std::string> overrides;
  for (const auto& k : config_keys()) {
    std::string names = flag_name(k);
    if (const auto a = kAliases.find(k.full()); a != kAliases.end()) names += "," + a->second;
    app.add_option_function<std::string>(
        names, [&overrides, key = k.full()](const std::string& v) { overrides[key] = v; }, k.help);
  }

  auto* solve = app.add_subcommand("solve", "train the decomposition and compare with PSOR");
  auto* oracle = app.add_subcommand("oracle", "PSOR reference solution and diagnostics");
  auto* bench = app.add_subcommand("bench", "outer iteration counts over (delta, h)");
  auto* tune = app.add_subcommand("tune", "Bayesian optimisation of the loss weights");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) read_config_file(config_path, cfg);
    if (const char* env = std::getenv("DDVI_SEED"); env && *env) set_value(cfg, "train.seed", env);
    for (const auto& [key, value] : overrides) set_value(cfg, key, value);
    if (serial) cfg.serial = true;
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg, out_dir, std::cout);
    if (oracle->parsed()) return cmd_oracle(cfg, out_dir, std::cout);
    if (bench->parsed()) return cmd_bench(cfg, out_dir, std::cout);
    if (tune->parsed()) return cmd_tune(cfg, out_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ddvi::PsorNotConverged& e) {
    std::cerr << e.what() << '\n';
    return kExitNotConverged;
  } catch (const ddvi::NonFiniteLoss& e) {
    std::cerr << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
