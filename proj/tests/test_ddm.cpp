#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ddvi/ddm.hpp"
#include "test_support.hpp"

using namespace ddvi;

namespace {

DdmConfig small_config() {
  DdmConfig cfg;
  cfg.arch.hidden_widths = {8, 8};
  cfg.sampler.spacing_h = 0.2;
  cfg.inner_epoch_cap = 20;
  cfg.max_outer = 3;
  cfg.serial = true;
  return cfg;
}

NetworkParams zero_net(const NetArchitecture& a) {
  return {a, std::vector<double>(a.parameter_count(), 0.0)};
}

InterfaceTargets zero_targets(const TrainSet& ts) {
  InterfaceTargets t;
  for (const auto& seg : ts.interface) t.emplace_back(seg.size(), 0.0);
  return t;
}

}  // namespace

TEST_CASE("train_subdomain with a zero epoch cap leaves the parameters unchanged") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  auto cfg = small_config();
  cfg.inner_epoch_cap = 0;
  const auto& sub = decomp.subdomains[0];
  const auto ts = sample_trainset(sub, cfg.sampler, 1);
  auto p = init_params(cfg.arch, 3);
  const auto before = p.theta;
  auto adam = AdamState::fresh(p.theta.size());
  std::mt19937_64 rng(0);
  const auto st = train_subdomain(p, adam, ts, zero_targets(ts), sub, cfg, prob, rng);
  CHECK(p.theta == before);
  CHECK(st.epochs == 0);
  CHECK(st.final.total == st.initial.total);
}

TEST_CASE("train_subdomain stops on a stagnant loss after exactly one window") {
  // Zero net, zero source, zero targets: the loss is 0 and every gradient vanishes.
  const auto prob = zero_source_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  auto cfg = small_config();
  cfg.stagnation_window = 5;
  cfg.inner_epoch_cap = 100;
  const auto& sub = decomp.subdomains[1];
  const auto ts = sample_trainset(sub, cfg.sampler, 2);
  auto p = zero_net(cfg.arch);
  auto adam = AdamState::fresh(p.theta.size());
  std::mt19937_64 rng(0);
  const auto st = train_subdomain(p, adam, ts, zero_targets(ts), sub, cfg, prob, rng);
  CHECK(st.stagnated);
  CHECK(st.epochs == 5);
  CHECK(st.final.total == 0.0);
}

TEST_CASE("train_subdomain lowers the loss on an Example 1 subdomain") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  auto cfg = small_config();
  cfg.arch.hidden_widths = {32, 32, 32, 32};
  cfg.sampler.spacing_h = 0.05;
  cfg.inner_epoch_cap = 1000;
  const auto& sub = decomp.subdomains[0];
  const auto ts = sample_trainset(sub, cfg.sampler, 4);
  auto p = init_params(cfg.arch, 5);
  auto adam = AdamState::fresh(p.theta.size(), cfg.lr);
  std::mt19937_64 rng(6);
  const auto st = train_subdomain(p, adam, ts, zero_targets(ts), sub, cfg, prob, rng);
  CHECK(st.epochs >= 1);
  CHECK(st.final.total < st.initial.total);
}

TEST_CASE("train_subdomain rejects mismatched targets") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  const auto cfg = small_config();
  const auto& sub = decomp.subdomains[0];
  const auto ts = sample_trainset(sub, cfg.sampler, 1);
  auto p = init_params(cfg.arch, 3);
  auto adam = AdamState::fresh(p.theta.size());
  std::mt19937_64 rng(0);
  CHECK_THROWS_AS(train_subdomain(p, adam, ts, {}, sub, cfg, prob, rng), std::invalid_argument);
  auto bad = zero_targets(ts);
  bad[0].push_back(1.0);
  CHECK_THROWS_AS(train_subdomain(p, adam, ts, bad, sub, cfg, prob, rng), std::invalid_argument);
}

TEST_CASE("exchange_interface") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  const auto cfg = small_config();
  std::vector<TrainSet> ts{sample_trainset(decomp.subdomains[0], cfg.sampler, 1),
                           sample_trainset(decomp.subdomains[1], cfg.sampler, 2)};

  SUBCASE("zero nets give zero targets") {
    const std::vector<NetworkParams> nets{zero_net(cfg.arch), zero_net(cfg.arch)};
    const auto w = exchange_interface(nets, decomp, ts);
    for (const auto& sub : w)
      for (const auto& seg : sub)
        for (double v : seg) CHECK(v == 0.0);
  }
  SUBCASE("identical nets give zero interface loss") {
    const auto net = init_params(cfg.arch, 9);
    const std::vector<NetworkParams> nets{net, net};
    const auto w = exchange_interface(nets, decomp, ts);
    for (std::size_t s = 0; s < 2; ++s) {
      REQUIRE(w[s].size() == 1);
      CHECK(interface_loss(net, ts[s].interface[0], w[s][0]) == 0.0);
    }
  }
  SUBCASE("targets are the neighbour's values on the own interface line") {
    const std::vector<NetworkParams> nets{test::affine_net(1.0, 0.0, 0.0), test::affine_net(0.0, 0.0, 2.0)};
    const auto w = exchange_interface(nets, decomp, ts);
    for (const auto& p : ts[0].interface[0]) CHECK(p.x == doctest::Approx(0.1));
    for (const auto& p : ts[1].interface[0]) CHECK(p.x == doctest::Approx(-0.1));
    for (double v : w[0][0]) CHECK(v == doctest::Approx(2.0));
    for (double v : w[1][0]) CHECK(v == doctest::Approx(-0.1));
  }
  SUBCASE("shape mismatch") {
    const std::vector<NetworkParams> one{zero_net(cfg.arch)};
    CHECK_THROWS_AS(exchange_interface(one, decomp, ts), std::invalid_argument);
  }
}

TEST_CASE("relative_change") {
  CHECK(relative_change(std::vector<double>{3.0, 4.0}, std::vector<double>{0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(relative_change(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 1.0}) == 0.0);
  // Near-zero current norm falls back to the absolute change.
  CHECK(relative_change(std::vector<double>{0.0}, std::vector<double>{0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(relative_change(std::vector<double>{1.0}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("evaluate_global") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  const std::vector<NetworkParams> nets{test::affine_net(0.0, 0.0, 1.0), test::affine_net(0.0, 0.0, 3.0)};
  CHECK(evaluate_global(nets, decomp, {-0.5, 0.2}) == doctest::Approx(1.0));
  CHECK(evaluate_global(nets, decomp, {0.5, 0.2}) == doctest::Approx(3.0));
  // Inside the overlap the weights are distances to each strip's own interface line.
  CHECK(evaluate_global(nets, decomp, {0.0, 0.0}) == doctest::Approx(2.0));
  CHECK(evaluate_global(nets, decomp, {0.05, 0.0}) == doctest::Approx((0.05 * 1.0 + 0.15 * 3.0) / 0.2));
  // On an interface line the owner of the other side takes over continuously.
  CHECK(evaluate_global(nets, decomp, {0.1, 0.0}) == doctest::Approx(3.0));
  CHECK(evaluate_global(nets, decomp, {-0.1, 0.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(evaluate_global(nets, decomp, {1.5, 0.0}), std::out_of_range);
  const std::vector<NetworkParams> one{nets[0]};
  CHECK_THROWS_AS(evaluate_global(one, decomp, {0.0, 0.0}), std::invalid_argument);

  const std::vector<Point> pts{{-0.5, 0.2}, {0.0, 0.0}, {0.5, -0.9}};
  const auto batch = evaluate_global_batch(nets, decomp, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(batch[i] == evaluate_global(nets, decomp, pts[i]));
}

TEST_CASE("a single strip never sees an interface term") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 1, 0.0);
  auto cfg = small_config();
  cfg.max_outer = 4;
  const auto res = outer_solve(prob, decomp, cfg, 1);
  REQUIRE(!res.history.rows.empty());
  for (const auto& row : res.history.rows) {
    CHECK(row.loss.interface == 0.0);
    CHECK(row.interface_rel_change == 0.0);
  }
  CHECK(res.stop != StopReason::interface);
}

TEST_CASE("outer_solve bookkeeping") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  auto cfg = small_config();
  const auto res = outer_solve(prob, decomp, cfg, 7);
  CHECK(res.nets.size() == 2);
  CHECK(res.trainsets.size() == 2);
  CHECK(res.history.rows.size() == 2 * res.outer_iterations);
  if (res.converged) {
    const auto& a = res.history.rows[res.history.rows.size() - 2];
    const auto& b = res.history.rows.back();
    const bool itf = a.interface_rel_change < cfg.tol_interface && b.interface_rel_change < cfg.tol_interface;
    const bool inn = a.interior_rel_change < cfg.tol_interior && b.interior_rel_change < cfg.tol_interior;
    CHECK((itf || inn));
  } else {
    CHECK(res.stop == StopReason::max_outer);
    CHECK(res.outer_iterations == cfg.max_outer);
  }

  std::ostringstream os;
  res.history.write_csv(os, false);
  const auto text = os.str();
  CHECK(text.rfind("outer_iter,subdomain,inner_epochs,loss_interior,loss_boundary,loss_interface,"
                   "loss_penalty,loss_total,interface_rel_change,interior_rel_change,wall_ms\n1,0,",
                   0) == 0);

  const std::vector<NetworkParams> wrong(1);
  CHECK_THROWS_AS(outer_solve(prob, decomp, cfg, 7, &wrong), std::invalid_argument);
}

TEST_CASE("serial outer_solve is deterministic; threaded matches serial") {
  const auto prob = example1_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  auto cfg = small_config();
  const auto a = outer_solve(prob, decomp, cfg, 11);
  const auto b = outer_solve(prob, decomp, cfg, 11);
  std::ostringstream ha, hb;
  a.history.write_csv(ha, false);
  b.history.write_csv(hb, false);
  CHECK(ha.str() == hb.str());
  for (std::size_t s = 0; s < 2; ++s) CHECK(a.nets[s].theta == b.nets[s].theta);

  cfg.serial = false;
  const auto c = outer_solve(prob, decomp, cfg, 11);
  for (std::size_t s = 0; s < 2; ++s) CHECK(c.nets[s].theta == a.nets[s].theta);
}

TEST_CASE("warm start from converged nets stops immediately") {
  // Nets that do not change under training (zero source, zero nets) make every
  // iterate identical, so the first outer iteration already meets the tolerance.
  const auto prob = zero_source_problem();
  const auto decomp = strip_decomposition(prob, 2, 0.2);
  auto cfg = small_config();
  const std::vector<NetworkParams> warm{zero_net(cfg.arch), zero_net(cfg.arch)};
  const auto res = outer_solve(prob, decomp, cfg, 3, &warm);
  CHECK(res.converged);
  CHECK(res.outer_iterations == 1);
}

TEST_CASE("DdmConfig validation and learning-rate schedule") {
  DdmConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.lr_at(1) == doctest::Approx(cfg.lr));
  CHECK(cfg.lr_at(100000) == doctest::Approx(cfg.lr_min));
  auto bad = cfg;
  bad.tol_loss = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.minibatch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("StopReason names") {
  CHECK(std::string(to_string(StopReason::interface)) == "interface");
  CHECK(std::string(to_string(StopReason::max_outer)) == "max_outer");
}
