#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddvi/lcp.hpp"
#include "ddvi/metrics.hpp"

using namespace ddvi;

TEST_CASE("identical inputs give zero metrics") {
  const std::vector<double> y{0.3, -1.0, 2.5};
  const auto r = compute_metrics(y, y);
  CHECK(r.mse == 0.0);
  CHECK(r.mae == 0.0);
  CHECK(r.max_err == 0.0);
  CHECK(r.relative_l2() == 0.0);
  CHECK(r.n_samples == 3);
}

TEST_CASE("zero reference: rel_l2 undefined") {
  const std::vector<double> y{0.0, 0.0}, yh{1.0, 1.0};
  const auto r = compute_metrics(y, yh);
  CHECK(r.mse == 1.0);
  CHECK(r.mae == 1.0);
  CHECK(r.max_err == 1.0);
  CHECK_FALSE(r.rel_l2.has_value());
  CHECK_THROWS_AS(r.relative_l2(), ZeroReferenceNorm);
}

TEST_CASE("3-4-5 example") {
  const std::vector<double> y{3.0, 4.0}, yh{0.0, 0.0};
  const auto r = compute_metrics(y, yh);
  CHECK(r.relative_l2() == 1.0);
  CHECK(r.mse == 12.5);
  CHECK(r.mae == 3.5);
  CHECK(r.max_err == 4.0);
}

TEST_CASE("constant offset and ordering identities") {
  std::vector<double> y{0.1, 0.5, -0.2, 0.9, 1.3};
  std::vector<double> yh(y);
  const double c = -0.25;
  for (auto& v : yh) v += c;
  const auto r = compute_metrics(y, yh);
  CHECK(r.mae == doctest::Approx(0.25));
  CHECK(r.max_err == doctest::Approx(0.25));
  CHECK(r.mse == doctest::Approx(0.0625));
  // equal error magnitudes: mse = mae^2
  CHECK(r.mse == doctest::Approx(r.mae * r.mae));

  std::vector<double> z{0.0, 2.0, -1.0, 0.5, 0.7};
  const auto a = compute_metrics(y, z);
  CHECK(a.mse <= a.max_err * a.max_err);
  CHECK(a.mae <= a.max_err);
  std::reverse(y.begin(), y.end());
  std::reverse(z.begin(), z.end());
  const auto b = compute_metrics(y, z);
  CHECK(b.mse == doctest::Approx(a.mse));
  CHECK(b.mae == doctest::Approx(a.mae));
  CHECK(b.relative_l2() == doctest::Approx(a.relative_l2()));
  CHECK(b.max_err == a.max_err);
}

TEST_CASE("length errors") {
  const std::vector<double> y{1.0, 2.0}, yh{1.0};
  CHECK_THROWS_AS(compute_metrics(y, yh), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
}

TEST_CASE("sample_on_grid") {
  const Rect sq{-1.0, 1.0, -1.0, 1.0};
  SUBCASE("constant") {
    const auto g = sample_on_grid([](Point) { return 2.5; }, sq, 4);
    CHECK(g.values.size() == 16);
    CHECK(std::all_of(g.values.begin(), g.values.end(), [](double v) { return v == 2.5; }));
  }
  SUBCASE("n = 2 gives the corners, y outer") {
    const auto g = sample_on_grid([](Point) { return 0.0; }, sq, 2);
    REQUIRE(g.points.size() == 4);
    CHECK(g.points[0].x == -1.0);
    CHECK(g.points[0].y == -1.0);
    CHECK(g.points[1].x == 1.0);
    CHECK(g.points[1].y == -1.0);
    CHECK(g.points[2].x == -1.0);
    CHECK(g.points[2].y == 1.0);
    CHECK(g.points[3].x == 1.0);
    CHECK(g.points[3].y == 1.0);
  }
  SUBCASE("candidate is zero at the origin") {
    const auto g = sample_on_grid([](Point p) { return analytic_candidate(p.x, p.y); }, sq, 3);
    CHECK(g.points[4].x == 0.0);
    CHECK(g.points[4].y == 0.0);
    CHECK(g.values[4] == 0.0);
  }
  CHECK_THROWS_AS(sample_on_grid([](Point) { return 0.0; }, sq, 1), std::invalid_argument);
}

TEST_CASE("report csv") {
  auto r = compute_metrics(std::vector<double>{3.0, 4.0}, std::vector<double>{0.0, 0.0}, "psor-256");
  std::ostringstream os;
  write_report_csv(os, r);
  CHECK(os.str() == "mse,mae,rel_l2,max_err,n_samples,reference_tag\n12.5,3.5,1,4,2,psor-256\n");
}
