#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ddvi/problem.hpp"

using namespace ddvi;

TEST_CASE("example 1 data") {
  const auto p = example1_problem();
  CHECK(p.alpha == 0.0);
  CHECK(p.domain.x_min == -1.0);
  CHECK(p.domain.y_max == 1.0);
  CHECK(p.source(0.5, 0.5) == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
  CHECK(p.source(0.0, 0.3) == doctest::Approx(0.0));
  // odd in each variable
  CHECK(p.source(-0.3, 0.4) == doctest::Approx(-p.source(0.3, 0.4)));
  CHECK(p.source(-0.3, -0.4) == doctest::Approx(p.source(0.3, 0.4)));
  CHECK(p.boundary_value(1.0, 0.2) == 0.0);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("ViProblem validation") {
  auto p = example1_problem();
  p.alpha = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = example1_problem();
  p.domain.x_max = p.domain.x_min;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = example1_problem();
  p.source = nullptr;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("two strips with delta = 0.2") {
  const auto d = strip_decomposition(example1_problem(), 2, 0.2);
  REQUIRE(d.subdomains.size() == 2);
  const auto& s1 = d.subdomains[0];
  const auto& s2 = d.subdomains[1];
  CHECK(s1.rect.x_min == -1.0);
  CHECK(s1.rect.x_max == doctest::Approx(0.1));
  CHECK(s2.rect.x_min == doctest::Approx(-0.1));
  CHECK(s2.rect.x_max == 1.0);
  CHECK(s1.rect.y_min == -1.0);
  CHECK(s1.rect.y_max == 1.0);

  REQUIRE(s1.interfaces.size() == 1);
  CHECK(s1.interfaces[0].neighbor == 1);
  CHECK(s1.interfaces[0].segment.a.x == doctest::Approx(0.1));
  CHECK(s1.interfaces[0].segment.b.x == doctest::Approx(0.1));
  REQUIRE(s2.interfaces.size() == 1);
  CHECK(s2.interfaces[0].neighbor == 0);
  CHECK(s2.interfaces[0].segment.a.x == doctest::Approx(-0.1));

  // left strip: bottom, top, left edge
  CHECK(s1.physical_edges.size() == 3);
  CHECK(s2.physical_edges.size() == 3);
  CHECK(s1.distance_to_interface({0.0, 0.5}) == doctest::Approx(0.1));
  CHECK(d.delta == 0.2);
}

TEST_CASE("three strips on (-1, 1)^2") {
  const auto d = strip_decomposition(example1_problem(), 3, 0.1);
  REQUIRE(d.subdomains.size() == 3);
  const double core = 2.0 / 3.0;
  const auto& mid = d.subdomains[1];
  CHECK(mid.rect.x_min == doctest::Approx(-1.0 + core - 0.05));
  CHECK(mid.rect.x_max == doctest::Approx(-1.0 + 2 * core + 0.05));
  CHECK(mid.interfaces.size() == 2);
  CHECK(mid.physical_edges.size() == 2);
  CHECK(mid.interfaces[0].neighbor == 0);
  CHECK(mid.interfaces[1].neighbor == 2);

  // neighbors overlap by delta and every interface lies strictly inside the domain
  for (std::size_t k = 0; k + 1 < 3; ++k) {
    CHECK(d.subdomains[k].rect.x_max - d.subdomains[k + 1].rect.x_min == doctest::Approx(0.1));
  }
  for (const auto& s : d.subdomains) {
    CHECK(d.domain.contains(s.rect.center()));
    for (const auto& itf : s.interfaces) {
      CHECK(itf.segment.a.x > -1.0);
      CHECK(itf.segment.a.x < 1.0);
      CHECK(itf.neighbor != s.id);
      // each interface is interior to the neighbor's rectangle
      CHECK(d.subdomains[itf.neighbor].rect.contains_strictly({itf.segment.a.x, 0.0}));
    }
  }
}

TEST_CASE("single strip has no interfaces") {
  const auto d = strip_decomposition(example1_problem(), 1, 0.2);
  REQUIRE(d.subdomains.size() == 1);
  CHECK(d.subdomains[0].interfaces.empty());
  CHECK(d.subdomains[0].physical_edges.size() == 4);
  CHECK(std::isinf(d.subdomains[0].distance_to_interface({0.0, 0.0})));
}

TEST_CASE("strip_decomposition rejects overlaps that do not fit") {
  const auto p = example1_problem();
  CHECK_THROWS_AS(strip_decomposition(p, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(strip_decomposition(p, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(strip_decomposition(p, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(strip_decomposition(p, 4, 0.6), std::invalid_argument);
}

TEST_CASE("segment length") {
  CHECK(Segment{{0, 0}, {3, 4}}.length() == doctest::Approx(5.0));
}
