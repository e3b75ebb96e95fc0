#include "ddvi/problem.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ddvi {

double Segment::length() const { return std::hypot(b.x - a.x, b.y - a.y); }

void ViProblem::validate() const {
  if (!(domain.x_min < domain.x_max) || !(domain.y_min < domain.y_max)) {
    throw std::invalid_argument("ViProblem: degenerate domain rectangle");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("ViProblem: alpha must be finite and >= 0");
  }
  if (!source || !boundary_value) {
    throw std::invalid_argument("ViProblem: source and boundary_value are required");
  }
}

ViProblem example1_problem() {
  constexpr double pi = std::numbers::pi;
  ViProblem p;
  p.alpha = 0.0;
  p.source = [](double x, double y) {
    return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
  };
  p.boundary_value = [](double, double) { return 0.0; };
  p.domain = Rect{-1.0, 1.0, -1.0, 1.0};
  return p;
}

ViProblem zero_source_problem() {
  ViProblem p = example1_problem();
  p.source = [](double, double) { return 0.0; };
  return p;
}

double Subdomain::distance_to_interface(Point p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& itf : interfaces) {
    // Interfaces are vertical lines spanning the strip.
    best = std::min(best, std::abs(p.x - itf.segment.a.x));
  }
  return best;
}

Decomposition strip_decomposition(const ViProblem& problem, std::size_t n_strips,
                                  double delta) {
  problem.validate();
  if (n_strips == 0) {
    throw std::invalid_argument("strip_decomposition: n_strips must be >= 1");
  }
  const Rect& dom = problem.domain;
  const double core = dom.width() / static_cast<double>(n_strips);
  if (n_strips > 1 && !(delta > 0.0 && delta < core)) {
    throw std::invalid_argument("strip_decomposition: delta must lie in (0, strip width = " +
                                std::to_string(core) + ")");
  }

  Decomposition d;
  d.delta = n_strips > 1 ? delta : 0.0;
  d.domain = dom;
  const double half = 0.5 * d.delta;

  for (std::size_t k = 0; k < n_strips; ++k) {
    Subdomain s;
    s.id = k;
    const double left_core = dom.x_min + core * static_cast<double>(k);
    const double right_core =
        k + 1 == n_strips ? dom.x_max : dom.x_min + core * static_cast<double>(k + 1);
    const bool has_left = k > 0;
    const bool has_right = k + 1 < n_strips;
    s.rect = Rect{has_left ? left_core - half : dom.x_min,
                  has_right ? right_core + half : dom.x_max, dom.y_min, dom.y_max};

    const Rect& r = s.rect;
    s.physical_edges.push_back(Segment{{r.x_min, r.y_min}, {r.x_max, r.y_min}});
    s.physical_edges.push_back(Segment{{r.x_min, r.y_max}, {r.x_max, r.y_max}});
    if (!has_left) {
      s.physical_edges.push_back(Segment{{r.x_min, r.y_min}, {r.x_min, r.y_max}});
    } else {
      s.interfaces.push_back({Segment{{r.x_min, r.y_min}, {r.x_min, r.y_max}}, k - 1});
    }
    if (!has_right) {
      s.physical_edges.push_back(Segment{{r.x_max, r.y_min}, {r.x_max, r.y_max}});
    } else {
      s.interfaces.push_back({Segment{{r.x_max, r.y_min}, {r.x_max, r.y_max}}, k + 1});
    }
    d.subdomains.push_back(std::move(s));
  }
  return d;
}

}  // namespace ddvi
