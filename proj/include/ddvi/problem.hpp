#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ddvi {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Closed axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool contains_strictly(Point p) const {
    return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max;
  }
};

struct Segment {
  Point a;
  Point b;

  double length() const;
  bool is_vertical() const { return a.x == b.x; }
};

using ScalarField = std::function<double(double, double)>;

/// Obstacle problem: find u >= 0 minimizing 1/2 a(u,u) - (f,u) with
/// a(u,v) = int grad u . grad v + alpha u v, and u = g on the boundary.
struct ViProblem {
  double alpha = 0.0;
  ScalarField source;
  ScalarField boundary_value;
  Rect domain;

  void validate() const;
};

/// f = 2 pi^2 sin(pi x) sin(pi y) on (-1,1)^2, g = 0, alpha = 0.
ViProblem example1_problem();

/// Same domain and boundary datum as example1_problem, with f = 0.
ViProblem zero_source_problem();

struct InterfaceSegment {
  Segment segment;
  std::size_t neighbor = 0;
};

struct Subdomain {
  std::size_t id = 0;
  Rect rect;
  std::vector<Segment> physical_edges;
  std::vector<InterfaceSegment> interfaces;

  /// Distance from p to the nearest interface line of this subdomain;
  /// +inf when there are no interfaces.
  double distance_to_interface(Point p) const;
};

struct Decomposition {
  std::vector<Subdomain> subdomains;
  double delta = 0.0;
  Rect domain;
};

/// Vertical strips of equal core width, each widened by delta/2 towards every
/// interior neighbor. Throws std::invalid_argument when delta does not fit.
Decomposition strip_decomposition(const ViProblem& problem, std::size_t n_strips,
                                  double delta);

}  // namespace ddvi
