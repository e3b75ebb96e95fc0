#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ddvi/problem.hpp"

namespace ddvi {

/// Discrete obstacle problem on the interior nodes of a uniform grid:
/// find u >= 0 with A u - b >= 0 and u . (A u - b) = 0, where A is the
/// 5-point Laplacian plus alpha on the diagonal. Dirichlet data enters b.
struct LcpSystem {
  std::size_t grid_n = 0;  // interior nodes per axis
  double h_x = 0.0;
  double h_y = 0.0;
  double alpha = 0.0;
  Rect domain;
  std::vector<double> b;  // row-major interior nodes (y outer, x inner)

  double diagonal() const { return 2.0 / (h_x * h_x) + 2.0 / (h_y * h_y) + alpha; }
  double off_x() const { return -1.0 / (h_x * h_x); }
  double off_y() const { return -1.0 / (h_y * h_y); }
  std::size_t unknowns() const { return grid_n * grid_n; }

  /// y = A u for interior values u.
  std::vector<double> apply(const std::vector<double>& u) const;
  Eigen::MatrixXd to_dense() const;
};

LcpSystem assemble_lcp(const ViProblem& prob, std::size_t grid_n);

/// Nodal values on the full grid including the boundary ring,
/// (grid_n + 2)^2 nodes, row-major with y outer.
struct GridField {
  std::size_t nodes = 0;  // per axis
  Rect domain;
  std::vector<double> values;

  double x(std::size_t i) const;
  double y(std::size_t j) const;
  double at(std::size_t i, std::size_t j) const { return values[j * nodes + i]; }
  /// Interior node values in LcpSystem order.
  std::vector<double> interior() const;
};

class PsorNotConverged : public std::runtime_error {
 public:
  PsorNotConverged(std::size_t sweeps, double last_change);
  std::size_t sweeps() const { return sweeps_; }
  double last_change() const { return last_change_; }

 private:
  std::size_t sweeps_;
  double last_change_;
};

struct PsorOptions {
  double omega = 1.5;
  double tol = 1e-13;  // max nodal change per sweep
  std::size_t max_sweeps = 2'000'000;
};

GridField psor_solve(const LcpSystem& sys, const PsorOptions& opt = {},
                     std::size_t* sweeps_used = nullptr);

/// Projected SOR on a dense system; used for tiny hand-checkable cases.
std::vector<double> psor_solve_dense(const Eigen::MatrixXd& a, const std::vector<double>& b,
                                     const PsorOptions& opt = {});

struct ComplementarityDiagnostics {
  double obstacle_violation = 0.0;   // max(-u, 0)
  double residual_negativity = 0.0;  // max(-(A u - b), 0)
  double complementarity = 0.0;      // max |u (A u - b)|

  double worst() const;
};

ComplementarityDiagnostics complementarity_diagnostics(const LcpSystem& sys,
                                                       const std::vector<double>& u);

/// Discrete energy 1/2 u.A u - b.u (times the cell area h_x h_y).
double discrete_energy(const LcpSystem& sys, const std::vector<double>& u);

/// max(sin(pi x) sin(pi y), 0).
double analytic_candidate(double x, double y);

struct FieldSample {
  double u = 0.0;
  double u_x = 0.0;
  double u_y = 0.0;
};
using EnergyIntegrand = std::function<FieldSample(double, double)>;

/// Tensor-product Gauss-Legendre evaluation of
/// int 1/2 (|grad u|^2 + alpha u^2) - f u over rect.
double quadrature_energy(const EnergyIntegrand& fn, const ViProblem& prob, const Rect& rect,
                         std::size_t order);

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
void gauss_legendre(std::size_t order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace ddvi
