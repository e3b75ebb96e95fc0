#pragma once

#include <span>
#include <string>
#include <vector>

#include "ddvi/net.hpp"
#include "ddvi/problem.hpp"

namespace ddvi {

struct LossWeights {
  double w1 = 1e4;  // interior
  double w2 = 1e4;  // physical boundary
  double w3 = 1e4;  // interface
  double w4 = 1e4;  // positivity penalty

  void validate() const;
};

struct LossBreakdown {
  double interior = 0.0;
  double boundary = 0.0;
  double interface = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

/// ritz: Monte-Carlo energy estimate (first derivatives only).
/// residual: mean squared strong-form residual with a finite-difference
/// Laplacian. The true obstacle solution does not satisfy -lap u = f on its
/// contact set, so residual mode biases the fit there.
enum class InteriorMode { ritz, residual };
enum class PenaltyForm { hinge, squared_hinge };

const char* to_string(InteriorMode m);
InteriorMode interior_mode_from_string(const std::string& s);
const char* to_string(PenaltyForm f);
PenaltyForm penalty_form_from_string(const std::string& s);

struct LossOptions {
  InteriorMode interior_mode = InteriorMode::ritz;
  PenaltyForm penalty = PenaltyForm::hinge;
  double h_fd = 1e-3;
};

/// area * mean_i [ 1/2 (u_x^2 + u_y^2 + alpha u^2) - f u ].
double ritz_energy(const NetworkParams& p, std::span<const Point> interior,
                   const ViProblem& prob, double area);

/// Same estimate from field values and gradients already sampled at the
/// points (any function, not only a network).
double ritz_energy(const BatchOutput& field, std::span<const Point> interior,
                   const ViProblem& prob, double area);

/// mean_i | -lap_h u + alpha u - f |^2 with a central 5-point Laplacian.
double residual_loss(const NetworkParams& p, std::span<const Point> interior,
                     const ViProblem& prob, double h_fd = 1e-3);

struct BoundaryTerm {
  double value = 0.0;
  bool sampled = false;  // false when there were no boundary points
};

BoundaryTerm boundary_loss(const NetworkParams& p, std::span<const Point> boundary,
                           const ViProblem& prob);

/// mean_i |u(x_i) - W_i|^2; 0 for an empty interface.
double interface_loss(const NetworkParams& p, std::span<const Point> pts,
                      std::span<const double> targets);

double positivity_penalty(const NetworkParams& p, std::span<const Point> interior,
                          PenaltyForm form = PenaltyForm::hinge);

LossBreakdown total_loss(const LossWeights& w, double interior, double boundary,
                         double interface, double penalty);

/// Everything one subdomain's loss needs, as non-owning views.
struct LossData {
  std::span<const Point> interior;
  std::span<const Point> boundary;
  std::span<const Point> interface;
  std::span<const double> interface_targets;
  double area = 0.0;
};

LossBreakdown evaluate_loss(const NetworkParams& p, const LossData& data,
                            const ViProblem& prob, const LossWeights& w,
                            const LossOptions& opt);

struct LossGradient {
  LossBreakdown breakdown;
  std::vector<double> gradient;
};

/// Weighted total loss and its parameter gradient. Throws NonFiniteLoss
/// naming the first offending term.
LossGradient loss_gradient(const NetworkParams& p, const LossData& data,
                           const ViProblem& prob, const LossWeights& w,
                           const LossOptions& opt);

/// Five stencil points (center, +x, -x, +y, -y) for each input point, in
/// that order per point.
std::vector<Point> laplacian_stencil(std::span<const Point> pts, double h_fd);

/// Pointwise complementarity violation |min(u, -lap_h u + alpha u - f)| + max(-u, 0).
std::vector<double> complementarity_indicator(const NetworkParams& p,
                                              std::span<const Point> pts,
                                              const ViProblem& prob, double h_fd = 1e-3);

}  // namespace ddvi
