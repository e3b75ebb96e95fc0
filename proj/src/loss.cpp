#include "ddvi/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddvi {

namespace {

void check_finite(const char* term, double v) {
  if (!std::isfinite(v)) throw NonFiniteLoss(term, v);
}

double ritz_from(const BatchOutput& out, std::span<const Point> pts, const ViProblem& prob,
                 double area) {
  const std::size_t n = pts.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double u = out.u(k);
    sum += 0.5 * (out.u_x(k) * out.u_x(k) + out.u_y(k) * out.u_y(k) + prob.alpha * u * u) -
           prob.source(pts[i].x, pts[i].y) * u;
  }
  return area * sum / static_cast<double>(n);
}

double penalty_from(const Eigen::VectorXd& u, PenaltyForm form) {
  if (u.size() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double neg = std::max(-u(i), 0.0);
    sum += form == PenaltyForm::hinge ? neg : neg * neg;
  }
  return sum / static_cast<double>(u.size());
}

// Residuals -lap_h u + alpha u - f at the stencil centers.
std::vector<double> stencil_residuals(const Eigen::VectorXd& u5, std::span<const Point> pts,
                                      const ViProblem& prob, double h_fd) {
  const double inv_h2 = 1.0 / (h_fd * h_fd);
  std::vector<double> r(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(5 * i);
    const double lap = (u5(c + 1) + u5(c + 2) + u5(c + 3) + u5(c + 4) - 4.0 * u5(c)) * inv_h2;
    r[i] = -lap + prob.alpha * u5(c) - prob.source(pts[i].x, pts[i].y);
  }
  return r;
}

void require_nonempty(std::span<const Point> pts, const char* what) {
  if (pts.empty()) throw std::invalid_argument(std::string(what) + ": empty interior point set");
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {w1, w2, w3, w4}) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("LossWeights: weights must be positive and finite");
    }
  }
}

const char* to_string(InteriorMode m) { return m == InteriorMode::ritz ? "ritz" : "residual"; }

InteriorMode interior_mode_from_string(const std::string& s) {
  if (s == "ritz") return InteriorMode::ritz;
  if (s == "residual") return InteriorMode::residual;
  throw std::invalid_argument("unknown interior mode '" + s + "'");
}

const char* to_string(PenaltyForm f) { return f == PenaltyForm::hinge ? "hinge" : "squared_hinge"; }

PenaltyForm penalty_form_from_string(const std::string& s) {
  if (s == "hinge") return PenaltyForm::hinge;
  if (s == "squared_hinge") return PenaltyForm::squared_hinge;
  throw std::invalid_argument("unknown penalty form '" + s + "'");
}

std::vector<Point> laplacian_stencil(std::span<const Point> pts, double h_fd) {
  std::vector<Point> s;
  s.reserve(5 * pts.size());
  for (const auto& p : pts) {
    s.push_back(p);
    s.push_back({p.x + h_fd, p.y});
    s.push_back({p.x - h_fd, p.y});
    s.push_back({p.x, p.y + h_fd});
    s.push_back({p.x, p.y - h_fd});
  }
  return s;
}

double ritz_energy(const NetworkParams& p, std::span<const Point> interior,
                   const ViProblem& prob, double area) {
  require_nonempty(interior, "ritz_energy");
  return ritz_from(evaluate_batch(p, interior, true), interior, prob, area);
}

double ritz_energy(const BatchOutput& field, std::span<const Point> interior,
                   const ViProblem& prob, double area) {
  require_nonempty(interior, "ritz_energy");
  const auto n = static_cast<Eigen::Index>(interior.size());
  if (field.u.size() != n || field.u_x.size() != n || field.u_y.size() != n) {
    throw std::invalid_argument("ritz_energy: field samples do not match the points");
  }
  return ritz_from(field, interior, prob, area);
}

double residual_loss(const NetworkParams& p, std::span<const Point> interior,
                     const ViProblem& prob, double h_fd) {
  require_nonempty(interior, "residual_loss");
  const auto stencil = laplacian_stencil(interior, h_fd);
  const auto r = stencil_residuals(evaluate_batch(p, stencil, false).u, interior, prob, h_fd);
  double sum = 0.0;
  for (double v : r) sum += v * v;
  return sum / static_cast<double>(r.size());
}

BoundaryTerm boundary_loss(const NetworkParams& p, std::span<const Point> boundary,
                           const ViProblem& prob) {
  if (boundary.empty()) return {};
  const auto u = evaluate_batch(p, boundary, false).u;
  double sum = 0.0;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const double d = u(static_cast<Eigen::Index>(i)) - prob.boundary_value(boundary[i].x, boundary[i].y);
    sum += d * d;
  }
  return {sum / static_cast<double>(boundary.size()), true};
}

double interface_loss(const NetworkParams& p, std::span<const Point> pts,
                      std::span<const double> targets) {
  if (pts.size() != targets.size()) {
    throw std::invalid_argument("interface_loss: point and target counts differ");
  }
  if (pts.empty()) return 0.0;
  const auto u = evaluate_batch(p, pts, false).u;
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = u(static_cast<Eigen::Index>(i)) - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pts.size());
}

double positivity_penalty(const NetworkParams& p, std::span<const Point> interior,
                          PenaltyForm form) {
  require_nonempty(interior, "positivity_penalty");
  return penalty_from(evaluate_batch(p, interior, false).u, form);
}

LossBreakdown total_loss(const LossWeights& w, double interior, double boundary,
                         double interface, double penalty) {
  for (double v : {interior, boundary, interface, penalty}) {
    if (!std::isfinite(v)) throw std::invalid_argument("total_loss: non-finite component");
  }
  LossBreakdown b{interior, boundary, interface, penalty, 0.0};
  b.total = w.w1 * interior + w.w2 * boundary + w.w3 * interface + w.w4 * penalty;
  return b;
}

LossBreakdown evaluate_loss(const NetworkParams& p, const LossData& data,
                            const ViProblem& prob, const LossWeights& w,
                            const LossOptions& opt) {
  require_nonempty(data.interior, "evaluate_loss");
  double interior = 0.0;
  double penalty = 0.0;
  if (opt.interior_mode == InteriorMode::ritz) {
    const auto out = evaluate_batch(p, data.interior, true);
    interior = ritz_from(out, data.interior, prob, data.area);
    penalty = penalty_from(out.u, opt.penalty);
  } else {
    interior = residual_loss(p, data.interior, prob, opt.h_fd);
    penalty = positivity_penalty(p, data.interior, opt.penalty);
  }
  const double boundary = boundary_loss(p, data.boundary, prob).value;
  const double interface = interface_loss(p, data.interface, data.interface_targets);
  check_finite("interior", interior);
  check_finite("boundary", boundary);
  check_finite("interface", interface);
  check_finite("penalty", penalty);
  return total_loss(w, interior, boundary, interface, penalty);
}

LossGradient loss_gradient(const NetworkParams& p, const LossData& data,
                           const ViProblem& prob, const LossWeights& w,
                           const LossOptions& opt) {
  require_nonempty(data.interior, "loss_gradient");
  if (data.interface.size() != data.interface_targets.size()) {
    throw std::invalid_argument("loss_gradient: interface point and target counts differ");
  }
  LossBreakdown b;
  auto closure = [&](GradientTape& tape) {
    const std::size_t nf = data.interior.size();
    const double inv_nf = 1.0 / static_cast<double>(nf);

    // Interior term plus the positivity penalty, which shares the interior points.
    TapeBatch* pen_batch = nullptr;
    Eigen::Index pen_stride = 1;
    if (opt.interior_mode == InteriorMode::ritz) {
      auto& tb = tape.record(data.interior, true);
      b.interior = ritz_from({tb.u(), tb.u_x(), tb.u_y()}, data.interior, prob, data.area);
      const double s = w.w1 * data.area * inv_nf;
      for (std::size_t i = 0; i < nf; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        tb.seed_u_x(k) = s * tb.u_x()(k);
        tb.seed_u_y(k) = s * tb.u_y()(k);
        tb.seed_u(k) = s * (prob.alpha * tb.u()(k) - prob.source(data.interior[i].x, data.interior[i].y));
      }
      pen_batch = &tb;
    } else {
      const auto stencil = laplacian_stencil(data.interior, opt.h_fd);
      auto& tb = tape.record(stencil, false);
      const auto r = stencil_residuals(tb.u(), data.interior, prob, opt.h_fd);
      const double inv_h2 = 1.0 / (opt.h_fd * opt.h_fd);
      double sum = 0.0;
      for (std::size_t i = 0; i < nf; ++i) {
        sum += r[i] * r[i];
        const double g = w.w1 * 2.0 * r[i] * inv_nf;
        const auto c = static_cast<Eigen::Index>(5 * i);
        tb.seed_u(c) += g * (4.0 * inv_h2 + prob.alpha);
        for (Eigen::Index j = 1; j <= 4; ++j) tb.seed_u(c + j) += -g * inv_h2;
      }
      b.interior = sum * inv_nf;
      pen_batch = &tb;
      pen_stride = 5;
    }
    check_finite("interior", b.interior);

    {
      auto& tb = *pen_batch;
      double sum = 0.0;
      for (std::size_t i = 0; i < nf; ++i) {
        const auto k = static_cast<Eigen::Index>(i) * pen_stride;
        const double neg = std::max(-tb.u()(k), 0.0);
        if (opt.penalty == PenaltyForm::hinge) {
          sum += neg;
          if (tb.u()(k) < 0.0) tb.seed_u(k) += -w.w4 * inv_nf;
        } else {
          sum += neg * neg;
          tb.seed_u(k) += -2.0 * w.w4 * neg * inv_nf;
        }
      }
      b.penalty = sum * inv_nf;
      check_finite("penalty", b.penalty);
    }

    b.boundary = 0.0;
    if (!data.boundary.empty()) {
      auto& tb = tape.record(data.boundary, false);
      const double inv_n = 1.0 / static_cast<double>(data.boundary.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < data.boundary.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double d = tb.u()(k) - prob.boundary_value(data.boundary[i].x, data.boundary[i].y);
        sum += d * d;
        tb.seed_u(k) = 2.0 * w.w2 * d * inv_n;
      }
      b.boundary = sum * inv_n;
      check_finite("boundary", b.boundary);
    }

    b.interface = 0.0;
    if (!data.interface.empty()) {
      auto& tb = tape.record(data.interface, false);
      const double inv_n = 1.0 / static_cast<double>(data.interface.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < data.interface.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double d = tb.u()(k) - data.interface_targets[i];
        sum += d * d;
        tb.seed_u(k) = 2.0 * w.w3 * d * inv_n;
      }
      b.interface = sum * inv_n;
      check_finite("interface", b.interface);
    }

    b = total_loss(w, b.interior, b.boundary, b.interface, b.penalty);
    return b.total;
  };
  auto lg = param_gradient(p, closure);
  return {b, std::move(lg.gradient)};
}

std::vector<double> complementarity_indicator(const NetworkParams& p,
                                              std::span<const Point> pts,
                                              const ViProblem& prob, double h_fd) {
  if (pts.empty()) return {};
  const auto stencil = laplacian_stencil(pts, h_fd);
  const auto u5 = evaluate_batch(p, stencil, false).u;
  const auto r = stencil_residuals(u5, pts, prob, h_fd);
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double u = u5(static_cast<Eigen::Index>(5 * i));
    out[i] = std::abs(std::min(u, r[i])) + std::max(-u, 0.0);
  }
  return out;
}

}  // namespace ddvi
