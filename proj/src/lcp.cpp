#include "ddvi/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ddvi {

std::vector<double> LcpSystem::apply(const std::vector<double>& u) const {
  const std::size_t n = grid_n;
  std::vector<double> y(n * n);
  const double d = diagonal(), ox = off_x(), oy = off_y();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = j * n + i;
      double s = d * u[k];
      if (i > 0) s += ox * u[k - 1];
      if (i + 1 < n) s += ox * u[k + 1];
      if (j > 0) s += oy * u[k - n];
      if (j + 1 < n) s += oy * u[k + n];
      y[k] = s;
    }
  }
  return y;
}

Eigen::MatrixXd LcpSystem::to_dense() const {
  const std::size_t n = grid_n;
  const auto m = static_cast<Eigen::Index>(n * n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(j * n + i);
      const auto ni = static_cast<Eigen::Index>(n);
      a(k, k) = diagonal();
      if (i > 0) a(k, k - 1) = off_x();
      if (i + 1 < n) a(k, k + 1) = off_x();
      if (j > 0) a(k, k - ni) = off_y();
      if (j + 1 < n) a(k, k + ni) = off_y();
    }
  }
  return a;
}

LcpSystem assemble_lcp(const ViProblem& prob, std::size_t grid_n) {
  prob.validate();
  if (grid_n < 2) throw std::invalid_argument("assemble_lcp: grid_n must be >= 2");
  LcpSystem s;
  s.grid_n = grid_n;
  s.domain = prob.domain;
  s.alpha = prob.alpha;
  s.h_x = prob.domain.width() / static_cast<double>(grid_n + 1);
  s.h_y = prob.domain.height() / static_cast<double>(grid_n + 1);
  s.b.resize(grid_n * grid_n);
  const auto xs = [&](std::size_t i) { return prob.domain.x_min + static_cast<double>(i) * s.h_x; };
  const auto ys = [&](std::size_t j) { return prob.domain.y_min + static_cast<double>(j) * s.h_y; };
  const double cx = 1.0 / (s.h_x * s.h_x), cy = 1.0 / (s.h_y * s.h_y);
  for (std::size_t j = 1; j <= grid_n; ++j) {
    for (std::size_t i = 1; i <= grid_n; ++i) {
      double v = prob.source(xs(i), ys(j));
      if (i == 1) v += cx * prob.boundary_value(xs(0), ys(j));
      if (i == grid_n) v += cx * prob.boundary_value(xs(grid_n + 1), ys(j));
      if (j == 1) v += cy * prob.boundary_value(xs(i), ys(0));
      if (j == grid_n) v += cy * prob.boundary_value(xs(i), ys(grid_n + 1));
      s.b[(j - 1) * grid_n + (i - 1)] = v;
    }
  }
  return s;
}

double GridField::x(std::size_t i) const {
  return domain.x_min + domain.width() * static_cast<double>(i) / static_cast<double>(nodes - 1);
}

double GridField::y(std::size_t j) const {
  return domain.y_min + domain.height() * static_cast<double>(j) / static_cast<double>(nodes - 1);
}

std::vector<double> GridField::interior() const {
  const std::size_t n = nodes - 2;
  std::vector<double> out(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) out[j * n + i] = at(i + 1, j + 1);
  return out;
}

PsorNotConverged::PsorNotConverged(std::size_t sweeps, double last_change)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "projected SOR did not converge in " << sweeps << " sweeps (last max change "
           << last_change << ")";
        return os.str();
      }()),
      sweeps_(sweeps),
      last_change_(last_change) {}

GridField psor_solve(const LcpSystem& sys, const PsorOptions& opt, std::size_t* sweeps_used) {
  if (!(opt.omega > 0.0 && opt.omega < 2.0)) {
    throw std::invalid_argument("psor_solve: omega must lie in (0, 2)");
  }
  const std::size_t n = sys.grid_n;
  std::vector<double> u(n * n, 0.0);
  const double d = sys.diagonal(), ox = sys.off_x(), oy = sys.off_y();
  const double w_over_d = opt.omega / d;

  double change = 0.0;
  std::size_t sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = j * n + i;
        double s = d * u[k];
        if (i > 0) s += ox * u[k - 1];
        if (i + 1 < n) s += ox * u[k + 1];
        if (j > 0) s += oy * u[k - n];
        if (j + 1 < n) s += oy * u[k + n];
        const double next = std::max(0.0, u[k] + w_over_d * (sys.b[k] - s));
        change = std::max(change, std::abs(next - u[k]));
        u[k] = next;
      }
    }
    if (change < opt.tol) break;
  }
  if (sweep == opt.max_sweeps) throw PsorNotConverged(sweep, change);
  if (sweeps_used) *sweeps_used = sweep + 1;

  GridField f;
  f.nodes = n + 2;
  f.domain = sys.domain;
  f.values.assign(f.nodes * f.nodes, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) f.values[(j + 1) * f.nodes + (i + 1)] = u[j * n + i];
  return f;
}

std::vector<double> psor_solve_dense(const Eigen::MatrixXd& a, const std::vector<double>& b,
                                     const PsorOptions& opt) {
  const auto m = a.rows();
  if (a.cols() != m || static_cast<Eigen::Index>(b.size()) != m) {
    throw std::invalid_argument("psor_solve_dense: dimension mismatch");
  }
  std::vector<double> u(b.size(), 0.0);
  double change = 0.0;
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    change = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < m; ++c) s += a(k, c) * u[static_cast<std::size_t>(c)];
      auto& uk = u[static_cast<std::size_t>(k)];
      const double next = std::max(0.0, uk + opt.omega * (b[static_cast<std::size_t>(k)] - s) / a(k, k));
      change = std::max(change, std::abs(next - uk));
      uk = next;
    }
    if (change < opt.tol) return u;
  }
  throw PsorNotConverged(opt.max_sweeps, change);
}

double ComplementarityDiagnostics::worst() const {
  return std::max({obstacle_violation, residual_negativity, complementarity});
}

ComplementarityDiagnostics complementarity_diagnostics(const LcpSystem& sys,
                                                       const std::vector<double>& u) {
  const auto au = sys.apply(u);
  ComplementarityDiagnostics d;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = au[k] - sys.b[k];
    d.obstacle_violation = std::max(d.obstacle_violation, -u[k]);
    d.residual_negativity = std::max(d.residual_negativity, -r);
    d.complementarity = std::max(d.complementarity, std::abs(u[k] * r));
  }
  return d;
}

double discrete_energy(const LcpSystem& sys, const std::vector<double>& u) {
  const auto au = sys.apply(u);
  double e = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) e += 0.5 * u[k] * au[k] - sys.b[k] * u[k];
  return e * sys.h_x * sys.h_y;
}

double analytic_candidate(double x, double y) {
  constexpr double pi = std::numbers::pi;
  return std::max(std::sin(pi * x) * std::sin(pi * y), 0.0);
}

void gauss_legendre(std::size_t order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  const auto n = static_cast<double>(order);
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  for (std::size_t i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const auto kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

double quadrature_energy(const EnergyIntegrand& fn, const ViProblem& prob, const Rect& rect,
                         std::size_t order) {
  if (order < 2) throw std::invalid_argument("quadrature_energy: order must be >= 2");
  std::vector<double> t, w;
  gauss_legendre(order, t, w);
  const double hx = 0.5 * rect.width(), hy = 0.5 * rect.height();
  const double cx = rect.x_min + hx, cy = rect.y_min + hy;
  double sum = 0.0;
  for (std::size_t j = 0; j < order; ++j) {
    const double y = cy + hy * t[j];
    for (std::size_t i = 0; i < order; ++i) {
      const double x = cx + hx * t[i];
      const auto s = fn(x, y);
      const double dens = 0.5 * (s.u_x * s.u_x + s.u_y * s.u_y + prob.alpha * s.u * s.u) -
                          prob.source(x, y) * s.u;
      sum += w[i] * w[j] * dens;
    }
  }
  return sum * hx * hy;
}

}  // namespace ddvi
