#include "ddvi/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ddvi/csv.hpp"

namespace ddvi {

double ErrorReport::relative_l2() const {
  if (!rel_l2) throw ZeroReferenceNorm();
  return *rel_l2;
}

ErrorReport compute_metrics(std::span<const double> y, std::span<const double> yhat,
                            std::string reference_tag) {
  if (y.size() != yhat.size()) throw std::invalid_argument("compute_metrics: length mismatch");
  if (y.empty()) throw std::invalid_argument("compute_metrics: no samples");
  ErrorReport r;
  r.n_samples = y.size();
  r.reference_tag = std::move(reference_tag);
  double sq = 0.0, ab = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - yhat[i];
    sq += e * e;
    ab += std::abs(e);
    ref += y[i] * y[i];
    r.max_err = std::max(r.max_err, std::abs(e));
  }
  const auto n = static_cast<double>(y.size());
  r.mse = sq / n;
  r.mae = ab / n;
  if (ref > 0.0) r.rel_l2 = std::sqrt(sq) / std::sqrt(ref);
  return r;
}

GridSamples sample_on_grid(const std::function<double(Point)>& solution, const Rect& rect,
                           std::size_t n) {
  if (n < 2) throw std::invalid_argument("sample_on_grid: need at least 2 nodes per axis");
  GridSamples g;
  g.points.reserve(n * n);
  const double dn = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = j + 1 == n ? rect.y_max : rect.y_min + rect.height() * static_cast<double>(j) / dn;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = i + 1 == n ? rect.x_max : rect.x_min + rect.width() * static_cast<double>(i) / dn;
      g.points.push_back({x, y});
    }
  }
  g.values.reserve(g.points.size());
  for (const auto& p : g.points) g.values.push_back(solution(p));
  return g;
}

void write_report_csv(std::ostream& os, const ErrorReport& r) {
  os << "mse,mae,rel_l2,max_err,n_samples,reference_tag\n";
  os << csv::real(r.mse) << ',' << csv::real(r.mae) << ','
     << (r.rel_l2 ? csv::real(*r.rel_l2) : std::string("nan")) << ',' << csv::real(r.max_err) << ','
     << r.n_samples << ',' << csv::field(r.reference_tag) << '\n';
}

}  // namespace ddvi
