#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddvi/problem.hpp"

namespace ddvi {

class ZeroReferenceNorm : public std::domain_error {
 public:
  ZeroReferenceNorm()
      : std::domain_error("relative L2 error is undefined for a zero-norm reference") {}
};

struct ErrorReport {
  double mse = 0.0;
  double mae = 0.0;
  /// Empty when the reference has zero norm.
  std::optional<double> rel_l2;
  double max_err = 0.0;
  std::size_t n_samples = 0;
  std::string reference_tag;

  /// Throws ZeroReferenceNorm when undefined.
  double relative_l2() const;
};

/// mse = mean (y - yhat)^2, mae = mean |y - yhat|, rel_l2 = |y - yhat|_2 / |y|_2,
/// max_err = max |y - yhat|.
ErrorReport compute_metrics(std::span<const double> y, std::span<const double> yhat,
                            std::string reference_tag = {});

struct GridSamples {
  std::vector<Point> points;
  std::vector<double> values;
};

/// Uniform n x n grid over rect including its edges; y outer, x inner.
GridSamples sample_on_grid(const std::function<double(Point)>& solution, const Rect& rect,
                           std::size_t n);

/// One header row plus one data row.
void write_report_csv(std::ostream& os, const ErrorReport& r);

}  // namespace ddvi
