#pragma once

#include <span>
#include <vector>

namespace anderson {

struct SeriesPoint {
  double t = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct RecoveryEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

struct PointwiseEstimate {
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

// 2 pi t T(t) at the smallest t.
RecoveryEstimate recover_area(std::span<const SeriesPoint> series);

// 4 sqrt(2 pi t) (A / (2 pi t) - T(t)) at the smallest t.
RecoveryEstimate recover_perimeter(std::span<const SeriesPoint> series, double area);

struct Kappa2Recovery {
  std::vector<PointwiseEstimate> pointwise;  // ascending t
  RecoveryEstimate headline;                 // value at the smallest t
};

// 4 pi^2 (T_kappa(t) - T_0(t)) / (A log t) on a shared t grid with t < 1.
// Standard errors of the two series are combined as independent.
Kappa2Recovery recover_kappa2(std::span<const SeriesPoint> series_kappa,
                              std::span<const SeriesPoint> series_zero, double area);

struct MinkowskiRecovery {
  std::vector<PointwiseEstimate> pointwise;  // 2 - 2 log(A - M) / log t
  double slope = 0.0;                        // of log(A - M) against log t
  double regression_dimension = 0.0;         // 2 - 2 slope
};

MinkowskiRecovery recover_minkowski(std::span<const SeriesPoint> series_mass, double area);

}  // namespace anderson
