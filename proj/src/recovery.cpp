#include "anderson/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "anderson/error.hpp"

namespace anderson {
namespace {

constexpr double kPi = std::numbers::pi;

void check_series(std::span<const SeriesPoint> series) {
  require(!series.empty(), "recovery: empty series");
  std::vector<double> ts;
  for (const auto& p : series) {
    require(p.t > 0.0 && std::isfinite(p.value) && p.std_error >= 0.0,
            "recovery: series points need t > 0, finite value and std_error >= 0");
    ts.push_back(p.t);
  }
  std::sort(ts.begin(), ts.end());
  require(std::adjacent_find(ts.begin(), ts.end()) == ts.end(),
          "recovery: series t values must be distinct");
}

const SeriesPoint& smallest_t(std::span<const SeriesPoint> series) {
  return *std::min_element(series.begin(), series.end(),
                           [](const SeriesPoint& a, const SeriesPoint& b) { return a.t < b.t; });
}

std::vector<SeriesPoint> sorted(std::span<const SeriesPoint> s) {
  std::vector<SeriesPoint> v(s.begin(), s.end());
  std::sort(v.begin(), v.end(), [](const SeriesPoint& a, const SeriesPoint& b) { return a.t < b.t; });
  return v;
}

}  // namespace

RecoveryEstimate recover_area(std::span<const SeriesPoint> series) {
  check_series(series);
  const SeriesPoint& p = smallest_t(series);
  const double factor = 2.0 * kPi * p.t;
  return {factor * p.value, factor * p.std_error};
}

RecoveryEstimate recover_perimeter(std::span<const SeriesPoint> series, double area) {
  check_series(series);
  require(area > 0.0, "recover_perimeter: area must be positive");
  const SeriesPoint& p = smallest_t(series);
  const double factor = 4.0 * std::sqrt(2.0 * kPi * p.t);
  return {factor * (area / (2.0 * kPi * p.t) - p.value), factor * p.std_error};
}

Kappa2Recovery recover_kappa2(std::span<const SeriesPoint> series_kappa,
                              std::span<const SeriesPoint> series_zero, double area) {
  check_series(series_kappa);
  check_series(series_zero);
  require(area > 0.0, "recover_kappa2: area must be positive");
  require(series_kappa.size() == series_zero.size(),
          "recover_kappa2: series must share the same t grid");
  const auto kap = sorted(series_kappa);
  const auto zero = sorted(series_zero);
  Kappa2Recovery out;
  for (std::size_t i = 0; i < kap.size(); ++i) {
    require(kap[i].t == zero[i].t, "recover_kappa2: series must share the same t grid");
    require(kap[i].t < 1.0, "recover_kappa2: every t must be below 1 (log t < 0)");
    const double factor = 4.0 * kPi * kPi / (area * std::log(kap[i].t));
    out.pointwise.push_back(
        {kap[i].t, factor * (kap[i].value - zero[i].value),
         std::abs(factor) * std::hypot(kap[i].std_error, zero[i].std_error)});
  }
  out.headline = {out.pointwise.front().estimate, out.pointwise.front().std_error};
  return out;
}

MinkowskiRecovery recover_minkowski(std::span<const SeriesPoint> series_mass, double area) {
  check_series(series_mass);
  require(area > 0.0, "recover_minkowski: area must be positive");
  const auto pts = sorted(series_mass);
  MinkowskiRecovery out;
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    const double deficit = area - p.value;
    if (!(deficit > 0.0))
      fail(ErrorCode::InvalidArgument,
           "recover_minkowski: A - M(t) <= 0 at t=" + std::to_string(p.t) + " (undersampled mass)");
    require(p.t != 1.0, "recover_minkowski: t = 1 has log t = 0");
    const double lt = std::log(p.t);
    // d(t) = 2 - 2 log(A - M) / log t; delta method in M.
    out.pointwise.push_back({p.t, 2.0 - 2.0 * std::log(deficit) / lt,
                             std::abs(2.0 / (lt * deficit)) * p.std_error});
    sx += lt;
    sy += std::log(deficit);
  }
  if (pts.size() >= 2) {
    const double n = double(pts.size());
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (const auto& p : pts) {
      const double dx = std::log(p.t) - mx;
      sxy += dx * (std::log(area - p.value) - my);
      sxx += dx * dx;
    }
    out.slope = sxy / sxx;
    out.regression_dimension = 2.0 - 2.0 * out.slope;
  } else {
    out.slope = NAN;
    out.regression_dimension = NAN;
  }
  return out;
}

}  // namespace anderson
