#pragma once

#include <optional>
#include <string>

#include "anderson/geometry.hpp"
#include "anderson/paths.hpp"

namespace anderson {

// A subset of [0,t]^2 over which a local time is integrated.
//   Triangle   [0,t]^2_<=            (a = 0, b = t)
//   DiagBlock  [a,b]^2_<=
//   Rect       [a,b] x [c,d], b <= c
struct TimeRegion {
  enum class Kind { Triangle, DiagBlock, Rect };

  Kind kind = Kind::Triangle;
  double a = 0.0, b = 1.0, c = 0.0, d = 0.0;

  static TimeRegion triangle(double t) { return {Kind::Triangle, 0.0, t, 0.0, 0.0}; }
  static TimeRegion diag_block(double a, double b) { return {Kind::DiagBlock, a, b, 0.0, 0.0}; }
  static TimeRegion rect(double a, double b, double c, double d) {
    return {Kind::Rect, a, b, c, d};
  }

  bool is_diagonal() const { return kind != Kind::Rect; }
  double area() const;
  // Throws unless 0 <= a <= b (<= c <= d) <= t.
  void validate(double t) const;
  std::string describe() const;
};

struct LocalTimeValue {
  double epsilon = 0.0;
  TimeRegion region;
  double raw = 0.0;
  double exact_mean = 0.0;
  double renormalized = 0.0;  // raw - exact_mean
};

// e^{-|v|^2 / 2 eps} / (2 pi eps)
double gaussian_kernel(double eps, Point2 v);

// Resolution rule for the trapezoidal local-time quadrature: dt <= eps / 10.
bool resolution_ok(double dt, double eps);
// Emits a warning through the diagnostics sink when the rule is violated.
void check_resolution(double dt, double eps);

// Trapezoidal quadrature of p_eps(Z(r1) - Z(r2)) over the region. Region
// endpoints must lie on the path's time grid. With truncation, pairs with
// |Z_i - Z_j|^2 > 40 eps are skipped using a cell list of cell size
// sqrt(40 eps).
double approx_silt(const DiscretePath& path, double eps, const TimeRegion& region,
                   bool truncation = true);

// Full-square trapezoidal mutual intersection local time. Symmetric in its
// arguments bit for bit.
double approx_milt(const DiscretePath& path1, const DiscretePath& path2, double eps,
                   bool truncation = true);

// Exact E[beta^eps_region] for a motion or bridge with horizon t. Without
// n_steps this is the continuum integral; with n_steps it is the grid-matched
// trapezoidal sum that approx_silt has as its exact expectation.
double silt_mean_exact(PathKind kind, double t, double eps, const TimeRegion& region,
                       std::optional<int> n_steps = std::nullopt);
double silt_mean_motion_exact(double t, double eps, const TimeRegion& region,
                              std::optional<int> n_steps = std::nullopt);
double silt_mean_bridge_exact(double t, double eps, const TimeRegion& region,
                              std::optional<int> n_steps = std::nullopt);

// Small-eps expansion of the SILT mean (diagonal blocks for both kinds,
// off-diagonal rectangles for bridges).
double silt_mean_asymptotic(PathKind kind, double t, double eps, const TimeRegion& region);

LocalTimeValue renormalized_silt(const DiscretePath& path, double eps,
                                 bool truncation = true);
// Same, with the grid-matched mean supplied by the caller (hot loops).
LocalTimeValue renormalized_silt(const DiscretePath& path, double eps,
                                 double exact_mean, bool truncation = true);

// E[alpha^eps_t] for two independent paths of the given kind started at the
// same point.
double milt_mean_exact(PathKind kind, double t, double eps,
                       std::optional<int> n_steps = std::nullopt);
double milt_mean_bridge_exact(double t, double eps,
                              std::optional<int> n_steps = std::nullopt);

// kappa^2 / (2 pi) * log(1 / eps)
double renorm_constant(double kappa, double eps);

}  // namespace anderson
