#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anderson/geometry.hpp"

namespace anderson {

struct SpectralMode {
  double lambda = 0.0;      // Dirichlet eigenvalue of -1/2 Laplacian
  double overlap_sq = 0.0;  // <psi, 1_D>^2
};

// Truncated Dirichlet eigendata. The omitted modes (lambda > cutoff)
// contribute at most tail_bound to the heat trace for every t >= min_t, using
// the Polya bound N(lambda) <= A lambda / 2 pi on the counting function.
struct SpectralModel {
  std::string domain_tag;
  double area = 0.0;
  std::vector<SpectralMode> modes;  // ascending lambda
  double cutoff_lambda = 0.0;
  double tail_bound = 0.0;
  double min_t = 0.0;
};

inline constexpr double kSpectralTailTolerance = 1e-10;

// Bound on sum_{lambda > cutoff} e^{-t lambda} for a domain of the given area.
double weyl_tail_bound(double area, double cutoff, double t);
// Smallest cutoff whose tail bound at t_min is below tolerance.
double cutoff_for(double area, double t_min, double tolerance = kSpectralTailTolerance);

SpectralModel rectangle_model(double a, double b, double cutoff_lambda);

// Largest Bessel argument covered by the zero tables; disk cutoffs beyond
// this (lambda > j_max^2 / 2R^2) are rejected.
inline constexpr double kMaxBesselArgument = 1500.0;

SpectralModel disk_model(double radius, double cutoff_lambda);

// Zeros of J_nu below x_max for nu = 0, 1, ...; zeros[nu][k] = j_{nu,k+1}.
std::vector<std::vector<double>> bessel_zeros(double x_max);

// Overlap <psi_{0k}, 1_D>^2 of the k-th radial disk mode by direct polar
// quadrature of the normalised eigenfunction (no Bessel integral identities).
double disk_overlap_by_quadrature(double radius, double bessel_zero);

// Model for rectangle or disk domains certified down to t_min; nullopt for
// polygons, which have no closed-form spectrum.
std::optional<SpectralModel> spectral_model_for(const PlanarDomain& domain, double t_min);

double heat_trace(const SpectralModel& model, double t);
double heat_content(const SpectralModel& model, double t);

// A / (2 pi t) - L / (4 sqrt(2 pi)) t^{-1/2}
double smooth_trace_asymptotic(double area, double length, double t);
// A - sqrt(2) L / sqrt(pi) t^{1/2} + pi chi / 2 t
double content_asymptotic(double area, double length, double euler_char, double t);
// Constant term of the polygon heat trace: sum over interior angles of
// (pi^2 - theta^2) / (24 pi theta).
double corner_constant(std::span<const double> interior_angles);

// CSV with header line "# domain=..., cutoff=..., tail_bound=..., min_t=...,
// area=..." followed by "lambda,overlap_sq" rows.
void save_model_csv(const SpectralModel& model, std::ostream& os);
SpectralModel load_model_csv(std::istream& is);

}  // namespace anderson
