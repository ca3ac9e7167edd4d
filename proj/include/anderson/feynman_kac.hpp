#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "anderson/geometry.hpp"
#include "anderson/paths.hpp"
#include "anderson/spectral.hpp"

namespace anderson {

enum class MomentTarget { TraceMean, MassMean, TraceVariance, MassVariance };

const char* to_string(MomentTarget target);

struct FkConfig {
  double eps = 1e-4;
  int n_steps = 512;
  std::size_t n_outer = 10'000;   // sampled starting points (pairs for variances)
  int n_paths_per_x = 1;
  bool exit_correction = true;
  bool kernel_truncation = true;
  std::uint64_t seed = 1;
  // Samples whose exponent kappa^2 * (...) exceeds this are counted as
  // overflow events (still included, never clipped).
  double exponent_cap = 30.0;
  unsigned workers = 1;  // does not affect results

  // Throws on invalid values. The estimators additionally warn when
  // t / n_steps > eps / 10.
  void validate() const;
};

// eps = max(rel * t, 10 * t / n_steps): the relative default, raised where
// needed to satisfy the local-time resolution rule.
double default_eps(double t, int n_steps, double rel = 1e-3);

struct MomentEstimate {
  MomentTarget target = MomentTarget::TraceMean;
  double t = 0.0;
  double kappa = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_outer = 0;
  int n_paths_per_x = 1;
  double eps = 0.0;
  int n_steps = 0;
  double prefactor = 1.0;
  std::string config_fingerprint;
  std::size_t overflow_count = 0;
  double survival_fraction = 0.0;  // fraction of surviving paths (pairs)
  bool control_variate = false;
};

// bridge: e^{m kappa^2 t log t / 2 pi}; motion: e^{m kappa^2 (t log t - t) / 2 pi}
double moment_prefactor(double kappa, double t, int m, PathKind kind);

// prefactor * A / (2 pi t) * E_x[ 1{survive} e^{kappa^2 gamma_t(B^{x,x}_t)} ].
// With a spectral model the kappa = 0 survival part is replaced by its exact
// value 2 pi t T_0(t) / A and only E[1{survive} (e^{kappa^2 gamma} - 1)] is
// sampled.
MomentEstimate estimate_trace_mean(const PlanarDomain& domain, double kappa, double t,
                                   const FkConfig& cfg,
                                   const SpectralModel* model = nullptr);

// prefactor * A * E_x[ 1{survive} e^{kappa^2 gamma_t(B^x)} ], same control
// variate with M_0(t).
MomentEstimate estimate_mass_mean(const PlanarDomain& domain, double kappa, double t,
                                  const FkConfig& cfg, const SpectralModel* model = nullptr);

// prefactor_2 * A^2 / (2 pi t)^2 * E[ 1 1 e^{kappa^2 (gamma_1 + gamma_2)}
//   (e^{kappa^2 alpha_t} - 1) ] over independent uniform starting points and
// independent bridges.
MomentEstimate estimate_trace_variance(const PlanarDomain& domain, double kappa, double t,
                                       const FkConfig& cfg);
MomentEstimate estimate_mass_variance(const PlanarDomain& domain, double kappa, double t,
                                      const FkConfig& cfg);

// FNV-1a over a canonical description of the estimator inputs, as 16 hex digits.
std::string fingerprint(const std::string& canonical);

}  // namespace anderson
