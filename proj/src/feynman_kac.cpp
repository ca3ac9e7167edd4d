#include "anderson/feynman_kac.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <vector>

#include "anderson/error.hpp"
#include "anderson/local_times.hpp"
#include "anderson/parallel.hpp"
#include "anderson/rng.hpp"

namespace anderson {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SampleOutcome {
  double y = 0.0;
  std::uint32_t overflow = 0;
  std::uint32_t survived = 0;  // surviving paths (pairs)
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Salt separating the streams of different estimators and horizons under one
// master seed. Kappa is deliberately excluded: estimates at several kappa
// share paths (common random numbers).
std::uint32_t stream_salt(MomentTarget target, double t) {
  std::uint64_t bits;
  std::memcpy(&bits, &t, sizeof t);
  std::ostringstream os;
  os << to_string(target) << ':' << bits;
  const std::uint64_t h = fnv1a(os.str());
  return std::uint32_t(h ^ (h >> 32));
}

std::string canonical(const PlanarDomain& domain, MomentTarget target, double kappa, double t,
                      const FkConfig& cfg, bool cv) {
  std::ostringstream os;
  os.precision(17);
  os << "target=" << to_string(target) << ";domain=" << domain.describe() << ";t=" << t
     << ";kappa=" << kappa << ";eps=" << cfg.eps << ";n_steps=" << cfg.n_steps
     << ";n_outer=" << cfg.n_outer << ";n_paths=" << cfg.n_paths_per_x
     << ";correction=" << cfg.exit_correction << ";truncation=" << cfg.kernel_truncation
     << ";cap=" << cfg.exponent_cap << ";seed=" << cfg.seed << ";cv=" << cv;
  return os.str();
}

struct Reduced {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t overflow = 0;
  double survival_fraction = 0.0;
};

Reduced reduce(const std::vector<SampleOutcome>& samples, int per_sample) {
  CompensatedSum sum, sum_sq, survived;
  std::size_t overflow = 0;
  for (const auto& s : samples) {
    sum.add(s.y);
    overflow += s.overflow;
    survived.add(double(s.survived));
  }
  const double n = double(samples.size());
  Reduced r;
  r.mean = sum.value() / n;
  for (const auto& s : samples) sum_sq.add((s.y - r.mean) * (s.y - r.mean));
  r.std_error = samples.size() > 1 ? std::sqrt(sum_sq.value() / (n - 1.0) / n) : 0.0;
  r.overflow = overflow;
  r.survival_fraction = survived.value() / (n * double(per_sample));
  return r;
}

template <class PerIndex>
std::vector<SampleOutcome> run_samples(const FkConfig& cfg, PerIndex&& per_index) {
  std::vector<SampleOutcome> out(cfg.n_outer);
  parallel_ranges(cfg.n_outer, cfg.workers, [&](std::size_t begin, std::size_t end) {
    DiscretePath scratch1, scratch2;
    for (std::size_t i = begin; i < end; ++i) out[i] = per_index(i, scratch1, scratch2);
  });
  return out;
}

void sample_path(DiscretePath& out, PathKind kind, Point2 x, double t, int n, RandomStream& rng) {
  if (kind == PathKind::Bridge)
    sample_bridge(out, x, t, n, rng);
  else
    sample_motion(out, x, t, n, rng);
}

MomentEstimate estimate_mean(MomentTarget target, const PlanarDomain& domain, double kappa,
                             double t, const FkConfig& cfg, const SpectralModel* model) {
  require(t > 0.0, "estimate: t must be positive");
  cfg.validate();
  const PathKind kind = target == MomentTarget::TraceMean ? PathKind::Bridge : PathKind::Motion;
  const bool cv = model != nullptr;
  const double k2 = kappa * kappa;
  if (k2 > 0.0) check_resolution(t / double(cfg.n_steps), cfg.eps);
  const double area = domain.area();
  // value = prefactor * scale * (base + E[y])
  const double scale = kind == PathKind::Bridge ? area / (kTwoPi * t) : area;
  double base = 0.0;
  if (cv) {
    base = kind == PathKind::Bridge ? heat_trace(*model, t) / scale
                                    : heat_content(*model, t) / scale;
  }

  MomentEstimate est;
  est.target = target;
  est.t = t;
  est.kappa = kappa;
  est.n_outer = cfg.n_outer;
  est.n_paths_per_x = cfg.n_paths_per_x;
  est.eps = cfg.eps;
  est.n_steps = cfg.n_steps;
  est.prefactor = moment_prefactor(kappa, t, 1, kind);
  est.config_fingerprint = fingerprint(canonical(domain, target, kappa, t, cfg, cv));
  est.control_variate = cv;

  if (cv && k2 == 0.0) {
    // Sampled correction is identically zero.
    est.value = est.prefactor * scale * base;
    est.std_error = 0.0;
    est.survival_fraction = base;
    return est;
  }

  const double silt_mean = k2 > 0.0 ? silt_mean_exact(kind, t, cfg.eps, TimeRegion::triangle(t),
                                                      cfg.n_steps)
                                    : 0.0;
  const std::uint32_t salt = stream_salt(target, t);
  const auto samples = run_samples(cfg, [&](std::size_t i, DiscretePath& path, DiscretePath&) {
    RandomStream rng = RandomStream::derive(cfg.seed, i, salt);
    const Point2 x = domain.sample_uniform(rng);
    SampleOutcome s;
    double acc = 0.0;
    for (int p = 0; p < cfg.n_paths_per_x; ++p) {
      sample_path(path, kind, x, t, cfg.n_steps, rng);
      if (!survives(path, domain, cfg.exit_correction, rng).survived) continue;
      ++s.survived;
      double weight = cv ? 0.0 : 1.0;
      if (k2 > 0.0) {
        const double exponent =
            k2 * renormalized_silt(path, cfg.eps, silt_mean, cfg.kernel_truncation).renormalized;
        if (exponent > cfg.exponent_cap) ++s.overflow;
        weight = cv ? std::expm1(exponent) : std::exp(exponent);
      }
      acc += weight;
    }
    s.y = acc / double(cfg.n_paths_per_x);
    return s;
  });
  const Reduced r = reduce(samples, cfg.n_paths_per_x);
  est.value = est.prefactor * scale * (base + r.mean);
  est.std_error = est.prefactor * scale * r.std_error;
  est.overflow_count = r.overflow;
  est.survival_fraction = r.survival_fraction;
  return est;
}

MomentEstimate estimate_variance(MomentTarget target, const PlanarDomain& domain, double kappa,
                                 double t, const FkConfig& cfg) {
  require(t > 0.0, "estimate: t must be positive");
  cfg.validate();
  const PathKind kind =
      target == MomentTarget::TraceVariance ? PathKind::Bridge : PathKind::Motion;
  const double k2 = kappa * kappa;
  if (k2 > 0.0) check_resolution(t / double(cfg.n_steps), cfg.eps);
  const double area = domain.area();
  const double scale = kind == PathKind::Bridge ? std::pow(area / (kTwoPi * t), 2) : area * area;

  MomentEstimate est;
  est.target = target;
  est.t = t;
  est.kappa = kappa;
  est.n_outer = cfg.n_outer;
  est.n_paths_per_x = cfg.n_paths_per_x;
  est.eps = cfg.eps;
  est.n_steps = cfg.n_steps;
  est.prefactor = moment_prefactor(kappa, t, 2, kind);
  est.config_fingerprint = fingerprint(canonical(domain, target, kappa, t, cfg, false));
  if (k2 == 0.0) return est;  // e^0 - 1 = 0 for every sample

  const double silt_mean =
      silt_mean_exact(kind, t, cfg.eps, TimeRegion::triangle(t), cfg.n_steps);
  const std::uint32_t salt = stream_salt(target, t);
  const auto samples =
      run_samples(cfg, [&](std::size_t i, DiscretePath& first, DiscretePath& second) {
        RandomStream rng = RandomStream::derive(cfg.seed, i, salt);
        const Point2 x1 = domain.sample_uniform(rng);
        const Point2 x2 = domain.sample_uniform(rng);
        SampleOutcome s;
        double acc = 0.0;
        for (int p = 0; p < cfg.n_paths_per_x; ++p) {
          sample_path(first, kind, x1, t, cfg.n_steps, rng);
          sample_path(second, kind, x2, t, cfg.n_steps, rng);
          const bool alive1 = survives(first, domain, cfg.exit_correction, rng).survived;
          const bool alive2 = survives(second, domain, cfg.exit_correction, rng).survived;
          if (!alive1 || !alive2) continue;
          ++s.survived;
          const double alpha = approx_milt(first, second, cfg.eps, cfg.kernel_truncation);
          if (alpha == 0.0) continue;
          const double g1 =
              renormalized_silt(first, cfg.eps, silt_mean, cfg.kernel_truncation).renormalized;
          const double g2 =
              renormalized_silt(second, cfg.eps, silt_mean, cfg.kernel_truncation).renormalized;
          if (k2 * (g1 + g2 + alpha) > cfg.exponent_cap) ++s.overflow;
          acc += std::exp(k2 * (g1 + g2)) * std::expm1(k2 * alpha);
        }
        s.y = acc / double(cfg.n_paths_per_x);
        return s;
      });
  const Reduced r = reduce(samples, cfg.n_paths_per_x);
  est.value = est.prefactor * scale * r.mean;
  est.std_error = est.prefactor * scale * r.std_error;
  est.overflow_count = r.overflow;
  est.survival_fraction = r.survival_fraction;
  return est;
}

}  // namespace

const char* to_string(MomentTarget target) {
  switch (target) {
    case MomentTarget::TraceMean: return "trace_mean";
    case MomentTarget::MassMean: return "mass_mean";
    case MomentTarget::TraceVariance: return "trace_var";
    case MomentTarget::MassVariance: return "mass_var";
  }
  return "?";
}

void FkConfig::validate() const {
  require(eps > 0.0 && std::isfinite(eps), "FkConfig: eps must be positive");
  require(n_steps >= 2, "FkConfig: n_steps must be at least 2");
  require(n_outer >= 1, "FkConfig: n_outer must be positive");
  require(n_paths_per_x >= 1, "FkConfig: n_paths_per_x must be positive");
  require(exponent_cap > 0.0, "FkConfig: exponent_cap must be positive");
}

double default_eps(double t, int n_steps, double rel) {
  require(t > 0.0 && n_steps >= 1 && rel > 0.0, "default_eps: bad arguments");
  return std::max(rel * t, 10.0 * t / double(n_steps));
}

double moment_prefactor(double kappa, double t, int m, PathKind kind) {
  require(t > 0.0, "moment_prefactor: t must be positive");
  require(m >= 1, "moment_prefactor: m must be at least 1");
  const double k2 = kappa * kappa;
  const double log_term = kind == PathKind::Bridge ? t * std::log(t) : t * std::log(t) - t;
  return std::exp(double(m) * k2 * log_term / kTwoPi);
}

MomentEstimate estimate_trace_mean(const PlanarDomain& domain, double kappa, double t,
                                   const FkConfig& cfg, const SpectralModel* model) {
  return estimate_mean(MomentTarget::TraceMean, domain, kappa, t, cfg, model);
}

MomentEstimate estimate_mass_mean(const PlanarDomain& domain, double kappa, double t,
                                  const FkConfig& cfg, const SpectralModel* model) {
  return estimate_mean(MomentTarget::MassMean, domain, kappa, t, cfg, model);
}

MomentEstimate estimate_trace_variance(const PlanarDomain& domain, double kappa, double t,
                                       const FkConfig& cfg) {
  return estimate_variance(MomentTarget::TraceVariance, domain, kappa, t, cfg);
}

MomentEstimate estimate_mass_variance(const PlanarDomain& domain, double kappa, double t,
                                      const FkConfig& cfg) {
  return estimate_variance(MomentTarget::MassVariance, domain, kappa, t, cfg);
}

std::string fingerprint(const std::string& canonical) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(canonical);
  return os.str();
}

}  // namespace anderson
