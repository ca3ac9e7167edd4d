#include "anderson_lab.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "anderson/error.hpp"
#include "anderson/experiment.hpp"
#include "anderson/feynman_kac.hpp"
#include "anderson/geometry.hpp"
#include "anderson/local_times.hpp"
#include "anderson/spectral.hpp"

struct al_domain {
  anderson::PlanarDomain impl;
};

struct al_spectral_model {
  anderson::SpectralModel impl;
};

namespace {

thread_local std::string g_last_error;

al_status to_status(anderson::ErrorCode code) {
  using anderson::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return AL_INVALID_ARGUMENT;
    case ErrorCode::Domain: return AL_DOMAIN_ERROR;
    case ErrorCode::Range: return AL_RANGE_ERROR;
    case ErrorCode::Io: return AL_IO_ERROR;
    case ErrorCode::Schema: return AL_SCHEMA_ERROR;
    case ErrorCode::Numeric: return AL_NUMERIC_ERROR;
  }
  return AL_INTERNAL_ERROR;
}

template <class F>
al_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return AL_OK;
  } catch (const anderson::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return AL_INTERNAL_ERROR;
}

void require_ptr(const void* p, const char* name) {
  anderson::require(p != nullptr, std::string(name) + " must not be null");
}

void copy_out(const std::string& s, char* buf, size_t size, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && size > 0) {
    const size_t n = std::min(size - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
}

al_status make_domain(anderson::PlanarDomain d, al_domain** out) {
  *out = new al_domain{std::move(d)};
  return AL_OK;
}

}  // namespace

extern "C" {

const char* al_last_error(void) { return g_last_error.c_str(); }
const char* al_version(void) { return "1.0.0"; }

void al_set_warning_handler(al_warning_handler handler, void* user) {
  anderson::set_warning_sink(handler, user);
}

al_status al_domain_rectangle(double x0, double y0, double width, double height,
                              al_domain** out) {
  return guarded([&] {
    require_ptr(out, "out");
    make_domain(anderson::PlanarDomain::rectangle(width, height, {x0, y0}), out);
  });
}

al_status al_domain_disk(double cx, double cy, double radius, al_domain** out) {
  return guarded([&] {
    require_ptr(out, "out");
    make_domain(anderson::PlanarDomain::disk(radius, {cx, cy}), out);
  });
}

al_status al_domain_polygon(const double* xy, size_t n, al_domain** out) {
  return guarded([&] {
    require_ptr(out, "out");
    require_ptr(xy, "xy");
    std::vector<anderson::Point2> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = {xy[2 * i], xy[2 * i + 1]};
    make_domain(anderson::PlanarDomain::polygon(std::move(v)), out);
  });
}

al_status al_domain_koch(int level, double side, double x0, double y0, al_domain** out) {
  return guarded([&] {
    require_ptr(out, "out");
    make_domain(anderson::PlanarDomain::koch(level, side, {x0, y0}), out);
  });
}

void al_domain_destroy(al_domain* domain) { delete domain; }

al_status al_domain_area(const al_domain* d, double* out) {
  return guarded([&] {
    require_ptr(d, "domain");
    require_ptr(out, "out");
    *out = d->impl.area();
  });
}

al_status al_domain_perimeter(const al_domain* d, double* out) {
  return guarded([&] {
    require_ptr(d, "domain");
    require_ptr(out, "out");
    *out = d->impl.perimeter();
  });
}

al_status al_domain_contains(const al_domain* d, double x, double y, int* out) {
  return guarded([&] {
    require_ptr(d, "domain");
    require_ptr(out, "out");
    *out = d->impl.contains({x, y}) ? 1 : 0;
  });
}

al_status al_domain_boundary_distance(const al_domain* d, double x, double y, double* out) {
  return guarded([&] {
    require_ptr(d, "domain");
    require_ptr(out, "out");
    *out = d->impl.boundary_distance({x, y});
  });
}

al_status al_domain_describe(const al_domain* d, char* buf, size_t size, size_t* needed) {
  return guarded([&] {
    require_ptr(d, "domain");
    copy_out(d->impl.describe(), buf, size, needed);
  });
}

al_status al_spectral_model_create(const al_domain* d, double t_min, al_spectral_model** out) {
  return guarded([&] {
    require_ptr(d, "domain");
    require_ptr(out, "out");
    auto m = anderson::spectral_model_for(d->impl, t_min);
    if (!m)
      anderson::fail(anderson::ErrorCode::Domain,
                     "no spectral model for domain '" + d->impl.describe() + "'");
    *out = new al_spectral_model{std::move(*m)};
  });
}

al_status al_spectral_model_load(const char* path, al_spectral_model** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    std::ifstream in(path);
    if (!in) anderson::fail(anderson::ErrorCode::Io, std::string("cannot open '") + path + "'");
    *out = new al_spectral_model{anderson::load_model_csv(in)};
  });
}

al_status al_spectral_model_save(const al_spectral_model* m, const char* path) {
  return guarded([&] {
    require_ptr(m, "model");
    require_ptr(path, "path");
    std::ofstream os(path);
    if (!os) anderson::fail(anderson::ErrorCode::Io, std::string("cannot write '") + path + "'");
    anderson::save_model_csv(m->impl, os);
    if (!os) anderson::fail(anderson::ErrorCode::Io, std::string("error writing '") + path + "'");
  });
}

void al_spectral_model_destroy(al_spectral_model* m) { delete m; }

al_status al_heat_trace(const al_spectral_model* m, double t, double* out) {
  return guarded([&] {
    require_ptr(m, "model");
    require_ptr(out, "out");
    *out = anderson::heat_trace(m->impl, t);
  });
}

al_status al_heat_content(const al_spectral_model* m, double t, double* out) {
  return guarded([&] {
    require_ptr(m, "model");
    require_ptr(out, "out");
    *out = anderson::heat_content(m->impl, t);
  });
}

al_status al_spectral_model_info(const al_spectral_model* m, size_t* n_modes,
                                 double* cutoff_lambda, double* tail_bound, double* min_t) {
  return guarded([&] {
    require_ptr(m, "model");
    if (n_modes) *n_modes = m->impl.modes.size();
    if (cutoff_lambda) *cutoff_lambda = m->impl.cutoff_lambda;
    if (tail_bound) *tail_bound = m->impl.tail_bound;
    if (min_t) *min_t = m->impl.min_t;
  });
}

al_status al_silt_mean(al_path_kind kind, double t, double eps, int n_steps, double* out) {
  return guarded([&] {
    require_ptr(out, "out");
    anderson::require(kind == AL_MOTION || kind == AL_BRIDGE, "unknown path kind");
    const auto k = kind == AL_MOTION ? anderson::PathKind::Motion : anderson::PathKind::Bridge;
    std::optional<int> n;
    if (n_steps > 0) n = n_steps;
    *out = anderson::silt_mean_exact(k, t, eps, anderson::TimeRegion::triangle(t), n);
  });
}

void al_fk_config_default(al_fk_config* cfg) {
  if (!cfg) return;
  const anderson::FkConfig d;
  cfg->eps = 0.0;
  cfg->n_steps = d.n_steps;
  cfg->n_outer = d.n_outer;
  cfg->n_paths_per_x = d.n_paths_per_x;
  cfg->exit_correction = d.exit_correction ? 1 : 0;
  cfg->kernel_truncation = d.kernel_truncation ? 1 : 0;
  cfg->seed = d.seed;
  cfg->exponent_cap = d.exponent_cap;
  cfg->workers = d.workers;
}

al_status al_fk_estimate(const al_domain* d, al_moment target, double kappa, double t,
                         const al_fk_config* cfg, const al_spectral_model* model,
                         al_fk_result* out) {
  return guarded([&] {
    require_ptr(d, "domain");
    require_ptr(cfg, "config");
    require_ptr(out, "out");
    anderson::FkConfig fk;
    fk.n_steps = cfg->n_steps;
    fk.n_outer = cfg->n_outer;
    fk.n_paths_per_x = cfg->n_paths_per_x;
    fk.exit_correction = cfg->exit_correction != 0;
    fk.kernel_truncation = cfg->kernel_truncation != 0;
    fk.seed = cfg->seed;
    fk.exponent_cap = cfg->exponent_cap;
    fk.workers = cfg->workers;
    anderson::require(fk.n_steps >= 2, "n_steps must be >= 2");
    anderson::require(t > 0.0, "t must be positive");
    fk.eps = cfg->eps > 0.0 ? cfg->eps : anderson::default_eps(t, fk.n_steps);
    const anderson::SpectralModel* m = model ? &model->impl : nullptr;
    anderson::MomentEstimate e;
    switch (target) {
      case AL_TRACE_MEAN: e = anderson::estimate_trace_mean(d->impl, kappa, t, fk, m); break;
      case AL_MASS_MEAN: e = anderson::estimate_mass_mean(d->impl, kappa, t, fk, m); break;
      case AL_TRACE_VARIANCE: e = anderson::estimate_trace_variance(d->impl, kappa, t, fk); break;
      case AL_MASS_VARIANCE: e = anderson::estimate_mass_variance(d->impl, kappa, t, fk); break;
      default: anderson::fail(anderson::ErrorCode::InvalidArgument, "unknown moment target");
    }
    out->value = e.value;
    out->std_error = e.std_error;
    out->prefactor = e.prefactor;
    out->eps = e.eps;
    out->overflow_count = e.overflow_count;
    out->survival_fraction = e.survival_fraction;
    out->control_variate = e.control_variate ? 1 : 0;
    copy_out(e.config_fingerprint, out->fingerprint, sizeof out->fingerprint, nullptr);
  });
}

al_status al_run_experiment(const char* command, const char* config_path, const char* out_dir,
                            unsigned workers, int has_seed, uint64_t seed, int* exit_code,
                            char* message, size_t message_size, size_t* message_needed) {
  return guarded([&] {
    require_ptr(command, "command");
    require_ptr(config_path, "config_path");
    require_ptr(exit_code, "exit_code");
    anderson::RunOptions opt;
    opt.out_dir = out_dir ? out_dir : ".";
    opt.workers = workers == 0 ? 1 : workers;
    if (has_seed) opt.seed = seed;
    anderson::RunResult r;
    try {
      r = anderson::run_command(command, anderson::ExperimentConfig::load(config_path), opt);
    } catch (const anderson::Error& e) {
      r.exit_code = 1;
      r.message = std::string("error: ") + e.what() + "\n";
    }
    *exit_code = r.exit_code;
    copy_out(r.message, message, message_size, message_needed);
  });
}

}  // extern "C"
