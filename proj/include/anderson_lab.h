#ifndef ANDERSON_LAB_H
#define ANDERSON_LAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define AL_API __declspec(dllexport)
#else
#define AL_API __attribute__((visibility("default")))
#endif

typedef enum al_status {
  AL_OK = 0,
  AL_INVALID_ARGUMENT = 1,
  AL_DOMAIN_ERROR = 2,
  AL_RANGE_ERROR = 3,
  AL_IO_ERROR = 4,
  AL_SCHEMA_ERROR = 5,
  AL_NUMERIC_ERROR = 6,
  AL_INTERNAL_ERROR = 7
} al_status;

/* Message for the last failing call on this thread ("" if none). */
AL_API const char* al_last_error(void);
AL_API const char* al_version(void);

/* Warnings go to stderr unless a handler is installed. NULL restores it. */
typedef void (*al_warning_handler)(const char* message, void* user);
AL_API void al_set_warning_handler(al_warning_handler handler, void* user);

/* ---- domains ---------------------------------------------------------- */

typedef struct al_domain al_domain;

AL_API al_status al_domain_rectangle(double x0, double y0, double width, double height,
                                     al_domain** out);
AL_API al_status al_domain_disk(double cx, double cy, double radius, al_domain** out);
/* xy holds n interleaved (x, y) pairs in counter-clockwise order. */
AL_API al_status al_domain_polygon(const double* xy, size_t n, al_domain** out);
AL_API al_status al_domain_koch(int level, double side, double x0, double y0, al_domain** out);
AL_API void al_domain_destroy(al_domain* domain);

AL_API al_status al_domain_area(const al_domain* d, double* out);
AL_API al_status al_domain_perimeter(const al_domain* d, double* out);
AL_API al_status al_domain_contains(const al_domain* d, double x, double y, int* out);
AL_API al_status al_domain_boundary_distance(const al_domain* d, double x, double y, double* out);
/* Copies the description into buf (truncated, always terminated); *needed
   receives the full length including the terminator. */
AL_API al_status al_domain_describe(const al_domain* d, char* buf, size_t size, size_t* needed);

/* ---- spectral reference ------------------------------------------------ */

typedef struct al_spectral_model al_spectral_model;

/* Certified for every t >= t_min. Rectangles and disks only. */
AL_API al_status al_spectral_model_create(const al_domain* d, double t_min,
                                          al_spectral_model** out);
AL_API al_status al_spectral_model_load(const char* path, al_spectral_model** out);
AL_API al_status al_spectral_model_save(const al_spectral_model* m, const char* path);
AL_API void al_spectral_model_destroy(al_spectral_model* m);
AL_API al_status al_heat_trace(const al_spectral_model* m, double t, double* out);
AL_API al_status al_heat_content(const al_spectral_model* m, double t, double* out);
AL_API al_status al_spectral_model_info(const al_spectral_model* m, size_t* n_modes,
                                        double* cutoff_lambda, double* tail_bound,
                                        double* min_t);

/* ---- local times -------------------------------------------------------- */

typedef enum al_path_kind { AL_MOTION = 0, AL_BRIDGE = 1 } al_path_kind;

/* Mean of the smoothed self-intersection local time over [0,t]^2_<=. With
   n_steps > 0 the grid-matched discrete mean is returned. */
AL_API al_status al_silt_mean(al_path_kind kind, double t, double eps, int n_steps, double* out);

/* ---- Feynman-Kac moments ------------------------------------------------ */

typedef enum al_moment {
  AL_TRACE_MEAN = 0,
  AL_MASS_MEAN = 1,
  AL_TRACE_VARIANCE = 2,
  AL_MASS_VARIANCE = 3
} al_moment;

typedef struct al_fk_config {
  double eps;           /* <= 0 selects the default for (t, n_steps) */
  int n_steps;
  uint64_t n_outer;
  int n_paths_per_x;
  int exit_correction;
  int kernel_truncation;
  uint64_t seed;
  double exponent_cap;
  unsigned workers;
} al_fk_config;

typedef struct al_fk_result {
  double value;
  double std_error;
  double prefactor;
  double eps;
  uint64_t overflow_count;
  double survival_fraction;
  int control_variate;
  char fingerprint[17];
} al_fk_result;

AL_API void al_fk_config_default(al_fk_config* cfg);

/* model may be NULL; when given, mean targets use it as a control variate. */
AL_API al_status al_fk_estimate(const al_domain* d, al_moment target, double kappa, double t,
                                const al_fk_config* cfg, const al_spectral_model* model,
                                al_fk_result* out);

/* ---- experiment runner -------------------------------------------------- */

/* Runs one CLI command (silt-validate, trace, mass, recover, minkowski).
   *exit_code receives 0 (pass), 1 (usage or schema error) or 2 (statistical
   failure). The human-readable summary is copied like al_domain_describe. */
AL_API al_status al_run_experiment(const char* command, const char* config_path,
                                   const char* out_dir, unsigned workers, int has_seed,
                                   uint64_t seed, int* exit_code, char* message,
                                   size_t message_size, size_t* message_needed);

#ifdef __cplusplus
}
#endif

#endif
