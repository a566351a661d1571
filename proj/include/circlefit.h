#ifndef CIRCLEFIT_H
#define CIRCLEFIT_H

/* C interface to the circle fitting library.
 *
 * Every function returns a cf_status; CF_OK means success. On failure a
 * human-readable message is stored per thread and can be read with
 * cf_last_error(). Objects returned through out-parameters are owned by the
 * caller and released with the matching _free function.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
    CF_OK = 0,
    CF_ERR_ARGUMENT = 1,     /* invalid argument or configuration */
    CF_ERR_IO = 2,           /* file missing, unreadable, or malformed */
    CF_ERR_DEGENERATE = 3,   /* data admits no fit of the requested kind */
    CF_ERR_SINGULAR = 4,     /* linear algebra broke down */
    CF_ERR_NONCONVERGED = 5, /* an internal solver ran out of iterations */
    CF_ERR_INTERNAL = 6
} cf_status;

/* Message for the most recent failing call on the calling thread. Never NULL;
 * empty string when no failure happened yet. */
const char* cf_last_error(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

typedef struct cf_dataset cf_dataset;

/* xy holds n points as [x0, y0, x1, y1, ...]. Coordinates must be finite. */
cf_status cf_dataset_create(const double* xy, size_t n, cf_dataset** out);
/* Text format: one "x y" pair per line, '#' starts a comment. */
cf_status cf_dataset_load(const char* path, cf_dataset** out);
cf_status cf_dataset_save(const cf_dataset* data, const char* path);
void cf_dataset_free(cf_dataset* data);

size_t cf_dataset_size(const cf_dataset* data);
/* Copies the points into xy (capacity 2 * cf_dataset_size doubles). */
cf_status cf_dataset_points(const cf_dataset* data, double* xy);

/* ------------------------------------------------------------------ */
/* Synthetic data                                                      */

cf_status cf_generate_square(size_t n, uint64_t seed, cf_dataset** out);

#define CF_ARC_START_AUTO (-1e300)

typedef struct cf_arc_spec {
    double radius;        /* > 0 */
    double arc_degrees;   /* (0, 360] */
    double sigma;         /* noise level, >= 0 */
    size_t n;             /* >= 3 */
    double center_x;
    double center_y;
    double start_degrees; /* CF_ARC_START_AUTO centers the arc on top */
    int isotropic_noise;  /* nonzero: Gaussian noise on both coordinates
                             instead of the default radial noise */
    int random_angles;    /* nonzero: uniform random angles instead of
                             equal spacing */
} cf_arc_spec;

/* Fills spec with the defaults: unit circle at the origin, full circle,
 * noise-free, radial noise mode, equally spaced. */
void cf_arc_spec_init(cf_arc_spec* spec, size_t n);

cf_status cf_generate_arc(const cf_arc_spec* spec, uint64_t seed, cf_dataset** out);

/* Four unit cross points plus k copies of the origin; k >= 4 yields several
 * equally deep minima of the fitting objective. */
cf_status cf_generate_multi_minima(size_t k, cf_dataset** out);

/* ------------------------------------------------------------------ */
/* Fitting                                                             */

typedef struct cf_fit_result {
    int is_line;      /* 0: circle in (a, b, r), 1: line Bx + Cy + D = 0 */
    double a, b, r;
    double B, C, D;   /* (B, C) is a unit normal */
    double objective; /* sum of squared distances */
    int iterations;   /* accepted steps; 0 for direct fits */
    int newton_steps; /* characteristic-polynomial root steps; 0 otherwise */
    double flops;     /* analytic cost model */
    char status[16];  /* Converged | Diverged | MaxIterations | Stalled | Direct */
} cf_fit_result;

/* method: af1 | af2 | af3 | tri | cen (direct) or lmc | lma | landau | spath
 * (iterative). prefit names the starting guess for iterative methods (same
 * five direct names, NULL = af2) and must be NULL for direct methods.
 * options is NULL or key=value text ('#' comments) overriding the solver
 * settings: max_iterations, step_tolerance, objective_tolerance,
 * divergence_radius_factor, initial_damping, damping_up, damping_down, seed.
 *
 * Returns CF_OK whenever a fit was produced, even one that stalled or
 * diverged; inspect result->status. Errors (bad names, degenerate data, ...)
 * return a nonzero status instead. */
cf_status cf_fit(const cf_dataset* data, const char* method, const char* prefit,
                 const char* options, cf_fit_result* result);

/* Objective value of an explicit circle or line (is_line and the matching
 * fields of curve must be set). */
cf_status cf_objective(const cf_dataset* data, const cf_fit_result* curve, double* value);

/* ------------------------------------------------------------------ */
/* Objective landscape                                                 */

/* Fills values[i * nx + j] with the radius-minimized objective at the center
 * (x0 + (x1-x0)*j/(nx-1), y0 + (y1-y0)*i/(ny-1)); nx, ny >= 2. The buffer
 * must hold nx * ny doubles. */
cf_status cf_contour(const cf_dataset* data, double x0, double x1, double y0, double y1,
                     int nx, int ny, double* values);

/* ------------------------------------------------------------------ */
/* Experiments                                                         */

/* experiment: census | convergence | cost | escape | pairing.
 * config_text is NULL or key=value text (n, samples, starts, sigma, seed,
 * arc, arcs, ns, methods, max_iterations, fp_max_iterations and the solver
 * tolerance keys). Writes <out_dir>/report.json and <out_dir>/<experiment>.csv;
 * out_dir must exist. The run honors the CIRCLEFIT_THREADS variable and its
 * output is identical for a given seed regardless of thread count. */
cf_status cf_bench_run(const char* experiment, const char* config_text, const char* out_dir);

/* ------------------------------------------------------------------ */
/* Utilities                                                           */

/* Writes text to path via a temporary file and an atomic rename. */
cf_status cf_write_text(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif /* CIRCLEFIT_H */
