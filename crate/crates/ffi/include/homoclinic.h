#ifndef HOMOCLINIC_H
#define HOMOCLINIC_H

#include <stddef.h>
#include <stdint.h>

#define HC_FAMILY_GAUSSIAN 0

#define HC_FAMILY_SECH2 1

#define HC_FAMILY_RATIONAL 2

#define HC_METRIC_SOBOLEV 0

#define HC_METRIC_EUCLIDEAN 1

typedef enum HcStatus {
  HC_STATUS_OK = 0,
  HC_STATUS_NULL_POINTER = 1,
  HC_STATUS_INVALID_ARGUMENT = 2,
  HC_STATUS_BUFFER_TOO_SMALL = 3,
  HC_STATUS_INTERNAL = 4,
  HC_STATUS_PANIC = 5,
} HcStatus;

// A problem, its grid and solver options.
typedef struct HcProblem HcProblem;

// The result of a solve.
typedef struct HcReport HcReport;

// Solver settings; fill with [`hc_solver_options_default`] first.
typedef struct HcSolverOptions {
  uint64_t max_iters;
  double grad_tol;
  double armijo_c;
  double backtrack_factor;
  // Nonzero adds seeded noise to the initial bump.
  int32_t perturbed;
  double perturb_scale;
  uint64_t seed;
  // `HC_METRIC_SOBOLEV` or `HC_METRIC_EUCLIDEAN`.
  int32_t metric;
} HcSolverOptions;

typedef struct HcSummary {
  double half_length;
  uint64_t n_points;
  uint64_t dim;
  double spacing;
  double i1;
  double i2;
  double action;
  double grad_norm;
  uint64_t iterations;
  int32_t converged;
  double witness_action;
  double residual_l2;
  double residual_linf;
  double endpoint_q;
  double endpoint_qdot;
  // NaN when the tail is too small to fit.
  double tail_rate;
  int32_t residual_ok;
  int32_t window_bound_ok;
  int32_t qdot_bound_ok;
  // Number of domain-doubling levels that were solved.
  uint64_t levels;
} HcSummary;

typedef struct HcCoercivity {
  double c_const;
  double x_star;
  double phi_min;
  double growth_threshold;
  // The same three constants with the sharp embedding constant.
  double sharp_c_const;
  double sharp_x_star;
  double sharp_phi_min;
} HcCoercivity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Writes the default solver options to `out`.
enum HcStatus hc_solver_options_default(struct HcSolverOptions *out);

// Creates a problem on `[-half_length, half_length]` with `n_points` nodes
// (odd, at least 5). `width` is ignored for the rational family.
enum HcStatus hc_problem_new(double alpha,
                             size_t dim,
                             int32_t family,
                             double amplitude,
                             double width,
                             double half_length,
                             size_t n_points,
                             struct HcProblem **out);

enum HcStatus hc_problem_set_solver(struct HcProblem *problem,
                                    const struct HcSolverOptions *options);

// Releases a problem; null is ignored.
void hc_problem_free(struct HcProblem *problem);

// Minimizes on the problem's grid. A run that stops before `grad_tol` still
// succeeds; check `converged` in the summary.
enum HcStatus hc_minimize(const struct HcProblem *problem, struct HcReport **out);

// Minimizes, then doubles the half-length (same spacing) up to
// `max_doublings` times until the action changes by less than `tol`.
enum HcStatus hc_refine(const struct HcProblem *problem,
                        double tol,
                        size_t max_doublings,
                        struct HcReport **out);

// Releases a report; null is ignored.
void hc_report_free(struct HcReport *report);

enum HcStatus hc_report_summary(const struct HcReport *report, struct HcSummary *out);

// Number of doubles in the orbit, `n_points * dim`.
enum HcStatus hc_report_orbit_len(const struct HcReport *report, size_t *out);

// Copies the orbit, row-major `n_points × dim`, into `buf`.
enum HcStatus hc_report_orbit(const struct HcReport *report, double *buf, size_t len);

// Copies the `n_points` node times into `buf`.
enum HcStatus hc_report_times(const struct HcReport *report, double *buf, size_t len);

// The report as JSON, in the same layout as `report.json`. Release the
// string with [`hc_string_free`].
enum HcStatus hc_report_json(const struct HcReport *report, char **out);

// Releases a string returned by this library; null is ignored.
void hc_string_free(char *s);

// Closed-form lower-bound constants for `I(q) ≥ ½x² - C x^α`.
enum HcStatus hc_coercivity_bound(double alpha,
                                  int32_t family,
                                  double amplitude,
                                  double width,
                                  struct HcCoercivity *out);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len - 1` bytes) and returns the full message
// length. Returns 0 when there is no message; `buf` may be null to query
// the length.
size_t hc_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *hc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOMOCLINIC_H */
