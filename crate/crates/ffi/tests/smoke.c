#include <math.h>
#include <stdio.h>
#include <string.h>

#include "homoclinic.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  HcProblem *problem = NULL;
  CHECK(hc_problem_new(1.5, 1, HC_FAMILY_GAUSSIAN, 1.0, 1.0, 10.0, 1001, &problem) ==
        HC_STATUS_OK);

  HcSolverOptions options;
  CHECK(hc_solver_options_default(&options) == HC_STATUS_OK);
  CHECK(options.grad_tol == 1e-9);
  CHECK(hc_problem_set_solver(problem, &options) == HC_STATUS_OK);

  HcReport *report = NULL;
  CHECK(hc_refine(problem, 1e-8, 1, &report) == HC_STATUS_OK);
  HcSummary s;
  CHECK(hc_report_summary(report, &s) == HC_STATUS_OK);
  CHECK(s.converged == 1);
  CHECK(s.action < 0.0);
  CHECK(s.levels == 2);

  size_t len = 0;
  CHECK(hc_report_orbit_len(report, &len) == HC_STATUS_OK);
  CHECK(len == s.n_points * s.dim);
  double small[4];
  CHECK(hc_report_orbit(report, small, 4) == HC_STATUS_BUFFER_TOO_SMALL);

  char *json = NULL;
  CHECK(hc_report_json(report, &json) == HC_STATUS_OK);
  CHECK(strstr(json, "\"witness_action\"") != NULL);
  hc_string_free(json);

  HcProblem *bad = NULL;
  CHECK(hc_problem_new(2.5, 1, HC_FAMILY_GAUSSIAN, 1.0, 1.0, 10.0, 1001, &bad) ==
        HC_STATUS_INVALID_ARGUMENT);
  CHECK(bad == NULL);
  char msg[256];
  CHECK(hc_last_error_message(msg, sizeof msg) > 0);
  CHECK(strstr(msg, "1 < alpha < 2") != NULL);

  HcCoercivity c;
  CHECK(hc_coercivity_bound(1.5, HC_FAMILY_GAUSSIAN, 1.0, 1.0, &c) == HC_STATUS_OK);
  CHECK(fabs(c.c_const - pow(M_PI, 1.25)) < 1e-12);

  CHECK(strlen(hc_version()) > 0);
  hc_report_free(report);
  hc_problem_free(problem);
  printf("ok\n");
  return 0;
}
