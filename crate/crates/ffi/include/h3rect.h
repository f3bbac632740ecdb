#ifndef H3RECT_H
#define H3RECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Linear solver selector for [`H3Options`].
typedef enum {
  H3_SOLVER_DIRECT = 0,
  H3_SOLVER_CG = 1,
} H3Solver;

// Status codes. The numeric values are stable.
typedef enum {
  H3_STATUS_OK = 0,
  // A required pointer argument was null.
  H3_STATUS_NULL_POINTER = 1,
  // Bad family, case, level list or option value.
  H3_STATUS_INVALID_ARGUMENT = 2,
  // Factorization failure or non-converged iteration.
  H3_STATUS_NUMERICAL = 3,
  // A verification suite ran and at least one check failed.
  H3_STATUS_VERIFICATION_FAILED = 4,
  // A string argument was not valid UTF-8.
  H3_STATUS_INVALID_UTF8 = 5,
  // A buffer supplied by the caller is too small.
  H3_STATUS_BUFFER_TOO_SMALL = 6,
  // Internal panic caught at the boundary.
  H3_STATUS_INTERNAL = 7,
} H3Status;

// Convergence study result.
typedef struct H3Report H3Report;

// Single-level discrete solution.
typedef struct H3Solution H3Solution;

// Run options. Obtain defaults from [`h3rect_options_default`].
typedef struct {
  size_t stiffness_q;
  size_t load_q;
  size_t error_q;
  size_t corner_levels;
  H3Solver solver;
  double tol;
  size_t max_iter;
  // Non-zero forces serial assembly.
  int32_t deterministic;
} H3Options;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

H3Options h3rect_options_default(void);

// Library version as a static NUL-terminated string.
const char *h3rect_version(void);

// Message of the last failure on this thread, or null. Valid until the next call.
const char *h3rect_last_error(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void h3rect_string_free(char *s);

// Runs a convergence study over `levels[0..num_levels]`.
//
// `family` is "adini" or "morley"; `case_name` is "smooth2d", "lshape2d" or
// "smooth3d". `opts` may be null for defaults.
//
// # Safety
// Pointers must be valid; `levels` must hold `num_levels` entries.
H3Status h3rect_convergence(const char *family,
                            const char *case_name,
                            const size_t *levels,
                            size_t num_levels,
                            const H3Options *opts,
                            H3Report **out);

// # Safety
// `report` must be null or a live handle.
void h3rect_report_free(H3Report *report);

// # Safety
// `report` must be null or a live handle.
size_t h3rect_report_num_levels(const H3Report *report);

// Level `index`: mesh parameter `n`, size `h` and the four errors
// (L2, H1, H2, H3) written to `errors[0..4]`.
//
// # Safety
// `report` must be a live handle and `n`, `h`, `errors` valid for writes.
H3Status h3rect_report_level(const H3Report *report,
                             size_t index,
                             size_t *n,
                             double *h,
                             double *errors);

// Observed orders at the finest pair, written to `orders[0..4]`.
//
// # Safety
// `report` must be a live handle and `orders` valid for 4 writes.
H3Status h3rect_report_final_orders(const H3Report *report, double *orders);

// CSV table of the report; free with [`h3rect_string_free`]. Null if `report` is null.
//
// # Safety
// `report` must be null or a live handle.
char *h3rect_report_csv(const H3Report *report);

// Solves a single level.
//
// # Safety
// As for [`h3rect_convergence`].
H3Status h3rect_solve(const char *family,
                      const char *case_name,
                      size_t n,
                      const H3Options *opts,
                      H3Solution **out);

// # Safety
// `sol` must be null or a live handle.
void h3rect_solution_free(H3Solution *sol);

// Number of global DoFs (the coefficient vector length).
//
// # Safety
// `sol` must be null or a live handle.
size_t h3rect_solution_num_dofs(const H3Solution *sol);

// Errors (L2, H1, H2, H3) written to `errors[0..4]`.
//
// # Safety
// `sol` must be a live handle and `errors` valid for 4 writes.
H3Status h3rect_solution_errors(const H3Solution *sol, double *errors);

// Copies the coefficients into `buf[0..len]`.
//
// # Safety
// `sol` must be a live handle and `buf` valid for `len` writes.
H3Status h3rect_solution_coefficients(const H3Solution *sol, double *buf, size_t len);

// Runs a verification suite over `dims[0..num_dims]`. On return
// `*num_checks` and `*num_failed` hold the counts (either may be null).
//
// # Safety
// `suite` must be a valid C string and `dims` hold `num_dims` entries.
H3Status h3rect_verify(const char *suite,
                       const size_t *dims,
                       size_t num_dims,
                       size_t *num_checks,
                       size_t *num_failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* H3RECT_H */
