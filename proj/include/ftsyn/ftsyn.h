/* C interface to the fault-tolerant controller synthesis library.
 *
 * All functions return a status code:
 *   0  success / certificate / converged
 *   1  usage, I/O, schema, or internal error
 *   2  infeasible problem or counterexample found
 *   3  iteration or verification budget exhausted (undecided)
 *   4  closed-loop divergence
 * On nonzero status, ftsyn_last_error() describes the failure; on status 2
 * or 3 it carries the counterexample / diagnostic text. The message buffer
 * is thread-local.
 */
#ifndef FTSYN_H
#define FTSYN_H

#ifdef __cplusplus
extern "C" {
#endif

#define FTSYN_OK 0
#define FTSYN_ERROR 1
#define FTSYN_INFEASIBLE 2
#define FTSYN_BUDGET 3
#define FTSYN_DIVERGED 4

typedef struct ftsyn_problem ftsyn_problem;
typedef struct ftsyn_controller ftsyn_controller;

const char* ftsyn_version(void);
const char* ftsyn_last_error(void);

/* Problem = model + domain + hyperparameters, loaded from a config file. */
int ftsyn_problem_load(const char* config_path, ftsyn_problem** out);
void ftsyn_problem_free(ftsyn_problem* problem);
int ftsyn_problem_dims(const ftsyn_problem* problem, int* n, int* p);
int ftsyn_problem_set_threads(ftsyn_problem* problem, int threads);

/* Synthesis. Writes the controller file and a run report (either path may
 * be NULL to skip). On success *out (if non-NULL) owns the controller. */
int ftsyn_synthesize(ftsyn_problem* problem, const char* controller_out_path,
                     const char* report_out_path, ftsyn_controller** out);

int ftsyn_controller_load(const char* path, ftsyn_controller** out);
int ftsyn_controller_save(const ftsyn_controller* controller, const char* path);
void ftsyn_controller_free(ftsyn_controller* controller);
int ftsyn_controller_dims(const ftsyn_controller* controller, int* n, int* p);
/* Row-major copy of the p x n gain into a caller buffer of size p*n. */
int ftsyn_controller_gain(const ftsyn_controller* controller, double* K_out);

/* Re-verifies a stored controller against the problem. 0 certificate,
 * 2 counterexample (details in ftsyn_last_error), 3 undecided. */
int ftsyn_verify(ftsyn_problem* problem, const ftsyn_controller* controller);

/* Closed-loop simulation of a scenario file; writes the trace CSV and a
 * metrics report (metrics path may be NULL). 4 on divergence. */
int ftsyn_simulate(ftsyn_problem* problem, const ftsyn_controller* controller,
                   const char* scenario_path, const char* csv_out_path,
                   const char* metrics_out_path);

/* Largest certified invariant ellipsoid for the controller's fixed gain;
 * writes the ellipsoid file. 2 when no invariant ellipsoid exists. */
int ftsyn_roa(ftsyn_problem* problem, const ftsyn_controller* controller,
              const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* FTSYN_H */
