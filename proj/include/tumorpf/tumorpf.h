/* C interface of the tumor-growth optimal control library. */
#ifndef TUMORPF_H
#define TUMORPF_H

#include <stddef.h>
#include <stdint.h>

#if defined(TPF_BUILDING_LIBRARY)
#define TPF_API __attribute__((visibility("default")))
#else
#define TPF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Statuses 0, 2, 3 and 4 double as process exit codes. */
typedef enum tpf_status {
  TPF_OK = 0,
  TPF_ERROR_ARGUMENT = 1, /* null handle, bad index, wrong buffer size */
  TPF_ERROR_CONFIG = 2,   /* parse/validation failure, unmet hypothesis */
  TPF_ERROR_SOLVER = 3,   /* nonlinear solve, line search or cone failure */
  TPF_ERROR_VERIFY = 4,   /* a gated verification check failed */
  TPF_ERROR_IO = 5,
  TPF_ERROR_INTERNAL = 6
} tpf_status;

typedef struct tpf_config tpf_config;
typedef struct tpf_problem tpf_problem;
typedef struct tpf_state tpf_state;

enum { TPF_RUN_QUIET = 1, TPF_RUN_FORCE = 2 };

TPF_API const char* tpf_version(void);

/* Message of the last failed call on this thread ("" if none). */
TPF_API const char* tpf_last_error(void);

TPF_API const char* tpf_status_string(tpf_status status);

/* --- configuration ------------------------------------------------------ */

TPF_API tpf_status tpf_config_load(const char* path, tpf_config** out);

/* JSON text; relative file paths resolve against base_dir (NULL = "."). */
TPF_API tpf_status tpf_config_parse(const char* json_text, const char* base_dir, tpf_config** out);

/* "block.key=value"; the value is JSON if it parses as JSON, else a string.
 * On failure the config is left unchanged. */
TPF_API tpf_status tpf_config_set(tpf_config* config, const char* assignment);

/* Sets ssc.seed and verify.seed. */
TPF_API tpf_status tpf_config_set_seed(tpf_config* config, uint64_t seed);

TPF_API tpf_status tpf_config_set_out_dir(tpf_config* config, const char* dir);

/* Fully resolved configuration as JSON; release with tpf_string_free. */
TPF_API tpf_status tpf_config_resolved(const tpf_config* config, char** json_out);

TPF_API void tpf_config_free(tpf_config* config);
TPF_API void tpf_string_free(char* s);

/* --- batch runs ---------------------------------------------------------- */

/* simulate | optimize | analyze | verify, writing into the configured output
 * directory. Progress goes to stderr unless TPF_RUN_QUIET. */
TPF_API tpf_status tpf_run(const tpf_config* config, const char* subcommand, int flags);

/* --- programmatic access ------------------------------------------------- */

TPF_API tpf_status tpf_problem_create(const tpf_config* config, tpf_problem** out);
TPF_API void tpf_problem_free(tpf_problem* problem);

TPF_API tpf_status tpf_problem_size(const tpf_problem* problem, size_t* nodes, int* steps);

/* Controls are steps * nodes values per component, level-major. NULL u1/u2
 * means the configured initial control. */
TPF_API tpf_status tpf_simulate(const tpf_problem* problem, const double* u1, const double* u2,
                                tpf_state** out);
TPF_API void tpf_state_free(tpf_state* state);

/* component 0 = mu, 1 = phi, 2 = sigma; level in 0..steps; n = nodes. */
TPF_API tpf_status tpf_state_field(const tpf_state* state, int level, int component, double* out,
                                   size_t n);

/* Reduced cost and its L2 gradient (each steps * nodes; either may be NULL). */
TPF_API tpf_status tpf_evaluate(const tpf_problem* problem, const double* u1, const double* u2,
                                double* cost, double* grad_u1, double* grad_u2);

#ifdef __cplusplus
}
#endif

#endif
