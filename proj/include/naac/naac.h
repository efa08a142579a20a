/* C API of the D2D underlay spectrum-allocation simulator and trainer.
 *
 * All entry points return a naac_status; on failure naac_last_error() holds a
 * thread-local message describing what went wrong. Handles are opaque and
 * must be released with their destroy function. Strings returned through
 * char** out-parameters are heap-allocated and must be released with
 * naac_string_free().
 */
#ifndef NAAC_H
#define NAAC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NAAC_API __declspec(dllexport)
#else
#define NAAC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum naac_status {
  NAAC_OK = 0,
  NAAC_ERR_CONTRACT = 1,  /* precondition violated at a call boundary */
  NAAC_ERR_PARSE = 2,     /* malformed or out-of-range configuration */
  NAAC_ERR_IO = 3,        /* file system failure */
  NAAC_ERR_TOO_LARGE = 4, /* instance exceeds an explicit size guard */
  NAAC_ERR_INTERNAL = 5,
} naac_status;

/* One scenario + run configuration (flat JSON schema, see README). */
typedef struct naac_config naac_config;

NAAC_API const char* naac_version(void);
NAAC_API const char* naac_last_error(void);
NAAC_API void naac_string_free(char* s);

/* Configuration with every key at its default. Never fails except on OOM. */
NAAC_API naac_status naac_config_create(naac_config** out);
NAAC_API naac_status naac_config_load(const char* path, naac_config** out);
NAAC_API naac_status naac_config_parse(const char* json_text, naac_config** out);
/* Sets one key from a JSON-encoded value, e.g. ("episodes", "40") or
 * ("method", "\"dqn\""). Validation runs immediately. */
NAAC_API naac_status naac_config_set(naac_config* cfg, const char* key,
                                     const char* json_value);
NAAC_API naac_status naac_config_to_json(const naac_config* cfg, char** out_json);
NAAC_API void naac_config_destroy(naac_config* cfg);

/* Trains cfg's method: writes one metrics row per episode to
 * {out_dir}/{method}_seed{seed}_train.csv plus {method}_agent{idx}.params
 * checkpoints (the random baseline writes no checkpoints). */
NAAC_API naac_status naac_run_train(const naac_config* cfg);

/* Greedy evaluation from checkpoints over fresh topologies; writes
 * {out_dir}/{method}_seed{seed}_eval.csv. Out-parameters may be NULL. */
NAAC_API naac_status naac_run_eval(const naac_config* cfg, double* outage_prob,
                                   double* sum_rate_bps_hz);

/* Cross product of methods x n_list x seed indices: train then evaluate each
 * cell and write the consolidated {out_dir}/sweep.csv sorted by
 * (method, n_d2d, seed). threads < 0 honors NAAC_THREADS (0/unset = 1). */
NAAC_API naac_status naac_run_sweep(const naac_config* cfg, const int* n_list,
                                    size_t n_count, const char* const* methods,
                                    size_t method_count, int seeds, int threads);

/* Exhaustive allocation search on one instance sampled from seed; guarded at
 * K^N <= 10^6 profiles. Returns a JSON object through out_json. */
NAAC_API naac_status naac_run_oracle(const naac_config* cfg, uint64_t seed,
                                     char** out_json);

/* Finite-difference validation of the actor and critic shapes and of the
 * frozen-noise actor-through-critic path. Returns NAAC_OK whenever the
 * computation ran; compare against the tolerances with naac_gradcheck_pass. */
NAAC_API naac_status naac_run_gradcheck(const naac_config* cfg, uint64_t seed,
                                        double* actor_err, double* critic_err,
                                        double* path_err);
/* 1 when all three errors are within tolerance (1e-4 / 1e-4 / 1e-3). */
NAAC_API int naac_gradcheck_pass(double actor_err, double critic_err, double path_err);

#ifdef __cplusplus
}
#endif

#endif /* NAAC_H */
