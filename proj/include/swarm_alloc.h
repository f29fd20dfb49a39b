/*
 * swarm_alloc — decentralized multi-agent task allocation in a 3D grid world.
 *
 * C interface over the simulation/learning core: opaque handles, integer
 * status codes, and a thread-local error message. All workflow entry points
 * write their artifacts (checkpoints, CSV reports, manifest.json) under an
 * output directory and are deterministic for a fixed config + seed.
 */
#ifndef SWARM_ALLOC_H
#define SWARM_ALLOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SWARM_API __declspec(dllexport)
#else
#define SWARM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum swarm_status {
    SWARM_OK = 0,
    SWARM_ERR_CONFIG = 1, /* invalid configuration or arguments */
    SWARM_ERR_RUNTIME = 2 /* failure during an otherwise valid run */
} swarm_status;

/* Library version string (static storage). */
SWARM_API const char* swarm_version(void);

/* Message for the last failing call on this thread (static storage; valid
 * until the next failing call). */
SWARM_API const char* swarm_last_error(void);

typedef struct swarm_config swarm_config;
typedef struct swarm_model swarm_model;

/* --- configuration ------------------------------------------------------ */

/* Parses a scenario/training JSON document:
 *   { "dims": [nx,ny,nz], "agents": [{"kind": "ground"|"aerial",
 *     "count": int}], "task_slots": int, "obstacle_density": float,
 *     "mode": "fixed"|"continuous", "episode_len": int, ... }
 * plus optional training keys (lr, gamma, ...). Unknown keys are rejected. */
SWARM_API swarm_status swarm_config_parse(const char* json_text, swarm_config** out);
SWARM_API swarm_status swarm_config_load(const char* path, swarm_config** out);

/* Applies one `key=value`-style override; unknown keys and values that fail
 * validation are errors. */
SWARM_API swarm_status swarm_config_set(swarm_config* cfg, const char* key, const char* value);

/* Fully resolved config as JSON; free with swarm_string_free. */
SWARM_API char* swarm_config_dump(const swarm_config* cfg);

SWARM_API void swarm_config_free(swarm_config* cfg);
SWARM_API void swarm_string_free(char* s);

/* --- models -------------------------------------------------------------- */

SWARM_API swarm_status swarm_model_load(const char* checkpoint_path, swarm_model** out);
SWARM_API swarm_status swarm_model_save(const swarm_model* model, const char* checkpoint_path);
SWARM_API void swarm_model_free(swarm_model* model);

/* --- workflows ----------------------------------------------------------- */

/* Independent PPO training; writes checkpoint.json, curve.csv, manifest.json
 * under out_dir. */
SWARM_API swarm_status swarm_train(const swarm_config* cfg, int64_t total_steps, uint64_t seed,
                                   const char* out_dir);

/* Greedy decentralized execution of a trained model; writes metrics.csv and
 * manifest.json under out_dir. */
SWARM_API swarm_status swarm_eval(const swarm_config* cfg, const char* checkpoint_path,
                                  int episodes, uint64_t seed, const char* out_dir);

/* Allocator comparison across agent counts and seeds; writes runs.csv,
 * table_cost.csv, table_success.csv, table_alloc_time.csv, manifest.json.
 * `allocators_csv` is a comma list from {policy, hungarian, greedy, random};
 * `agent_counts` may be NULL (use the config's team size); `checkpoint_path`
 * may be NULL unless the policy allocator is requested. */
SWARM_API swarm_status swarm_bench(const swarm_config* cfg, const char* allocators_csv,
                                   const int* agent_counts, size_t n_agent_counts,
                                   const uint64_t* seeds, size_t n_seeds, int episodes,
                                   const char* checkpoint_path, const char* out_dir);

/* Trains paired models (GraphSAGE vs local-projection embedding) under one
 * seed and writes the paired metrics; outputs checkpoint_full.json,
 * checkpoint_no_graphsage.json, ablation.csv, manifest.json. */
SWARM_API swarm_status swarm_ablate(const swarm_config* cfg, int64_t total_steps, int episodes,
                                    uint64_t seed, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SWARM_ALLOC_H */
