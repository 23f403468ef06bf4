#ifndef SCOUTNAV_H
#define SCOUTNAV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Episode outcome as an integer.
typedef enum ScnOutcome {
  SCN_OUTCOME_SUCCESS = 0,
  SCN_OUTCOME_BUDGET_EXHAUSTED = 1,
  SCN_OUTCOME_STUCK = 2,
} ScnOutcome;

// Result code of every fallible call.
typedef enum ScnStatus {
  SCN_STATUS_OK = 0,
  SCN_STATUS_NULL_ARGUMENT = 1,
  SCN_STATUS_INVALID_UTF8 = 2,
  SCN_STATUS_PARSE = 3,
  SCN_STATUS_INVALID = 4,
  SCN_STATUS_UNKNOWN_POLICY = 5,
  SCN_STATUS_IO = 6,
  SCN_STATUS_NOT_FOUND = 7,
  SCN_STATUS_BUFFER_TOO_SMALL = 8,
  SCN_STATUS_PANIC = 9,
} ScnStatus;

// Opaque run configuration handle.
typedef struct ScnConfig ScnConfig;

// Opaque finished-episode handle.
typedef struct ScnEpisode ScnEpisode;

// Opaque scenario handle.
typedef struct ScnScenario ScnScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *scn_version(void);

// Copies the calling thread's last error message into `buf` (always
// NUL-terminated when `cap > 0`). Returns the full message length without
// the terminator, so a caller can retry with a larger buffer.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t scn_last_error(char *buf, size_t cap);

// Loads a scenario file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ScnStatus scn_scenario_load(const char *path, struct ScnScenario **out);

// Parses scenario text in the file format.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum ScnStatus scn_scenario_parse(const char *text, struct ScnScenario **out);

// One of the built-in scenarios by name (`open_field`, `corridor`,
// `dead_end`, `buildings`, `object_search`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum ScnStatus scn_scenario_builtin(const char *name, struct ScnScenario **out);

// Tick budget of a scenario.
//
// # Safety
// `s` must be a live scenario handle; `out` must be writable.
enum ScnStatus scn_scenario_budget(const struct ScnScenario *s, size_t *out);

// # Safety
// `s` must be null or a handle from this library, freed at most once.
void scn_scenario_free(struct ScnScenario *s);

// Default configuration (scored-graph policy, standard parameters).
//
// # Safety
// `out` must be writable.
enum ScnStatus scn_config_new(struct ScnConfig **out);

// Loads a `key = value` configuration file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ScnStatus scn_config_load(const char *path, struct ScnConfig **out);

// Sets one parameter by its configuration key, e.g. `("alpha", "10")` or
// `("policy", "vanilla")`. The whole configuration is re-validated.
//
// # Safety
// `c` must be a live config handle; `key` and `value` NUL-terminated.
enum ScnStatus scn_config_set(struct ScnConfig *c, const char *key, const char *value);

// # Safety
// `c` must be null or a handle from this library, freed at most once.
void scn_config_free(struct ScnConfig *c);

// Runs one episode. `config` may be null for the defaults; `policy` may be
// null to keep the configured one.
//
// # Safety
// Handles must be live; `policy` null or NUL-terminated; `out` writable.
enum ScnStatus scn_run(const struct ScnScenario *scenario,
                       const struct ScnConfig *config,
                       const char *policy,
                       uint64_t seed,
                       struct ScnEpisode **out);

// # Safety
// `e` must be a live episode handle; `out` writable.
enum ScnStatus scn_episode_outcome(const struct ScnEpisode *e, enum ScnOutcome *out);

// # Safety
// `e` must be a live episode handle; `out` writable.
enum ScnStatus scn_episode_ticks(const struct ScnEpisode *e, size_t *out);

// Trajectory length in metres.
//
// # Safety
// `e` must be a live episode handle; `out` writable.
enum ScnStatus scn_episode_length(const struct ScnEpisode *e, double *out);

// Distance between the last goal estimate and the true goal, metres.
//
// # Safety
// `e` must be a live episode handle; `out` writable.
enum ScnStatus scn_episode_goal_error(const struct ScnEpisode *e, double *out);

// Copies the trajectory as interleaved `x, y` pairs. `*len` receives the
// number of points; with `xy` null only the count is reported. Fails with
// [`ScnStatus::BufferTooSmall`] when `cap_points` is short.
//
// # Safety
// `e` must be a live episode handle; `xy` null or `2 * cap_points`
// writable doubles; `len` writable.
enum ScnStatus scn_episode_trajectory(const struct ScnEpisode *e,
                                      double *xy,
                                      size_t cap_points,
                                      size_t *len);

// Writes the per-tick CSV log.
//
// # Safety
// `e` must be a live episode handle; `path` NUL-terminated.
enum ScnStatus scn_episode_write_csv(const struct ScnEpisode *e, const char *path);

// # Safety
// `e` must be null or a handle from this library, freed at most once.
void scn_episode_free(struct ScnEpisode *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCOUTNAV_H */
