#ifndef ALTLF_H
#define ALTLF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The non-zero values 2, 3 and 4 match the exit codes of the
 * command-line tool.
 */
typedef enum AltlfStatus {
  ALTLF_STATUS_OK = 0,
  ALTLF_STATUS_ERROR = 1,
  ALTLF_STATUS_PARSE = 2,
  ALTLF_STATUS_UNSUPPORTED_GC = 3,
  ALTLF_STATUS_NODE_LIMIT = 4,
  ALTLF_STATUS_NULL_POINTER = 5,
  ALTLF_STATUS_INVALID_UTF8 = 6,
  ALTLF_STATUS_BAD_VALUE = 7,
} AltlfStatus;

typedef enum AltlfVerdict {
  ALTLF_VERDICT_PERMANENTLY_SATISFIED = 0,
  ALTLF_VERDICT_CURRENTLY_SATISFIED = 1,
  ALTLF_VERDICT_CURRENTLY_VIOLATED = 2,
  ALTLF_VERDICT_PERMANENTLY_VIOLATED = 3,
  /**
   * The constraint graph exceeded its node limit.
   */
  ALTLF_VERDICT_UNKNOWN = 4,
} AltlfVerdict;

/**
 * A compiled property.
 */
typedef struct AltlfMonitor AltlfMonitor;

/**
 * Monitoring state of one trace.
 */
typedef struct AltlfSession AltlfSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *altlf_last_error(void);

/**
 * Compiles `property` (NUL-terminated UTF-8) with a constraint-graph node
 * limit of `node_limit` (0 for the default). On success stores a new monitor
 * in `*out`, to be released with `altlf_monitor_free`.
 *
 * # Safety
 * `property` must be a valid C string and `out` a valid pointer.
 */
enum AltlfStatus altlf_monitor_new(const char *property,
                                   size_t node_limit,
                                   struct AltlfMonitor **out);

/**
 * # Safety
 * `monitor` must come from `altlf_monitor_new` and not be freed twice.
 */
void altlf_monitor_free(struct AltlfMonitor *monitor);

/**
 * Number of declared variables; values passed to `altlf_session_step`
 * follow this order.
 *
 * # Safety
 * `monitor` must be a live monitor.
 */
size_t altlf_monitor_variable_count(const struct AltlfMonitor *monitor);

/**
 * Name of the `index`-th variable, or null when out of range. Owned by the
 * monitor.
 *
 * # Safety
 * `monitor` must be a live monitor.
 */
const char *altlf_monitor_variable_name(const struct AltlfMonitor *monitor, size_t index);

/**
 * Detected property class, such as `MC_Q`. Owned by the monitor.
 *
 * # Safety
 * `monitor` must be a live monitor.
 */
const char *altlf_monitor_class(const struct AltlfMonitor *monitor);

/**
 * A new session at the empty trace, or null if `monitor` is null. Release
 * with `altlf_session_free`.
 *
 * # Safety
 * `monitor` must be a live monitor.
 */
struct AltlfSession *altlf_session_new(const struct AltlfMonitor *monitor);

/**
 * # Safety
 * `session` must come from `altlf_session_new` and not be freed twice.
 */
void altlf_session_free(struct AltlfSession *session);

/**
 * Appends one assignment, value `i` being `numerators[i] / denominators[i]`
 * for the `i`-th declared variable, and stores the verdict of the new prefix
 * in `*verdict`. A node-limit failure stores `Unknown`, returns
 * `NodeLimit` and leaves the session usable.
 *
 * # Safety
 * The arrays must hold `count` elements; `session` and `verdict` must be valid.
 */
enum AltlfStatus altlf_session_step(struct AltlfSession *session,
                                    const int64_t *numerators,
                                    const int64_t *denominators,
                                    size_t count,
                                    enum AltlfVerdict *verdict);

/**
 * Number of assignments read so far.
 *
 * # Safety
 * `session` must be a live session.
 */
size_t altlf_session_len(const struct AltlfSession *session);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALTLF_H */
