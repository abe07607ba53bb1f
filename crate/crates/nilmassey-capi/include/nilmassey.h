/* C interface for the nilmassey obstruction pipelines. */

#ifndef NILMASSEY_H
#define NILMASSEY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status code returned by every fallible entry point.
 */
enum NmStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  /*
   Success.
   */
  NM_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  NM_STATUS_NULL_POINTER = 1,
  /*
   A string argument was not valid UTF-8.
   */
  NM_STATUS_INVALID_UTF8 = 2,
  /*
   JSON could not be parsed into the expected shape.
   */
  NM_STATUS_PARSE_ERROR = 3,
  /*
   The action failed one of its defining axioms.
   */
  NM_STATUS_INVALID_ACTION = 4,
  /*
   The cocycle failed its law against the given action.
   */
  NM_STATUS_INVALID_COCYCLE = 5,
  /*
   A pipeline computation rejected the inputs.
   */
  NM_STATUS_COMPUTE_ERROR = 6,
  /*
   An internal invariant was violated; the message has the details.
   */
  NM_STATUS_INTERNAL_ERROR = 7,
};
#ifndef __cplusplus
typedef int32_t NmStatus;
#endif // __cplusplus

/*
 An action of a finite group on the free nilpotent group, validated on
 construction. Opaque; create with `nm_action_from_json`, release with
 `nm_action_free`.
 */
typedef struct NmAction NmAction;

/*
 A nonabelian cocycle for some action. Opaque; create with
 `nm_cocycle_from_json`, release with `nm_cocycle_free`.
 */
typedef struct NmCocycle NmCocycle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 The message for the most recent non-OK status on this thread. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *nm_last_error(void);

/*
 Parse an action from JSON (either the full table form or the compact
 cyclic form) and validate it. On success `*out` owns the handle.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
NmStatus nm_action_from_json(const char *json, struct NmAction **out);

/*
 Serialize an action back to its full JSON form.

 # Safety
 `action` must be a live handle and `out` a valid pointer.
 */
NmStatus nm_action_to_json(const struct NmAction *action, char **out);

/*
 The truncation order n of the action's target group. Zero when the
 handle is NULL.
 */
uint64_t nm_action_order(const struct NmAction *action);

/*
 The coefficient modulus m. Zero when the handle is NULL.
 */
uint64_t nm_action_modulus(const struct NmAction *action);

/*
 The order of the acting group. Zero when the handle is NULL.
 */
uint64_t nm_action_group_order(const struct NmAction *action);

/*
 Release an action handle. NULL is ignored.

 # Safety
 `action` must have come from this library and not been freed before.
 */
void nm_action_free(struct NmAction *action);

/*
 Parse a cocycle from its JSON form and check its law against the given
 action. On success `*out` owns the handle.

 # Safety
 `action` must be a live handle, `json` a NUL-terminated string, and
 `out` a valid pointer.
 */
NmStatus nm_cocycle_from_json(const struct NmAction *action,
                              const char *json,
                              struct NmCocycle **out);

/*
 The level of the cocycle. Zero when the handle is NULL.
 */
uint64_t nm_cocycle_level(const struct NmCocycle *cocycle);

/*
 Release a cocycle handle. NULL is ignored.

 # Safety
 `cocycle` must have come from this library and not been freed before.
 */
void nm_cocycle_free(struct NmCocycle *cocycle);

/*
 Run the full obstruction verification for one action/cocycle pair and
 return the report as JSON in `*out`. The cocycle must sit one level
 above the action's truncation order.

 # Safety
 `action` and `cocycle` must be live handles and `out` a valid pointer.
 */
NmStatus nm_verify(const struct NmAction *action, const struct NmCocycle *cocycle, char **out);

/*
 Parse a scenario file, run every scenario, and return the report file
 as JSON in `*out`. `seed` drives any randomized responses in the runs.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
NmStatus nm_run_scenarios(const char *json, uint64_t seed, char **out);

/*
 Generate `count` scenarios from the named profile ("default" or
 "nontrivial-h2"), run them, and return the report file as JSON in
 `*out`. Identical arguments produce byte-identical output.

 # Safety
 `profile` must be a NUL-terminated string and `out` a valid pointer.
 */
NmStatus nm_random_suite(uint64_t count, uint64_t seed, const char *profile, char **out);

/*
 Release a string returned by this library. NULL is ignored.

 # Safety
 `s` must have come from this library and not been freed before.
 */
void nm_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NILMASSEY_H */
