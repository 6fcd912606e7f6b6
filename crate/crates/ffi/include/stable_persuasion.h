#ifndef STABLE_PERSUASION_H
#define STABLE_PERSUASION_H

#include <stdbool.h>
#include <stdint.h>

// Result codes shared by every entry point.
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_ARGUMENT = 1,
  SP_STATUS_INVALID_UTF8 = 2,
  SP_STATUS_INPUT = 3,
  SP_STATUS_CAPACITY = 4,
  SP_STATUS_PRECONDITION = 5,
  SP_STATUS_INTERNAL = 6,
} SpStatus;

// A parsed market.
typedef struct SpInstance SpInstance;

// An optimal value with its policy rendered as JSON.
typedef struct SpSolution SpSolution;

// A parsed market with agent types.
typedef struct SpTypedInstance SpTypedInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null.
// The caller owns the returned string.
char *sp_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void sp_string_free(char *s);

// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum SpStatus sp_instance_from_json(const char *json, struct SpInstance **out);

// # Safety
// `inst` must be null or a handle from `sp_instance_from_json` not yet freed.
void sp_instance_free(struct SpInstance *inst);

// Agents per side.
//
// # Safety
// `inst` must be a live handle.
uintptr_t sp_instance_agents(const struct SpInstance *inst);

// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum SpStatus sp_typed_instance_from_json(const char *json, struct SpTypedInstance **out);

// # Safety
// `inst` must be null or a handle from `sp_typed_instance_from_json` not yet freed.
void sp_typed_instance_free(struct SpTypedInstance *inst);

// Exhaustive optimal public policy for markets with at most three agents per side.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum SpStatus sp_solve_oracle_public(const struct SpInstance *inst, struct SpSolution **out);

// Optimal public policy for few worlds; the label reports whether optimality is certified.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum SpStatus sp_solve_worlds_public(const struct SpInstance *inst,
                                     uintptr_t max_worlds,
                                     struct SpSolution **out);

// Optimal public (`private_signals == false`) or private policy of a typed market.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum SpStatus sp_solve_typed(const struct SpTypedInstance *inst,
                             bool private_signals,
                             struct SpSolution **out);

// Optimal value as an exact rational such as `"3/4"`. The caller owns the string.
//
// # Safety
// `sol` must be a live handle.
char *sp_solution_value(const struct SpSolution *sol);

// Policy as JSON. The caller owns the string.
//
// # Safety
// `sol` must be a live handle.
char *sp_solution_policy_json(const struct SpSolution *sol);

// Optimality label. The caller owns the string.
//
// # Safety
// `sol` must be a live handle.
char *sp_solution_label(const struct SpSolution *sol);

// # Safety
// `sol` must be null or a handle returned by a solver and not yet freed.
void sp_solution_free(struct SpSolution *sol);

// Writes whether the policy is stable and Bayes-plausible into `stable`.
//
// # Safety
// `inst` must be a live handle, `policy_json` a valid C string and `stable` a valid pointer.
enum SpStatus sp_check_policy(const struct SpInstance *inst, const char *policy_json, bool *stable);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABLE_PERSUASION_H */
