#ifndef FLIPVIEW_H
#define FLIPVIEW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FvSign {
  FV_SIGN_BOTH = 0,
  FV_SIGN_PLUS = 1,
  FV_SIGN_MINUS = 2,
} FvSign;

typedef enum FvStatus {
  FV_STATUS_OK = 0,
  FV_STATUS_NULL_POINTER = 1,
  FV_STATUS_INVALID_UTF8 = 2,
  FV_STATUS_PARSE = 3,
  FV_STATUS_INVALID_INPUT = 4,
  FV_STATUS_LIMIT_EXCEEDED = 5,
  FV_STATUS_VERIFICATION = 6,
  FV_STATUS_PANIC = 7,
} FvStatus;

/**
 * Opaque flip sequence handle.
 */
typedef struct FvFlipSequence FvFlipSequence;

/**
 * Opaque permutation handle.
 */
typedef struct FvPermutation FvPermutation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fv_last_error_message(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void fv_string_free(char *s);

/**
 * Parse a permutation such as `"2,6,4,3,1,5"`.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum FvStatus fv_permutation_parse(const char *text, struct FvPermutation **out);

/**
 * Generate a permutation. `family` is `bit_reversal`, `sequential`,
 * `random` or `separable`; `seed` is used by the randomized families.
 *
 * # Safety
 * `family` must be a nul-terminated string; `out` must be writable.
 */
enum FvStatus fv_permutation_generate(const char *family,
                                      uintptr_t n,
                                      uint64_t seed,
                                      struct FvPermutation **out);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `perm` must be null or a live handle.
 */
uintptr_t fv_permutation_len(const struct FvPermutation *perm);

/**
 * # Safety
 * `perm` must be null or a live handle, not used afterwards.
 */
void fv_permutation_free(struct FvPermutation *perm);

/**
 * Size of the greedy superset for the given sign.
 *
 * # Safety
 * `perm` must be a live handle; `out` must be writable.
 */
enum FvStatus fv_greedy_cost(const struct FvPermutation *perm, enum FvSign sign, uintptr_t *out);

/**
 * Flip sequence from the greedy superset, with elbows forbidden.
 *
 * # Safety
 * `perm` must be a live handle; `out` must be writable.
 */
enum FvStatus fv_flips_from_greedy(const struct FvPermutation *perm, struct FvFlipSequence **out);

/**
 * Flip sequence following a tree relaxation. `policy` is
 * `max_height_drop`, `max_width_gain`, `max_depth_gain` or `random:<seed>`.
 *
 * # Safety
 * `perm` must be a live handle, `policy` a nul-terminated string and `out`
 * writable.
 */
enum FvStatus fv_flips_from_relaxation(const struct FvPermutation *perm,
                                       const char *policy,
                                       struct FvFlipSequence **out);

/**
 * Linear-cost flip sequence that allows the two downward elbows.
 *
 * # Safety
 * `perm` must be a live handle; `out` must be writable.
 */
enum FvStatus fv_flips_linear(const struct FvPermutation *perm, struct FvFlipSequence **out);

/**
 * Parse a flip sequence file.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum FvStatus fv_flips_parse(const char *text, struct FvFlipSequence **out);

/**
 * Number of flips, or 0 for a null handle.
 *
 * # Safety
 * `seq` must be null or a live handle.
 */
uintptr_t fv_flips_cost(const struct FvFlipSequence *seq);

/**
 * Replay the sequence and report whether it ends in an end state.
 *
 * # Safety
 * `seq` must be a live handle; `end_state` must be writable.
 */
enum FvStatus fv_flips_replay(const struct FvFlipSequence *seq, bool *end_state);

/**
 * Text form of the sequence; release with `fv_string_free`. Null on a null
 * handle.
 *
 * # Safety
 * `seq` must be null or a live handle.
 */
char *fv_flips_to_text(const struct FvFlipSequence *seq);

/**
 * # Safety
 * `seq` must be null or a live handle, not used afterwards.
 */
void fv_flips_free(struct FvFlipSequence *seq);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLIPVIEW_H */
