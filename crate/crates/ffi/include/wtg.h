#ifndef WTG_H
#define WTG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum {
  WTG_STATUS_OK = 0,
  WTG_STATUS_NULL_POINTER = 1,
  WTG_STATUS_INVALID_UTF8 = 2,
  WTG_STATUS_PARSE_ERROR = 3,
  WTG_STATUS_INVALID_GAME = 4,
  WTG_STATUS_NOT_ALMOST_NON_ZENO = 5,
  WTG_STATUS_UNBOUNDED_CLOCK = 6,
  WTG_STATUS_TOO_MANY_CLOCKS = 7,
  WTG_STATUS_SOLVER_ERROR = 8,
  WTG_STATUS_PANIC = 9,
} WtgStatus;

/**
 * A parsed game.
 */
typedef struct WtgGame WtgGame;

/**
 * The outcome of solving a game.
 */
typedef struct WtgVerdict WtgVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *wtg_last_error(void);

/**
 * Parses a game from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
WtgStatus wtg_game_from_json(const char *json, WtgGame **out);

/**
 * Releases a game; null is ignored.
 *
 * # Safety
 * `g` must come from [`wtg_game_from_json`] and not be used afterwards.
 */
void wtg_game_free(WtgGame *g);

/**
 * Number of clocks of a game, or -1 for null.
 *
 * # Safety
 * `g` must be null or a live game.
 */
int32_t wtg_game_num_clocks(const WtgGame *g);

/**
 * Solves a game exactly.
 *
 * # Safety
 * `g` must be a live game and `out` a valid pointer.
 */
WtgStatus wtg_solve(const WtgGame *g, WtgVerdict **out);

/**
 * Releases a verdict; null is ignored.
 *
 * # Safety
 * `v` must come from [`wtg_solve`] and not be used afterwards.
 */
void wtg_verdict_free(WtgVerdict *v);

/**
 * Whether the value is `+∞` (Min cannot force a goal).
 *
 * # Safety
 * `v` must be a live verdict.
 */
bool wtg_verdict_is_infinite(const WtgVerdict *v);

/**
 * The value as a newly allocated `"p/q"` (or `"+inf"`) string, to be
 * released with [`wtg_string_free`].
 *
 * # Safety
 * `v` must be a live verdict and `out` a valid pointer.
 */
WtgStatus wtg_verdict_value(const WtgVerdict *v, char **out);

/**
 * The value as a double, `INFINITY` when infinite, NaN for null.
 *
 * # Safety
 * `v` must be null or a live verdict.
 */
double wtg_verdict_value_f64(const WtgVerdict *v);

/**
 * Compares a verdict with a `"p/q"` threshold: `*at_most` is set to 1 when
 * the value is at most the threshold and 0 otherwise.
 *
 * # Safety
 * `v` must be a live verdict, `threshold` a NUL-terminated string and
 * `at_most` a valid pointer.
 */
WtgStatus wtg_verdict_decide(const WtgVerdict *v, const char *threshold, int32_t *at_most);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void wtg_string_free(char *s);

/**
 * Library version, as a static NUL-terminated string.
 */
const char *wtg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WTG_H */
