#ifndef MULTIUNIT_H
#define MULTIUNIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MuStatus {
  MU_STATUS_OK = 0,
  MU_STATUS_NULL_ARGUMENT = 1,
  MU_STATUS_INVALID_UTF8 = 2,
  MU_STATUS_PARSE = 3,
  MU_STATUS_INVALID = 4,
  MU_STATUS_LIMIT = 5,
  MU_STATUS_UNSUPPORTED = 6,
  MU_STATUS_BUFFER_TOO_SMALL = 7,
  MU_STATUS_PANIC = 8,
} MuStatus;

typedef struct MuMarket MuMarket;

typedef struct MuPrices MuPrices;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *mu_last_error(void);

const char *mu_version(void);

/**
 * # Safety
 * `s` must be null or come from this library.
 */
void mu_string_free(char *s);

/**
 * Parses `{"m": .., "agents": [{"values": [..]}, ..]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum MuStatus mu_market_from_json(const char *json, struct MuMarket **out);

/**
 * # Safety
 * `market` must be null or come from `mu_market_from_json`.
 */
void mu_market_free(struct MuMarket *market);

/**
 * # Safety
 * `market` must be a live handle or null.
 */
size_t mu_market_agents(const struct MuMarket *market);

/**
 * # Safety
 * `market` must be a live handle or null.
 */
size_t mu_market_items(const struct MuMarket *market);

/**
 * Parses `{"prices": [..]}` or `{"uniform": ".."}` for `m` items.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum MuStatus mu_prices_from_json(const char *json, size_t m, struct MuPrices **out);

/**
 * The same price, given as a rational string, on all `m` items.
 *
 * # Safety
 * `price` must be a nul-terminated string and `out` writable.
 */
enum MuStatus mu_prices_uniform(const char *price, size_t m, struct MuPrices **out);

/**
 * # Safety
 * `prices` must be null or come from this library.
 */
void mu_prices_free(struct MuPrices *prices);

/**
 * Optimal welfare as a string. If `allocation` is non-null it receives one
 * quantity per agent and must hold `mu_market_agents` entries.
 *
 * # Safety
 * Pointers must be valid as described.
 */
enum MuStatus mu_opt(const struct MuMarket *market,
                     char **welfare,
                     size_t *allocation,
                     size_t allocation_len);

/**
 * Minimum welfare over arrival orders and utility-maximizing tie choices.
 * `order` receives the witness order when non-null and long enough.
 *
 * # Safety
 * Pointers must be valid as described.
 */
enum MuStatus mu_worst_case(const struct MuMarket *market,
                            const struct MuPrices *prices,
                            char **welfare,
                            size_t *order,
                            size_t order_len);

/**
 * Runs a named scheme (e.g. `"uniform-half"`) and writes its full result as
 * JSON. `order` (length `mu_market_agents`) is only read by `known-order`.
 *
 * # Safety
 * Pointers must be valid as described.
 */
enum MuStatus mu_scheme(const char *scheme,
                        const struct MuMarket *market,
                        const size_t *order,
                        char **result_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIUNIT_H */
