/* SPDX-License-Identifier: Apache-2.0 */

#ifndef CROSSTALK_H
#define CROSSTALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. Values 1 to 4 match the command-line exit codes.
 */
typedef enum XtStatus {
  XT_STATUS_OK = 0,
  XT_STATUS_PARSE = 1,
  XT_STATUS_SEMANTIC = 2,
  XT_STATUS_VERIFY_FAILED = 3,
  XT_STATUS_IO = 4,
  XT_STATUS_NULL_POINTER = 5,
  XT_STATUS_INVALID_UTF8 = 6,
  XT_STATUS_PANIC = 7,
} XtStatus;

/**
 * Mapping decomposition style.
 */
typedef enum XtStyle {
  XT_STYLE_NAND_NAND = 0,
  XT_STYLE_AND_OR = 1,
} XtStyle;

/**
 * Gate template library.
 */
typedef struct XtLibrary XtLibrary;

/**
 * Mapped crosstalk netlist.
 */
typedef struct XtNetlist XtNetlist;

/**
 * Technology-independent network read from BLIF.
 */
typedef struct XtNetwork XtNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *xt_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void xt_string_free(char *s);

/**
 * The builtin template library.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum XtStatus xt_library_builtin(struct XtLibrary **out);

/**
 * Library from its JSON form.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` valid for a pointer write.
 */
enum XtStatus xt_library_from_json(const char *json, struct XtLibrary **out);

/**
 * # Safety
 * `lib` must come from this library and not be freed twice.
 */
void xt_library_free(struct XtLibrary *lib);

/**
 * Parses a BLIF network.
 *
 * # Safety
 * `blif` must be a nul-terminated string; `out` valid for a pointer write.
 */
enum XtStatus xt_network_parse_blif(const char *blif, struct XtNetwork **out);

/**
 * # Safety
 * `network` must come from this library and not be freed twice.
 */
void xt_network_free(struct XtNetwork *network);

/**
 * Parses and validates a `.xtn` netlist.
 *
 * # Safety
 * `lib` must be a live handle, `xtn` a nul-terminated string and `out`
 * valid for a pointer write.
 */
enum XtStatus xt_netlist_parse(const struct XtLibrary *lib,
                               const char *xtn,
                               struct XtNetlist **out);

/**
 * The netlist in `.xtn` form.
 *
 * # Safety
 * `netlist` must be a live handle and `out` valid for a pointer write.
 */
enum XtStatus xt_netlist_serialize(const struct XtNetlist *netlist, char **out);

/**
 * # Safety
 * `netlist` must come from this library and not be freed twice.
 */
void xt_netlist_free(struct XtNetlist *netlist);

/**
 * Maps `network` onto `lib`. `transistors` may be null.
 *
 * # Safety
 * Handles must be live; `out` valid for a pointer write; `transistors`
 * null or valid for a write.
 */
enum XtStatus xt_map(const struct XtNetwork *network,
                     const struct XtLibrary *lib,
                     enum XtStyle style,
                     uint32_t fanout_limit,
                     bool use_composites,
                     struct XtNetlist **out,
                     uint32_t *transistors);

/**
 * Transistor count under the default cost model.
 *
 * # Safety
 * Handles must be live and `out` valid for a write.
 */
enum XtStatus xt_transistor_count(const struct XtNetlist *netlist,
                                  const struct XtLibrary *lib,
                                  uint32_t *out);

/**
 * Equivalence check against `reference`: exhaustive up to 16 inputs, else
 * 10000 vectors drawn from `seed`. Returns `XT_STATUS_VERIFY_FAILED` on a
 * mismatch. `vectors` may be null.
 *
 * # Safety
 * Handles must be live; `vectors` null or valid for a write.
 */
enum XtStatus xt_verify(const struct XtNetlist *netlist,
                        const struct XtLibrary *lib,
                        const struct XtNetwork *reference,
                        uint64_t seed,
                        uint64_t *vectors);

/**
 * Simulates under a stimulus text and returns the VCD dump. `settle` of 0
 * selects the default settle time.
 *
 * # Safety
 * Handles must be live, `stimulus` a nul-terminated string and `out` valid
 * for a pointer write.
 */
enum XtStatus xt_simulate_vcd(const struct XtNetlist *netlist,
                              const struct XtLibrary *lib,
                              const char *stimulus,
                              uint32_t settle,
                              char **out);

/**
 * Binds the free controls, in netlist order, to the hex key.
 *
 * # Safety
 * `netlist` must be live, `hex` a nul-terminated string and `out` valid for
 * a pointer write.
 */
enum XtStatus xt_apply_key(const struct XtNetlist *netlist,
                           const char *hex,
                           struct XtNetlist **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROSSTALK_H */
