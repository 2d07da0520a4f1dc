/* C interface to the dyncomplete library. */

#ifndef DYNCOMPLETE_H
#define DYNCOMPLETE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Opaque handle over a built Hom table.
 */
typedef struct DynTable DynTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *dyncomplete_version(void);

/**
 * Last error message on this thread, or NULL. The caller frees the string.
 */
char *dyncomplete_last_error(void);

/**
 * Builds the Hom table of a Dynkin quiver given as JSON. Returns NULL on
 * failure.
 *
 * # Safety
 * `quiver_json` must be a valid NUL-terminated string.
 */
struct DynTable *dyncomplete_table_new(const char *quiver_json, uint64_t seed);

/**
 * Releases a table handle. NULL is ignored.
 *
 * # Safety
 * `t` must have come from [`dyncomplete_table_new`] and not be freed twice.
 */
void dyncomplete_table_free(struct DynTable *t);

/**
 * Full dimension-table report as JSON.
 *
 * # Safety
 * `t` must be a live table handle.
 */
char *dyncomplete_table_report(const struct DynTable *t);

/**
 * All thick subcategories (= all completions) as JSON.
 *
 * # Safety
 * `t` must be a live table handle.
 */
char *dyncomplete_enumerate_thick(const struct DynTable *t, uintptr_t cap);

/**
 * Completion report for a metric given as JSON.
 *
 * # Safety
 * `t` must be a live table handle; `metric_json` a valid NUL-terminated
 * string.
 */
char *dyncomplete_completion(const struct DynTable *t, const char *metric_json);

/**
 * Compactly and weakly compactly supported objects as JSON.
 *
 * # Safety
 * As for [`dyncomplete_completion`].
 */
char *dyncomplete_supports(const struct DynTable *t, const char *metric_json);

/**
 * Metric axioms verdict as JSON.
 *
 * # Safety
 * As for [`dyncomplete_completion`].
 */
char *dyncomplete_metric_check(const struct DynTable *t, const char *metric_json);

/**
 * Improvement (coarsest good refinement) of a metric, as metric JSON.
 *
 * # Safety
 * As for [`dyncomplete_completion`].
 */
char *dyncomplete_metric_improve(const struct DynTable *t, const char *metric_json);

/**
 * Refinement comparison of two metrics; the verdict is one of
 * "m1 <= m2", "m2 <= m1", "equivalent", "incomparable", "unknown".
 *
 * # Safety
 * As for [`dyncomplete_completion`].
 */
char *dyncomplete_metric_compare(const struct DynTable *t,
                                 const char *metric1_json,
                                 const char *metric2_json);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a function of this library and not freed
 * before.
 */
void dyncomplete_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DYNCOMPLETE_H */
