#ifndef TILESPEC_H
#define TILESPEC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_UTF8 = 2,
  TS_STATUS_PARSE_ERROR = 3,
  TS_STATUS_SEMANTIC_ERROR = 4,
  TS_STATUS_RUNTIME_ERROR = 5,
  TS_STATUS_BUFFER_TOO_SMALL = 6,
  TS_STATUS_INVALID_ARGUMENT = 7,
  TS_STATUS_PANIC = 8,
} TsStatus;

/**
 * Opaque parsed rule.
 */
typedef struct TsRule TsRule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses rule-file text into a new handle written to `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
TsStatus ts_rule_parse(const char *text, TsRule **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `rule` must come from `ts_rule_parse` and not be used afterwards.
 */
void ts_rule_free(TsRule *rule);

/**
 * Number of symbols in the rule's alphabet.
 *
 * # Safety
 * Pointers must be valid or null.
 */
TsStatus ts_rule_alphabet_len(const TsRule *rule, size_t *out);

/**
 * Runs validation; `*ok` tells whether no error-level issue was found and
 * `*n_issues` counts errors and warnings.
 *
 * # Safety
 * Pointers must be valid or null.
 */
TsStatus ts_rule_validate(const TsRule *rule, bool *ok, size_t *n_issues);

/**
 * Letters of `σ^level(letter)` as alphabet indices.
 *
 * # Safety
 * `buf` must hold `cap` elements (or be null), `len_out` must be valid.
 */
TsStatus ts_superword(const TsRule *rule,
                      uint32_t letter,
                      size_t level,
                      uint32_t *buf,
                      size_t cap,
                      size_t *len_out);

/**
 * Perron eigenvalue of the level-1 transition matrix.
 *
 * # Safety
 * Pointers must be valid or null.
 */
TsStatus ts_perron_root(const TsRule *rule, double *out);

/**
 * Letter frequencies per unit volume, in alphabet order.
 *
 * # Safety
 * `buf` must hold `cap` elements (or be null), `len_out` must be valid.
 */
TsStatus ts_letter_frequencies(const TsRule *rule, double *buf, size_t cap, size_t *len_out);

/**
 * Spectral report as JSON; free the string with `ts_string_free`.
 *
 * # Safety
 * Pointers must be valid or null.
 */
TsStatus ts_spectral_report_json(const TsRule *rule, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ts_string_free(char *s);

/**
 * Message for the last failure on this thread, empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *ts_last_error(void);

/**
 * Version of the JSON report schema.
 */
const char *ts_schema_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TILESPEC_H */
