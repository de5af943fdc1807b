#ifndef DMIAT_H
#define DMIAT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DmiatCriterionKind {
  DMIAT_CRITERION_KIND_ENTROPY_ZERO = 0,
  DMIAT_CRITERION_KIND_LIFT = 1,
} DmiatCriterionKind;

typedef enum DmiatDirection {
  DMIAT_DIRECTION_LOW = 0,
  DMIAT_DIRECTION_HIGH = 1,
} DmiatDirection;

typedef enum DmiatFormat {
  DMIAT_FORMAT_CSV = 0,
  DMIAT_FORMAT_KEEL = 1,
} DmiatFormat;

typedef enum DmiatStatus {
  DMIAT_STATUS_OK = 0,
  DMIAT_STATUS_NULL_ARGUMENT = 1,
  DMIAT_STATUS_INVALID_UTF8 = 2,
  DMIAT_STATUS_PARSE = 3,
  DMIAT_STATUS_IO = 4,
  DMIAT_STATUS_INVALID_CONFIG = 5,
  DMIAT_STATUS_SCHEMA = 6,
  DMIAT_STATUS_DOMAIN = 7,
  DMIAT_STATUS_OUT_OF_RANGE = 8,
  DMIAT_STATUS_EMPTY = 9,
  DMIAT_STATUS_PANIC = 10,
} DmiatStatus;

/**
 * Cuts generated from one dataset.
 */
typedef struct DmiatCuts DmiatCuts;

/**
 * A parsed table.
 */
typedef struct DmiatDataset DmiatDataset;

/**
 * One cut feature. `lift_threshold` is 0 for the entropy criterion.
 */
typedef struct DmiatCutInfo {
  size_t attr;
  enum DmiatDirection direction;
  double threshold;
  enum DmiatCriterionKind criterion;
  double lift_threshold;
  size_t target_class;
  size_t subset_size;
  size_t subset_class_count;
  double score;
} DmiatCutInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success. The
 * pointer stays valid until the next call into this library from the same thread.
 */
const char *dmiat_last_error_message(void);

/**
 * Parses CSV or KEEL text into a new dataset handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum DmiatStatus dmiat_dataset_parse(const char *text,
                                     enum DmiatFormat format,
                                     struct DmiatDataset **out);

/**
 * Loads a dataset from disk; `.dat` and `.keel` files are read as KEEL, others as CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DmiatStatus dmiat_dataset_load(const char *path, struct DmiatDataset **out);

/**
 * # Safety
 * `ds` must be null or a handle from this library that was not freed yet.
 */
void dmiat_dataset_free(struct DmiatDataset *ds);

/**
 * Row count, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t dmiat_dataset_n_rows(const struct DmiatDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t dmiat_dataset_n_attributes(const struct DmiatDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t dmiat_dataset_n_classes(const struct DmiatDataset *ds);

/**
 * Class id of every row, written to `out` (capacity `len` ≥ row count).
 *
 * # Safety
 * `ds` must be a live handle; `out` must hold `len` elements.
 */
enum DmiatStatus dmiat_dataset_labels(const struct DmiatDataset *ds, size_t *out, size_t len);

/**
 * Stratified k-fold split: writes the test-fold index of every row to `out`.
 *
 * # Safety
 * `ds` must be a live handle; `out` must hold `len` elements.
 */
enum DmiatStatus dmiat_kfold_assign(const struct DmiatDataset *ds,
                                    size_t k,
                                    uint64_t seed,
                                    size_t *out,
                                    size_t len);

/**
 * Generates cuts from the given training rows (all rows when `n_train` is 0).
 * `criteria` is a comma-separated list such as `"entropy0,lift1.5,lift2.0"`.
 *
 * # Safety
 * `ds` must be a live handle; `train_rows` must hold `n_train` elements;
 * `criteria` must be a NUL-terminated string; `out` must be writable.
 */
enum DmiatStatus dmiat_cuts_generate(const struct DmiatDataset *ds,
                                     const size_t *train_rows,
                                     size_t n_train,
                                     double supp_fraction,
                                     const char *criteria,
                                     struct DmiatCuts **out);

/**
 * # Safety
 * `cuts` must be null or a handle from this library that was not freed yet.
 */
void dmiat_cuts_free(struct DmiatCuts *cuts);

/**
 * Number of cuts, or 0 for a null handle.
 *
 * # Safety
 * `cuts` must be null or a live handle.
 */
size_t dmiat_cuts_len(const struct DmiatCuts *cuts);

/**
 * # Safety
 * `cuts` must be a live handle; `out` must be writable.
 */
enum DmiatStatus dmiat_cuts_get(const struct DmiatCuts *cuts,
                                size_t index,
                                struct DmiatCutInfo *out);

/**
 * Indicator values (0 or 1, one per cut) for one row of `ds`. Missing values map to 0.
 *
 * # Safety
 * `cuts` and `ds` must be live handles; `out` must hold `len` elements.
 */
enum DmiatStatus dmiat_cuts_apply(const struct DmiatCuts *cuts,
                                  const struct DmiatDataset *ds,
                                  size_t row,
                                  uint8_t *out,
                                  size_t len);

/**
 * Tab-separated export of the cuts; free the string with [`dmiat_string_free`].
 *
 * # Safety
 * `cuts` must be a live handle; `out` must be writable.
 */
enum DmiatStatus dmiat_cuts_export(const struct DmiatCuts *cuts, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library that was not freed yet.
 */
void dmiat_string_free(char *s);

/**
 * Shannon entropy in bits of a class-count vector.
 *
 * # Safety
 * `counts` must hold `n` elements; `out` must be writable.
 */
enum DmiatStatus dmiat_entropy(const size_t *counts, size_t n, double *out);

/**
 * Lift of `target` in a subset relative to the whole population; both count
 * vectors hold `n` classes.
 *
 * # Safety
 * `subset` and `whole` must hold `n` elements; `out` must be writable.
 */
enum DmiatStatus dmiat_lift(const size_t *subset,
                            const size_t *whole,
                            size_t n,
                            size_t target,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DMIAT_H */
