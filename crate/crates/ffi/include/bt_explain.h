#ifndef BT_EXPLAIN_H
#define BT_EXPLAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum BtStatus {
  BT_STATUS_OK = 0,
  BT_STATUS_NULL_POINTER = 1,
  BT_STATUS_INVALID_STRING = 2,
  BT_STATUS_IO = 3,
  BT_STATUS_INVALID_MODEL = 4,
  BT_STATUS_INVALID_ARGUMENT = 5,
  BT_STATUS_SEED_NOT_ABDUCTIVE = 6,
  BT_STATUS_PANIC = 7,
} BtStatus;

typedef enum BtVerdict {
  BT_VERDICT_PROVED = 0,
  BT_VERDICT_DISPROVED = 1,
  BT_VERDICT_TIMEOUT = 2,
} BtVerdict;

// A loaded model.
typedef struct BtModel BtModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *bt_last_error(void);

// Loads a model in the native JSON format.
//
// # Safety
// `path` must be a nul-terminated string and `out_model` a valid pointer.
enum BtStatus bt_model_load_native(const char *path, struct BtModel **out_model);

// Parses a model in the native JSON format from a string.
//
// # Safety
// `json` must be a nul-terminated string and `out_model` a valid pointer.
enum BtStatus bt_model_from_native_json(const char *json, struct BtModel **out_model);

// Loads an XGBoost JSON dump. `num_class` 0 takes the class count from the
// file (1 means binary).
//
// # Safety
// `path` must be a nul-terminated string and `out_model` a valid pointer.
enum BtStatus bt_model_load_xgboost(const char *path,
                                    size_t num_class,
                                    size_t tie_class,
                                    struct BtModel **out_model);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from a `bt_model_*` constructor and not be used again.
void bt_model_free(struct BtModel *model);

// Number of attributes, or 0 for a null model.
//
// # Safety
// `model` must be null or a live model.
size_t bt_model_attribute_count(const struct BtModel *model);

// Number of classes, or 0 for a null model.
//
// # Safety
// `model` must be null or a live model.
size_t bt_model_class_count(const struct BtModel *model);

// Predicted class of an instance.
//
// # Safety
// `values` must point to `len` doubles and `out_class` must be valid.
enum BtStatus bt_classify(const struct BtModel *model,
                          const double *values,
                          size_t len,
                          size_t *out_class);

// Shortest tree-specific explanation over `runs` random elimination orders.
//
// # Safety
// `values` must point to `len` doubles and `out_mask` to `mask_len` bytes.
enum BtStatus bt_explain_ts(const struct BtModel *model,
                            const double *values,
                            size_t len,
                            size_t runs,
                            uint64_t seed,
                            uint8_t *out_mask,
                            size_t mask_len);

// Sufficient reason by elimination from the full instance, in attribute
// order. `out_minimal` is set to whether minimality was proved within
// `timeout_secs`.
//
// # Safety
// `values` must point to `len` doubles, `out_mask` to `mask_len` bytes and
// `out_minimal` must be valid.
enum BtStatus bt_explain_sr(const struct BtModel *model,
                            const double *values,
                            size_t len,
                            double timeout_secs,
                            uint8_t *out_mask,
                            size_t mask_len,
                            bool *out_minimal);

// Sufficient reason by elimination from the shortest tree-specific
// explanation over `runs` orders; the time limit covers both stages.
//
// # Safety
// As for `bt_explain_sr`.
enum BtStatus bt_explain_pipeline(const struct BtModel *model,
                                  const double *values,
                                  size_t len,
                                  size_t runs,
                                  uint64_t seed,
                                  double timeout_secs,
                                  uint8_t *out_mask,
                                  size_t mask_len,
                                  bool *out_minimal);

// Decides whether the masked term is an abductive explanation of the
// instance.
//
// # Safety
// `values` must point to `len` doubles, `mask` to `mask_len` bytes and
// `out_verdict` must be valid.
enum BtStatus bt_check_abductive(const struct BtModel *model,
                                 const double *values,
                                 size_t len,
                                 const uint8_t *mask,
                                 size_t mask_len,
                                 double timeout_secs,
                                 enum BtVerdict *out_verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BT_EXPLAIN_H */
