#ifndef TICKSPIKE_H
#define TICKSPIKE_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_ARGUMENT = 1,
  TS_STATUS_INVALID_UTF8 = 2,
  TS_STATUS_INVALID_CONFIG = 3,
  TS_STATUS_DATA_ERROR = 4,
  TS_STATUS_RUNTIME_ERROR = 5,
} TsStatus;

/**
 * Opaque trained-model handle.
 */
typedef struct TsModel TsModel;

/**
 * Opaque spike tensor handle.
 */
typedef struct TsTensor TsTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *ts_version(void);

/**
 * Message for the most recent error on this thread; valid until the next
 * failing call from the same thread.
 */
const char *ts_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `ptr` must have been produced by a `ts_*` function returning an owned
 * string, and must not be used afterwards.
 */
void ts_string_free(char *ptr);

/**
 * Generate synthetic tick days from a JSON config and write one CSV per
 * day under `out_dir`.
 *
 * # Safety
 * Both pointers must be valid NUL-terminated strings.
 */
enum TsStatus ts_synth_write(const char *config_json, const char *out_dir);

/**
 * Preprocess the first trading day of a tick CSV into a spike tensor:
 * VWAP aggregation, features per the model spec, normalization fitted on
 * the day itself, Poisson encoding. Writes the tensor container to
 * `out_spk` and returns the day's VWAP length via `out_n_bars`.
 *
 * # Safety
 * String pointers must be valid NUL-terminated strings; `out_n_bars` may
 * be null.
 */
enum TsStatus ts_encode_csv(const char *ticks_csv,
                            const char *prep_json,
                            const char *model_spec_json,
                            uint64_t encode_seed,
                            const char *out_spk,
                            uintptr_t *out_n_bars);

/**
 * Load a spike-tensor container.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum TsStatus ts_tensor_load(const char *path, struct TsTensor **out);

/**
 * Tensor shape: timestamps, channels, timesteps.
 *
 * # Safety
 * `tensor` must be a live handle; out pointers may be null.
 */
enum TsStatus ts_tensor_shape(const struct TsTensor *tensor,
                              uintptr_t *out_timestamps,
                              uintptr_t *out_channels,
                              uintptr_t *out_timesteps);

/**
 * Read one bit of the tensor (1 = spike).
 *
 * # Safety
 * `tensor` must be a live handle and `out` a valid pointer.
 */
enum TsStatus ts_tensor_spike(const struct TsTensor *tensor,
                              uintptr_t timestamp,
                              uintptr_t channel,
                              uintptr_t timestep,
                              uint8_t *out);

/**
 * # Safety
 * `tensor` must be a handle from this library, not used afterwards.
 */
void ts_tensor_free(struct TsTensor *tensor);

/**
 * Train a model described by a JSON model spec on a tensor.
 *
 * `labels` may be null for unsupervised specs; otherwise it must hold one
 * byte per timestamp: 0 = not a real spike, 1 = real spike, 2 = unlabeled.
 *
 * # Safety
 * Pointers must be valid; `labels`, when non-null, must point at
 * `labels_len` bytes.
 */
enum TsStatus ts_model_train(const char *model_spec_json,
                             const struct TsTensor *tensor,
                             const uint8_t *labels,
                             uintptr_t labels_len,
                             uint64_t init_seed,
                             uint64_t train_seed,
                             struct TsModel **out);

/**
 * Predict one boolean per tensor timestamp into `out_buf`.
 *
 * # Safety
 * `model` and `tensor` must be live handles; `out_buf` must hold at least
 * `buf_len >= n_timestamps` bytes.
 */
enum TsStatus ts_model_predict(struct TsModel *model,
                               const struct TsTensor *tensor,
                               uint8_t *out_buf,
                               uintptr_t buf_len);

/**
 * Write the model checkpoint (topology, weights, decoding threshold) as
 * JSON.
 *
 * # Safety
 * `model` must be a live handle and `path` a valid string.
 */
enum TsStatus ts_model_save(const struct TsModel *model, const char *path);

/**
 * Load a checkpoint back into a model handle.
 *
 * # Safety
 * `path` must be a valid string and `out` a valid pointer.
 */
enum TsStatus ts_model_load(const char *path, struct TsModel **out);

/**
 * # Safety
 * `model` must be a handle from this library, not used afterwards.
 */
void ts_model_free(struct TsModel *model);

/**
 * Label a VWAP series, evaluate predictions against it, and return the
 * metric bundle as a JSON string (release it with `ts_string_free`).
 *
 * # Safety
 * `predictions` and `vwap` must point at `len` elements; `out_json` must
 * be a valid pointer.
 */
enum TsStatus ts_evaluate(const uint8_t *predictions,
                          const double *vwap,
                          uintptr_t len,
                          uintptr_t label_window,
                          double alpha,
                          char **out_json);

/**
 * Penalised spike accuracy and spike-rate deviation.
 *
 * # Safety
 * Out pointers must be valid.
 */
enum TsStatus ts_psa(double spike_accuracy,
                     double spiking_rate,
                     double real_spiking_rate,
                     double alpha,
                     double *out_psa,
                     double *out_srd);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TICKSPIKE_H */
