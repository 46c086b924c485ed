#ifndef NOISEMAP_H
#define NOISEMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum NmStatus {
  NM_STATUS_OK = 0,
  NM_STATUS_NULL_POINTER = 1,
  NM_STATUS_INVALID_ARGUMENT = 2,
  NM_STATUS_IO = 3,
  NM_STATUS_PARSE = 4,
  NM_STATUS_MODEL = 5,
  /**
   * A Rust panic was caught at the boundary; the handle may be unusable.
   */
  NM_STATUS_INTERNAL = 6,
} NmStatus;

/**
 * Sound level meter handle.
 */
typedef struct NmMeter NmMeter;

/**
 * Trained classifier and regressor.
 */
typedef struct NmModels NmModels;

/**
 * Per-area map pipeline.
 */
typedef struct NmPipeline NmPipeline;

/**
 * Output of one map update.
 */
typedef struct NmTick {
  double p_event;
  /**
   * 1 if a source was predicted; `x`, `y`, `level` are then valid.
   */
  uint8_t has_source;
  double x;
  double y;
  double level;
  /**
   * 1 if fewer than two nodes have ever delivered.
   */
  uint8_t degraded;
} NmTick;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 */
size_t nm_last_error(char *buf, size_t len);

/**
 * On-air time in seconds and payload symbols for the default radio
 * (125 kHz, CR 4/5, CRC on, 8-symbol preamble) at `sf` and `payload_len`.
 */
enum NmStatus nm_airtime(uint8_t sf,
                         uint32_t payload_len,
                         double *out_seconds,
                         uint32_t *out_symbols);

/**
 * Two-byte uplink payload for one measurement.
 */
enum NmStatus nm_encode_sample(double laf_db, double laeq_db, uint8_t *out_payload);

/**
 * Meter with the default configuration at `sample_rate` and `frame_len`.
 */
enum NmStatus nm_meter_new(double sample_rate, size_t frame_len, struct NmMeter **out);

/**
 * Filters one raw frame; writes L_AF and the running L_Aeq in dB.
 */
enum NmStatus nm_meter_process(struct NmMeter *meter,
                               const double *frame,
                               size_t len,
                               double *out_laf,
                               double *out_laeq);

void nm_meter_free(struct NmMeter *meter);

/**
 * Loads `classifier.json` and `regressor.json` from directory `dir`.
 */
enum NmStatus nm_models_load(const char *dir, struct NmModels **out);

void nm_models_free(struct NmModels *models);

/**
 * Pipeline over `models` with the default fusion filter and threshold 0.5.
 * `held_out` is a node index whose data is ignored, or -1.
 */
enum NmStatus nm_pipeline_new(const struct NmModels *models,
                              int32_t held_out,
                              struct NmPipeline **out);

/**
 * Delivers one 2-byte payload from `node_id` measured at `t` seconds.
 */
enum NmStatus nm_pipeline_ingest(struct NmPipeline *pipeline,
                                 uint16_t node_id,
                                 double t,
                                 const uint8_t *payload);

/**
 * Map update at `t` seconds.
 */
enum NmStatus nm_pipeline_tick(struct NmPipeline *pipeline, double t, struct NmTick *out);

void nm_pipeline_free(struct NmPipeline *pipeline);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOISEMAP_H */
