#ifndef VIEWPULSE_H
#define VIEWPULSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum VpStatus {
  VP_STATUS_OK = 0,
  VP_STATUS_NULL_POINTER = 1,
  VP_STATUS_INVALID_ARGUMENT = 2,
  VP_STATUS_IO = 3,
  VP_STATUS_FORMAT = 4,
  VP_STATUS_DIMENSION = 5,
  VP_STATUS_UNDEFINED_CORRELATION = 6,
  VP_STATUS_MISSING_DATA = 7,
  VP_STATUS_PANIC = 8,
} VpStatus;

/*
 A `rows x cols` feature matrix, row-major.
 */
typedef struct VpFeatures VpFeatures;

/*
 A trained model loaded from a checkpoint file.
 */
typedef struct VpModel VpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *vp_version(void);

/*
 Message of the last failure on this thread, or NULL. Valid until the
 next failing call on the same thread.
 */
const char *vp_last_error(void);

/*
 Loads a checkpoint. On success `*out` owns a new handle.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum VpStatus vp_model_load(const char *path, struct VpModel **out);

/*
 Releases a model handle. NULL is ignored.

 # Safety
 `model` must come from [`vp_model_load`] and not be used afterwards.
 */
void vp_model_free(struct VpModel *model);

/*
 Architecture name, e.g. `high-fusion`; NULL for a NULL handle.

 # Safety
 `model` must be NULL or a live handle.
 */
const char *vp_model_kind(const struct VpModel *model);

/*
 Expected feature widths; 0 for a modality the model does not use.

 # Safety
 All pointers must be valid.
 */
enum VpStatus vp_model_dims(const struct VpModel *model, size_t *visual_dim, size_t *audio_dim);

/*
 Predicts `t` per-second values into `out`. `visual` holds `t x visual_dim`
 and `audio` holds `t x audio_dim` values, row-major; a modality the
 model does not use may be NULL.

 # Safety
 Buffers must hold the stated number of values.
 */
enum VpStatus vp_model_predict(const struct VpModel *model,
                               const double *visual,
                               const double *audio,
                               size_t t,
                               double *out);

/*
 Reads an FVSEQ1 feature file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum VpStatus vp_features_read(const char *path, struct VpFeatures **out);

/*
 Extracts `T x 26` MFCC features from a PCM16 or float32 WAV file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum VpStatus vp_features_from_wav(const char *path, struct VpFeatures **out);

/*
 Number of rows (seconds); 0 for NULL.

 # Safety
 `f` must be NULL or a live handle.
 */
size_t vp_features_rows(const struct VpFeatures *f);

/*
 Number of columns (feature width); 0 for NULL.

 # Safety
 `f` must be NULL or a live handle.
 */
size_t vp_features_cols(const struct VpFeatures *f);

/*
 Row-major values, valid while the handle lives; NULL for NULL.

 # Safety
 `f` must be NULL or a live handle.
 */
const double *vp_features_data(const struct VpFeatures *f);

/*
 Releases a feature handle. NULL is ignored.

 # Safety
 `f` must come from a `vp_features_*` constructor and not be used afterwards.
 */
void vp_features_free(struct VpFeatures *f);

/*
 Mean absolute error of `n` pairs.

 # Safety
 `a` and `b` must hold `n` values; `out` must be valid.
 */
enum VpStatus vp_mae(const double *p, const double *y, size_t n, double *out);

/*
 Root mean squared error.

 # Safety
 As [`vp_mae`].
 */
enum VpStatus vp_rmse(const double *p, const double *y, size_t n, double *out);

/*
 Root mean squared log error, `1 + x` clamped at 1e-9.

 # Safety
 As [`vp_mae`].
 */
enum VpStatus vp_rmsle(const double *p, const double *y, size_t n, double *out);

/*
 Pearson correlation.

 # Safety
 As [`vp_mae`].
 */
enum VpStatus vp_pcc(const double *a, const double *b, size_t n, double *out);

/*
 Cosine similarity.

 # Safety
 As [`vp_mae`].
 */
enum VpStatus vp_cosine(const double *a, const double *b, size_t n, double *out);

/*
 Spearman rank correlation with average ranks for ties.

 # Safety
 As [`vp_mae`].
 */
enum VpStatus vp_srcc(const double *a, const double *b, size_t n, double *out);

/*
 `3·srcc − mae − rmse − rmsle`.
 */
double vp_composite(double mae, double rmse, double rmsle, double srcc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VIEWPULSE_H */
