/*
 * Copyright 2026 The pcnfish Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef PCNFISH_PCNFISH_H_
#define PCNFISH_PCNFISH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PCNFISH_BUILDING)
#define PCNFISH_API __declspec(dllexport)
#else
#define PCNFISH_API __declspec(dllimport)
#endif
#else
#define PCNFISH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcnf_status {
  PCNF_OK = 0,
  PCNF_INVALID_ARGUMENT = 1,
  PCNF_DOMAIN = 2,
  PCNF_SINGULARITY = 3,
  PCNF_OUT_OF_RANGE = 4,
  PCNF_PRECONDITION = 5,
  PCNF_SAMPLING_FAILURE = 6,
  PCNF_FLOW_GENERATION = 7,
  PCNF_FIT_FAILURE = 8,
  PCNF_IO = 9,
  PCNF_FORMAT = 10,
  PCNF_INTERNAL = 99
} pcnf_status;

typedef enum pcnf_radial_kind { PCNF_POLYNOMIAL = 0, PCNF_DIVISION = 1 } pcnf_radial_kind;

typedef struct pcnf_model pcnf_model;
typedef struct pcnf_image pcnf_image;
typedef struct pcnf_flow pcnf_flow;
typedef struct pcnf_pyramid pcnf_pyramid;

/* Library version string, e.g. "0.1.0". */
PCNFISH_API const char* pcnf_version(void);
PCNFISH_API const char* pcnf_status_string(pcnf_status status);
/* Message of the last failed call on this thread; "" after success. */
PCNFISH_API const char* pcnf_last_error(void);

/* Radial models. pcnf_model_create centers the model on a width x height
 * frame with norm_radius = width / 2. */
PCNFISH_API pcnf_status pcnf_model_create(pcnf_radial_kind kind, const double* coeffs,
                                          size_t n, int width, int height,
                                          pcnf_model** out);
PCNFISH_API pcnf_status pcnf_model_create_full(pcnf_radial_kind kind, const double* coeffs,
                                               size_t n, double cx, double cy,
                                               double norm_radius, pcnf_model** out);
PCNFISH_API pcnf_status pcnf_model_sample(uint64_t seed, int side, pcnf_model** out);
PCNFISH_API pcnf_status pcnf_model_load(const char* path, pcnf_model** out);
PCNFISH_API pcnf_status pcnf_model_save(const pcnf_model* model, const char* path);
PCNFISH_API pcnf_status pcnf_model_rescale(const pcnf_model* model, double factor,
                                           pcnf_model** out);
PCNFISH_API void pcnf_model_destroy(pcnf_model* model);
/* Copies up to cap coefficients; *n receives the full count. */
PCNFISH_API pcnf_status pcnf_model_coeffs(const pcnf_model* model, double* coeffs,
                                          size_t cap, size_t* n);
PCNFISH_API pcnf_status pcnf_model_geometry(const pcnf_model* model, double* cx, double* cy,
                                            double* norm_radius);
PCNFISH_API pcnf_status pcnf_forward_radius(const pcnf_model* model, double r_d,
                                            double* r_u);
PCNFISH_API pcnf_status pcnf_invert_radius(const pcnf_model* model, double r_u, double tol,
                                           double* r_d);
PCNFISH_API pcnf_status pcnf_is_monotone(const pcnf_model* model, double r_max, int* out);

/* Images hold interleaved channels in [0, 1]. */
PCNFISH_API pcnf_status pcnf_image_create(int width, int height, int channels,
                                          const double* data, pcnf_image** out);
PCNFISH_API pcnf_status pcnf_image_load_png(const char* path, pcnf_image** out);
PCNFISH_API pcnf_status pcnf_image_save_png(const pcnf_image* image, const char* path);
PCNFISH_API void pcnf_image_destroy(pcnf_image* image);
PCNFISH_API pcnf_status pcnf_image_shape(const pcnf_image* image, int* width, int* height,
                                         int* channels);
PCNFISH_API const double* pcnf_image_data(const pcnf_image* image);

/* Flows hold interleaved (du, dv) pairs; source = target + displacement. */
PCNFISH_API pcnf_status pcnf_flow_create(int width, int height, const double* data,
                                         pcnf_flow** out);
PCNFISH_API pcnf_status pcnf_flow_load(const char* path, pcnf_flow** out);
PCNFISH_API pcnf_status pcnf_flow_save(const pcnf_flow* flow, const char* path);
PCNFISH_API void pcnf_flow_destroy(pcnf_flow* flow);
PCNFISH_API pcnf_status pcnf_flow_shape(const pcnf_flow* flow, int* width, int* height);
PCNFISH_API const double* pcnf_flow_data(const pcnf_flow* flow);
PCNFISH_API pcnf_status pcnf_flow_max_displacement(const pcnf_flow* flow, double* out);
/* scale_px <= 0 normalizes by the field's maximum. */
PCNFISH_API pcnf_status pcnf_flow_magnitude_image(const pcnf_flow* flow, double scale_px,
                                                  pcnf_image** out);

PCNFISH_API pcnf_status pcnf_gt_flow(const pcnf_model* model, int width, int height,
                                     pcnf_flow** out);
PCNFISH_API pcnf_status pcnf_build_pyramid(const pcnf_model* model, int base, int levels,
                                           pcnf_pyramid** out);
PCNFISH_API size_t pcnf_pyramid_levels(const pcnf_pyramid* pyramid);
/* Borrowed pointer, valid until the pyramid is destroyed. */
PCNFISH_API const pcnf_flow* pcnf_pyramid_level(const pcnf_pyramid* pyramid, size_t level);
PCNFISH_API void pcnf_pyramid_destroy(pcnf_pyramid* pyramid);

/* border: 0 zeros, 1 clamp. */
PCNFISH_API pcnf_status pcnf_warp(const pcnf_image* image, const pcnf_flow* flow,
                                  int border, pcnf_image** out);
/* mask_out may be NULL; otherwise receives a 1-channel 0/1 image. */
PCNFISH_API pcnf_status pcnf_distort(const pcnf_image* image, const pcnf_model* model,
                                     int circular, pcnf_image** fisheye_out,
                                     pcnf_image** mask_out);
PCNFISH_API pcnf_status pcnf_rectify(const pcnf_image* fisheye, const pcnf_model* model,
                                     pcnf_image** out);

/* Pipelines. manifest_path_out and similar buffers may be NULL. */
typedef struct pcnf_synth_options {
  const char* src_dir;
  const char* out_dir;
  int count;
  uint64_t seed;
  int size;
  int circular_mask;
} pcnf_synth_options;

PCNFISH_API pcnf_status pcnf_synth_dataset(const pcnf_synth_options* options,
                                           char* manifest_path_out, size_t cap);

typedef struct pcnf_train_options {
  const char* data_dir;
  const char* checkpoint_path; /* required */
  const char* loss_csv_path;   /* NULL skips the curve */
  int iters;
  int batch;
  uint64_t seed;
  double lr;
  int input_side;
  /* Layer k (1-based) is left uncorrected when uncorrected_mask bit k-1 is set. */
  uint32_t uncorrected_mask;
  int checkpoint_every;
} pcnf_train_options;

PCNFISH_API void pcnf_train_options_init(pcnf_train_options* options);
/* Warnings about skipped samples are appended, one per line, to warnings_out. */
PCNFISH_API pcnf_status pcnf_train(const pcnf_train_options* options, double* final_loss,
                                   char* warnings_out, size_t cap);

PCNFISH_API pcnf_status pcnf_evaluate_dirs(const char* pred_dir, const char* gt_dir,
                                           const char* report_path, double* mean_psnr,
                                           double* mean_ssim);

#ifdef __cplusplus
}
#endif

#endif  // PCNFISH_PCNFISH_H_
