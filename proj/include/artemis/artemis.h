/*
 * Copyright (c) 2026 The artemis-head Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ARTEMIS_ARTEMIS_H_
#define ARTEMIS_ARTEMIS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ARTEMIS_API __declspec(dllexport)
#else
#define ARTEMIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returns one; on failure the message is
 * available from artemis_last_error() on the calling thread. */
typedef enum artemis_status {
  ARTEMIS_OK = 0,
  ARTEMIS_SHAPE_MISMATCH = 1,
  ARTEMIS_NEAR_ZERO_NORM = 2,
  ARTEMIS_NON_FINITE_GRADIENT = 3,
  ARTEMIS_UNKNOWN_ID = 4,
  ARTEMIS_BAD_SPLIT = 5,
  ARTEMIS_BAD_MAGIC = 6,
  ARTEMIS_TRUNCATED_FILE = 7,
  ARTEMIS_DUPLICATE_ID = 8,
  ARTEMIS_EMPTY_INPUT = 9,
  ARTEMIS_MISSING_SUBSET = 10,
  ARTEMIS_MISSING_CELL = 11,
  ARTEMIS_LENGTH_MISMATCH = 12,
  ARTEMIS_EMPTY_SPLIT = 13,
  ARTEMIS_SPEC_INVALID = 14,
  ARTEMIS_IO = 15,
  ARTEMIS_CONFIG = 16,
  ARTEMIS_PARSE = 17,
  ARTEMIS_INVALID_ARGUMENT = 98, /* null handle or pointer */
  ARTEMIS_INTERNAL = 99
} artemis_status;

typedef struct artemis_config artemis_config;
typedef struct artemis_dataset artemis_dataset;
typedef struct artemis_params artemis_params;
typedef struct artemis_train_result artemis_train_result;

ARTEMIS_API const char* artemis_version(void);
ARTEMIS_API const char* artemis_last_error(void);
ARTEMIS_API const char* artemis_status_name(int status);
/* Process exit code for a status: 0 ok, 2 configuration, 3 data. */
ARTEMIS_API int artemis_status_exit_code(int status);

/* Strings returned through char** out-parameters are owned by the caller. */
ARTEMIS_API void artemis_string_free(char* s);

/* Run configuration: "key = value" settings; later values win. */
ARTEMIS_API int artemis_config_new(artemis_config** out);
ARTEMIS_API void artemis_config_free(artemis_config* config);
ARTEMIS_API int artemis_config_set(artemis_config* config, const char* key, const char* value);
ARTEMIS_API int artemis_config_apply_text(artemis_config* config, const char* text);
/* Value of a path setting (images, checkpoint, out, log, dump, ...). */
ARTEMIS_API int artemis_config_get_path(const artemis_config* config, const char* key,
                                        char** out);
/* One "key<TAB>help" line per documented setting. */
ARTEMIS_API int artemis_config_help(char** out);

/* Banks, triplets and candidate list named by the config. */
ARTEMIS_API int artemis_dataset_load(const artemis_config* config, artemis_dataset** out);
ARTEMIS_API void artemis_dataset_free(artemis_dataset* dataset);

/* Writes a synthetic dataset into the config's synth.dir; *summary is JSON. */
ARTEMIS_API int artemis_synth(const artemis_config* config, char** summary);

ARTEMIS_API int artemis_params_init(size_t dim_text, size_t dim_image, size_t hidden,
                                    uint64_t seed, artemis_params** out);
ARTEMIS_API int artemis_params_load(const char* path, artemis_params** out);
ARTEMIS_API int artemis_params_save(const artemis_params* params, const char* path);
ARTEMIS_API void artemis_params_free(artemis_params* params);
ARTEMIS_API int artemis_params_count(const artemis_params* params, uint64_t* count);
ARTEMIS_API int artemis_dims_accounting(size_t dim_text, size_t dim_image, size_t hidden,
                                        uint64_t* params, uint64_t* macs);

/* Compatibility score of one (reference, modifier, target) triple. */
ARTEMIS_API int artemis_score(const artemis_params* params, const char* flavor,
                              const double* ref, size_t ref_len, const double* mod,
                              size_t mod_len, const double* tgt, size_t tgt_len, double* out);

ARTEMIS_API int artemis_train(const artemis_config* config, const artemis_dataset* dataset,
                              artemis_train_result** out);
ARTEMIS_API void artemis_train_result_free(artemis_train_result* result);
/* Epoch log as JSONL. */
ARTEMIS_API int artemis_train_result_log(const artemis_train_result* result, char** out);
/* split == NULL: parameters after the last epoch; otherwise the best epoch on
 * that monitored split. */
ARTEMIS_API int artemis_train_result_params(const artemis_train_result* result,
                                            const char* split, artemis_params** out);
/* JSON object: split -> best epoch. */
ARTEMIS_API int artemis_train_result_best(const artemis_train_result* result, char** out);

/* Any of the char** outputs may be NULL when not wanted. */
ARTEMIS_API int artemis_evaluate(const artemis_config* config, const artemis_dataset* dataset,
                                 const artemis_params* params, char** report_json,
                                 char** report_table, char** ranking_dump);
ARTEMIS_API int artemis_ablate(const artemis_config* config, const artemis_dataset* dataset,
                               char** report_json, char** report_table);
ARTEMIS_API int artemis_bench(const artemis_config* config, const artemis_dataset* dataset,
                              const artemis_params* params, char** report_json,
                              char** report_table, double* ratio);
/* *passed is 1 when every probed coordinate is within tolerance. */
ARTEMIS_API int artemis_gradcheck(const artemis_config* config, char** report_json,
                                  int* passed);
ARTEMIS_API int artemis_bank_inspect(const char* path, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* ARTEMIS_ARTEMIS_H_ */
