// Copyright 2026 The TumorCP Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the TumorCP augmentation engine.
 *
 * Functions return a tumorcp_status; on anything but TUMORCP_OK the message
 * for the calling thread is available from tumorcp_last_error() until the
 * next call on that thread. Strings handed out by the library are owned by
 * the caller and released with tumorcp_free_string().
 */
#ifndef TUMORCP_TUMORCP_H
#define TUMORCP_TUMORCP_H

#include <stddef.h>
#include <stdint.h>

#if defined(TUMORCP_BUILDING_LIBRARY)
#define TUMORCP_API __attribute__((visibility("default")))
#else
#define TUMORCP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tumorcp_status {
  TUMORCP_OK = 0,
  TUMORCP_INVALID_ARGUMENT = 1,
  TUMORCP_FILE_NOT_FOUND = 2,
  TUMORCP_IO_ERROR = 3,
  TUMORCP_FORMAT_ERROR = 4,
  TUMORCP_SHAPE_MISMATCH = 5,
  TUMORCP_DATA_ERROR = 6, /* degenerate geometry, empty organ, no source, ... */
  TUMORCP_PROTOCOL_ERROR = 7,
  TUMORCP_INTERNAL_ERROR = 8
} tumorcp_status;

typedef struct tumorcp_dataset tumorcp_dataset;
typedef struct tumorcp_server tumorcp_server;

TUMORCP_API const char* tumorcp_version(void);
TUMORCP_API const char* tumorcp_last_error(void);
TUMORCP_API const char* tumorcp_status_name(tumorcp_status status);
TUMORCP_API void tumorcp_free_string(char* s);

/* Reads TUMORCP_LOG and configures logging to stderr. */
TUMORCP_API void tumorcp_init_logging(void);

/* Opens a dataset directory (dataset.json manifest or case folders) and
 * loads every case. */
TUMORCP_API tumorcp_status tumorcp_dataset_open(const char* dir, tumorcp_dataset** out);
/* Same, with label ids overriding the manifest. */
TUMORCP_API tumorcp_status tumorcp_dataset_open_labels(const char* dir, int organ_label, int tumor_label,
                                                        tumorcp_dataset** out);
TUMORCP_API void tumorcp_dataset_close(tumorcp_dataset* ds);
TUMORCP_API size_t tumorcp_dataset_size(const tumorcp_dataset* ds);

/* Validates a pipeline config given as JSON text (NULL or "" = defaults)
 * and returns it normalised with every field present. */
TUMORCP_API tumorcp_status tumorcp_config_normalize(const char* config_json, char** out_json);

/* JSON summary of the extracted tumor instances. */
TUMORCP_API tumorcp_status tumorcp_extract_summary(const tumorcp_dataset* ds, char** out_json);

/* Dimensions, spacing and label counts per case. */
TUMORCP_API tumorcp_status tumorcp_dataset_stats(const tumorcp_dataset* ds, char** out_json);

/* Gate frequencies over `draws` planned augmentations. */
TUMORCP_API tumorcp_status tumorcp_gate_stats(const tumorcp_dataset* ds, const char* config_json, uint64_t seed,
                                              uint64_t draws, char** out_json);

/* Offline augmentation into out_dir. Summary (samples, applied, seconds) is
 * returned as JSON when out_json is not NULL. */
TUMORCP_API tumorcp_status tumorcp_augment(const tumorcp_dataset* ds, const char* config_json, uint64_t seed,
                                           uint32_t n_per_case, unsigned workers, const char* out_dir,
                                           char** out_json);

/* Before/after PNGs and record.json for one draw on the named case.
 * The record is returned as JSON when out_json is not NULL. */
TUMORCP_API tumorcp_status tumorcp_preview(const tumorcp_dataset* ds, const char* case_id,
                                           const char* config_json, uint64_t seed, uint64_t sample_index,
                                           const char* out_dir, char** out_json);

/* Overlap between label `label` in two label files. */
TUMORCP_API tumorcp_status tumorcp_dice_files(const char* a_path, const char* b_path, int label,
                                              double* out_dice, double* out_dice_standard);

/* Feed server. `bind` is "host:port" or a unix socket path. The dataset
 * must outlive the server. */
TUMORCP_API tumorcp_status tumorcp_server_start(const tumorcp_dataset* ds, const char* config_json,
                                                const char* bind, unsigned workers, uint64_t base_seed,
                                                unsigned prefetch_depth, tumorcp_server** out);
TUMORCP_API int tumorcp_server_port(const tumorcp_server* server);
/* Connections, samples served, uptime and samples/sec as JSON. */
TUMORCP_API tumorcp_status tumorcp_server_stats(const tumorcp_server* server, char** out_json);
TUMORCP_API void tumorcp_server_stop(tumorcp_server* server);
/* Stops (if running) and frees. */
TUMORCP_API void tumorcp_server_destroy(tumorcp_server* server);

#ifdef __cplusplus
}
#endif

#endif /* TUMORCP_TUMORCP_H */
