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

#include "tumorcp/tumorcp.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"

#include "tumorcp/jobs.hpp"
#include "tumorcp/log.hpp"
#include "tumorcp/metrics.hpp"
#include "tumorcp/serialize.hpp"
#include "tumorcp/server.hpp"

struct tumorcp_dataset {
  std::shared_ptr<const tumorcp::Dataset> dataset;
};

struct tumorcp_server {
  std::unique_ptr<tumorcp::FeedServer> server;
};

namespace {

using tumorcp::ErrorCode;

thread_local std::string g_last_error;

tumorcp_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return TUMORCP_INVALID_ARGUMENT;
    case ErrorCode::kFileNotFound: return TUMORCP_FILE_NOT_FOUND;
    case ErrorCode::kIoError: return TUMORCP_IO_ERROR;
    case ErrorCode::kFormatError: return TUMORCP_FORMAT_ERROR;
    case ErrorCode::kShapeMismatch: return TUMORCP_SHAPE_MISMATCH;
    case ErrorCode::kProtocolError: return TUMORCP_PROTOCOL_ERROR;
    case ErrorCode::kDegenerateOutput:
    case ErrorCode::kEmptyOrganSet:
    case ErrorCode::kEmptyResult:
    case ErrorCode::kFullyClipped:
    case ErrorCode::kNoTumorSource: return TUMORCP_DATA_ERROR;
  }
  return TUMORCP_INTERNAL_ERROR;
}

template <class F>
tumorcp_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return TUMORCP_OK;
  } catch (const tumorcp::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return TUMORCP_INTERNAL_ERROR;
}

void require(bool ok, const char* what) {
  if (!ok) throw tumorcp::Error(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put_json(char** out, const nlohmann::json& j) {
  if (out != nullptr) *out = dup_string(j.dump(2));
}

tumorcp::PipelineConfig config_of(const char* text) {
  return tumorcp::parse_pipeline_config(text == nullptr ? std::string() : std::string(text));
}

tumorcp::Label label_of(int v, const char* what) {
  require(v >= 0 && v <= 255, what);
  return static_cast<tumorcp::Label>(v);
}

tumorcp_status open_dataset(const char* dir, const int* organ, const int* tumor, tumorcp_dataset** out) {
  return guarded([&] {
    require(dir != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    tumorcp::DatasetIndex index = tumorcp::DatasetIndex::scan(dir);
    if (organ != nullptr) index.labels.organ = label_of(*organ, "organ label must be in [0, 255]");
    if (tumor != nullptr) index.labels.tumor = label_of(*tumor, "tumor label must be in [0, 255]");
    index.validate();
    auto ds = std::make_shared<const tumorcp::Dataset>(tumorcp::Dataset::load(index));
    *out = new tumorcp_dataset{std::move(ds)};
  });
}

}  // namespace

extern "C" {

const char* tumorcp_version(void) { return "1.0.0"; }

const char* tumorcp_last_error(void) { return g_last_error.c_str(); }

const char* tumorcp_status_name(tumorcp_status status) {
  switch (status) {
    case TUMORCP_OK: return "ok";
    case TUMORCP_INVALID_ARGUMENT: return "invalid argument";
    case TUMORCP_FILE_NOT_FOUND: return "file not found";
    case TUMORCP_IO_ERROR: return "i/o error";
    case TUMORCP_FORMAT_ERROR: return "format error";
    case TUMORCP_SHAPE_MISMATCH: return "shape mismatch";
    case TUMORCP_DATA_ERROR: return "data error";
    case TUMORCP_PROTOCOL_ERROR: return "protocol error";
    case TUMORCP_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

void tumorcp_free_string(char* s) { std::free(s); }

void tumorcp_init_logging(void) { tumorcp::init_logging(); }

tumorcp_status tumorcp_dataset_open(const char* dir, tumorcp_dataset** out) {
  return open_dataset(dir, nullptr, nullptr, out);
}

tumorcp_status tumorcp_dataset_open_labels(const char* dir, int organ_label, int tumor_label,
                                           tumorcp_dataset** out) {
  return open_dataset(dir, &organ_label, &tumor_label, out);
}

void tumorcp_dataset_close(tumorcp_dataset* ds) { delete ds; }

size_t tumorcp_dataset_size(const tumorcp_dataset* ds) { return ds == nullptr ? 0 : ds->dataset->size(); }

tumorcp_status tumorcp_config_normalize(const char* config_json, char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "null argument");
    put_json(out_json, tumorcp::to_json(config_of(config_json)));
  });
}

tumorcp_status tumorcp_extract_summary(const tumorcp_dataset* ds, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && out_json != nullptr, "null argument");
    put_json(out_json, tumorcp::extract_summary(*ds->dataset));
  });
}

tumorcp_status tumorcp_dataset_stats(const tumorcp_dataset* ds, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && out_json != nullptr, "null argument");
    put_json(out_json, tumorcp::dataset_stats(*ds->dataset));
  });
}

tumorcp_status tumorcp_gate_stats(const tumorcp_dataset* ds, const char* config_json, uint64_t seed,
                                  uint64_t draws, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && out_json != nullptr, "null argument");
    put_json(out_json, tumorcp::gate_stats(*ds->dataset, config_of(config_json), seed, draws));
  });
}

tumorcp_status tumorcp_augment(const tumorcp_dataset* ds, const char* config_json, uint64_t seed,
                               uint32_t n_per_case, unsigned workers, const char* out_dir, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && out_dir != nullptr, "null argument");
    tumorcp::AugmentJob job;
    job.config = config_of(config_json);
    job.seed = seed;
    job.n_per_case = n_per_case;
    job.workers = workers;
    job.out_dir = out_dir;
    const tumorcp::AugmentJobResult r = tumorcp::run_augment(*ds->dataset, job);
    put_json(out_json, {{"samples", r.samples}, {"applied", r.applied}, {"seconds", r.seconds}});
  });
}

tumorcp_status tumorcp_preview(const tumorcp_dataset* ds, const char* case_id, const char* config_json,
                               uint64_t seed, uint64_t sample_index, const char* out_dir, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && case_id != nullptr && out_dir != nullptr, "null argument");
    const auto index = ds->dataset->find(case_id);
    if (!index) throw tumorcp::Error(ErrorCode::kFileNotFound, std::string("no case named ") + case_id);
    tumorcp::PreviewJob job;
    job.config = config_of(config_json);
    job.seed = seed;
    job.sample_index = sample_index;
    job.out_dir = out_dir;
    put_json(out_json, tumorcp::to_json(tumorcp::run_preview(*ds->dataset, *index, job)));
  });
}

tumorcp_status tumorcp_dice_files(const char* a_path, const char* b_path, int label, double* out_dice,
                                  double* out_dice_standard) {
  return guarded([&] {
    require(a_path != nullptr && b_path != nullptr, "null argument");
    const tumorcp::Label l = label_of(label, "label must be in [0, 255]");
    const tumorcp::MaskGrid a = tumorcp::label_mask(tumorcp::read_labelmap(a_path), l);
    const tumorcp::MaskGrid b = tumorcp::label_mask(tumorcp::read_labelmap(b_path), l);
    if (out_dice != nullptr) *out_dice = tumorcp::dice(a, b);
    if (out_dice_standard != nullptr) *out_dice_standard = tumorcp::dice_standard(a, b);
  });
}

tumorcp_status tumorcp_server_start(const tumorcp_dataset* ds, const char* config_json, const char* bind,
                                    unsigned workers, uint64_t base_seed, unsigned prefetch_depth,
                                    tumorcp_server** out) {
  return guarded([&] {
    require(ds != nullptr && bind != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    tumorcp::ServerOptions opts;
    opts.bind = bind;
    opts.workers = workers;
    opts.base_seed = base_seed;
    opts.prefetch_depth = prefetch_depth;
    auto server = std::make_unique<tumorcp::FeedServer>(ds->dataset, config_of(config_json), opts);
    server->start();
    *out = new tumorcp_server{std::move(server)};
  });
}

int tumorcp_server_port(const tumorcp_server* server) { return server == nullptr ? 0 : server->server->port(); }

tumorcp_status tumorcp_server_stats(const tumorcp_server* server, char** out_json) {
  return guarded([&] {
    require(server != nullptr && out_json != nullptr, "null argument");
    const tumorcp::ServerStats st = server->server->stats();
    put_json(out_json, {{"connections", st.connections},
                        {"samples_served", st.samples_served},
                        {"uptime_seconds", st.uptime_seconds},
                        {"samples_per_second", st.samples_per_second}});
  });
}

void tumorcp_server_stop(tumorcp_server* server) {
  if (server != nullptr) server->server->stop();
}

void tumorcp_server_destroy(tumorcp_server* server) { delete server; }

}  // extern "C"
