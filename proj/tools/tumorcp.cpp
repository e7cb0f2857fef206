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

// tumorcp command-line tool. Everything goes through the C API.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tumorcp/tumorcp.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kData = 3 };

// Error raised inside a subcommand once its message has been printed.
struct Failed {
  int code;
};

int exit_code(tumorcp_status s) {
  switch (s) {
    case TUMORCP_OK: return kOk;
    case TUMORCP_INVALID_ARGUMENT: return kUsage;
    case TUMORCP_FILE_NOT_FOUND:
    case TUMORCP_IO_ERROR: return kIo;
    default: return kData;
  }
}

void check(tumorcp_status s) {
  if (s == TUMORCP_OK) return;
  std::fprintf(stderr, "tumorcp: %s: %s\n", tumorcp_status_name(s), tumorcp_last_error());
  throw Failed{exit_code(s)};
}

[[noreturn]] void fail(int code, const std::string& msg) {
  std::fprintf(stderr, "tumorcp: %s\n", msg.c_str());
  throw Failed{code};
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (text.empty() || text[0] == '-' || text[0] == '+') throw std::invalid_argument(text);
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    fail(kUsage, std::string("invalid ") + what + ": '" + text + "'");
  }
  if (used != text.size()) fail(kUsage, std::string("invalid ") + what + ": '" + text + "'");
  return v;
}

std::string read_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) fail(kIo, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Dataset {
 public:
  Dataset(const std::string& dir, std::optional<int> organ, std::optional<int> tumor) {
    if (organ || tumor)
      check(tumorcp_dataset_open_labels(dir.c_str(), organ.value_or(1), tumor.value_or(2), &ds_));
    else
      check(tumorcp_dataset_open(dir.c_str(), &ds_));
  }
  ~Dataset() { tumorcp_dataset_close(ds_); }
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
  const tumorcp_dataset* get() const { return ds_; }

 private:
  tumorcp_dataset* ds_ = nullptr;
};

// Takes ownership of a library string and writes it to `path` or stdout.
void emit(char* json, const std::string& path) {
  std::string text(json);
  tumorcp_free_string(json);
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  out << text << "\n";
  if (!out) fail(kIo, "cannot write " + path);
}

struct Common {
  std::string dataset_dir;
  std::string config_path;
  std::string seed = "0";
  unsigned workers = 1;
  std::optional<int> organ_label;
  std::optional<int> tumor_label;
};

void add_dataset(CLI::App* cmd, Common& c) {
  cmd->add_option("dataset", c.dataset_dir, "Dataset directory")->required();
  cmd->add_option("--organ-label", c.organ_label, "Organ label id (overrides the manifest)")->check(CLI::Range(0, 255));
  cmd->add_option("--tumor-label", c.tumor_label, "Tumor label id (overrides the manifest)")->check(CLI::Range(0, 255));
}

void add_pipeline(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Pipeline config JSON file");
  cmd->add_option("--seed", c.seed, "Base seed (unsigned 64-bit)");
}

sigset_t shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  tumorcp_init_logging();
  CLI::App app{"TumorCP copy-paste augmentation engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tumorcp_version());

  Common c;

  std::string extract_out;
  auto* extract = app.add_subcommand("extract", "Summarise tumor instances per case as JSON");
  add_dataset(extract, c);
  extract->add_option("-o,--out", extract_out, "Output JSON file (default stdout)");

  std::string augment_out;
  std::uint32_t n_per_case = 1;
  auto* augment = app.add_subcommand("augment", "Write augmented copies of every case");
  add_dataset(augment, c);
  add_pipeline(augment, c);
  augment->add_option("-o,--out", augment_out, "Output directory")->required();
  augment->add_option("-n,--n-per-case", n_per_case, "Samples per case")->check(CLI::PositiveNumber);
  augment->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string preview_out, preview_case, preview_index = "0";
  auto* preview = app.add_subcommand("preview", "Render one draw before and after as PNG");
  add_dataset(preview, c);
  add_pipeline(preview, c);
  preview->add_option("--case", preview_case, "Case id")->required();
  preview->add_option("--index", preview_index, "Sample index");
  preview->add_option("-o,--out", preview_out, "Output directory")->required();

  std::string bind = "127.0.0.1:7878";
  unsigned prefetch = 4;
  auto* serve = app.add_subcommand("serve", "Stream augmented samples to training clients");
  add_dataset(serve, c);
  add_pipeline(serve, c);
  serve->add_option("--bind", bind, "host:port or unix socket path");
  serve->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  serve->add_option("--prefetch", prefetch, "Samples prepared ahead per connection");

  std::string stats_out, draws = "0";
  auto* stats = app.add_subcommand("stats", "Dataset statistics and, with --draws, gate frequencies");
  add_dataset(stats, c);
  add_pipeline(stats, c);
  stats->add_option("--draws", draws, "Planned augmentations to sample for gate frequencies");
  stats->add_option("-o,--out", stats_out, "Output JSON file (default stdout)");

  std::string dice_a, dice_b;
  int dice_label = 2;
  auto* dice = app.add_subcommand("dice", "Overlap of one label between two label files");
  dice->add_option("a", dice_a, "First label file")->required();
  dice->add_option("b", dice_b, "Second label file")->required();
  dice->add_option("--label", dice_label, "Label id")->check(CLI::Range(0, 255));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (extract->parsed()) {
      Dataset ds(c.dataset_dir, c.organ_label, c.tumor_label);
      char* json = nullptr;
      check(tumorcp_extract_summary(ds.get(), &json));
      emit(json, extract_out);
    } else if (augment->parsed()) {
      const std::uint64_t seed = parse_u64(c.seed, "seed");
      const std::string config = read_config(c.config_path);
      Dataset ds(c.dataset_dir, c.organ_label, c.tumor_label);
      char* json = nullptr;
      check(tumorcp_augment(ds.get(), config.c_str(), seed, n_per_case, c.workers, augment_out.c_str(), &json));
      emit(json, "-");
    } else if (preview->parsed()) {
      const std::uint64_t seed = parse_u64(c.seed, "seed");
      const std::uint64_t index = parse_u64(preview_index, "sample index");
      const std::string config = read_config(c.config_path);
      Dataset ds(c.dataset_dir, c.organ_label, c.tumor_label);
      char* json = nullptr;
      check(tumorcp_preview(ds.get(), preview_case.c_str(), config.c_str(), seed, index, preview_out.c_str(), &json));
      emit(json, "-");
    } else if (serve->parsed()) {
      const std::uint64_t seed = parse_u64(c.seed, "seed");
      const std::string config = read_config(c.config_path);
      Dataset ds(c.dataset_dir, c.organ_label, c.tumor_label);
      // Block the shutdown signals before any server thread exists so that
      // only sigwait below sees them.
      const sigset_t sigs = shutdown_signals();
      pthread_sigmask(SIG_BLOCK, &sigs, nullptr);
      tumorcp_server* server = nullptr;
      check(tumorcp_server_start(ds.get(), config.c_str(), bind.c_str(), c.workers, seed, prefetch, &server));
      std::fprintf(stderr, "tumorcp: serving on %s (port %d)\n", bind.c_str(), tumorcp_server_port(server));
      int sig = 0;
      sigwait(&sigs, &sig);
      char* json = nullptr;
      const tumorcp_status st = tumorcp_server_stats(server, &json);
      tumorcp_server_destroy(server);
      check(st);
      emit(json, "-");
    } else if (stats->parsed()) {
      const std::uint64_t seed = parse_u64(c.seed, "seed");
      const std::uint64_t n_draws = parse_u64(draws, "draw count");
      const std::string config = read_config(c.config_path);
      Dataset ds(c.dataset_dir, c.organ_label, c.tumor_label);
      char* json = nullptr;
      if (n_draws > 0) {
        check(tumorcp_gate_stats(ds.get(), config.c_str(), seed, n_draws, &json));
      } else {
        check(tumorcp_dataset_stats(ds.get(), &json));
      }
      emit(json, stats_out);
    } else if (dice->parsed()) {
      double jaccard_form = 0, standard = 0;
      check(tumorcp_dice_files(dice_a.c_str(), dice_b.c_str(), dice_label, &jaccard_form, &standard));
      std::printf("{\"dice\": %.17g, \"dice_standard\": %.17g}\n", jaccard_form, standard);
    }
  } catch (const Failed& f) {
    return f.code;
  }
  return kOk;
}
