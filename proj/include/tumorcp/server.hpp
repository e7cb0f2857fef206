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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tumorcp/dataset.hpp"
#include "tumorcp/pipeline.hpp"

namespace tumorcp {

struct ServerOptions {
  /// "host:port" (port 0 picks a free port) or a filesystem path for a
  /// unix-domain socket. A value containing '/' is taken as a path.
  std::string bind = "127.0.0.1:0";
  unsigned workers = 4;
  std::uint64_t base_seed = 0;
  /// Samples computed ahead of the last NEXT on each connection.
  unsigned prefetch_depth = 4;
};

struct ServerStats {
  std::uint64_t connections = 0;
  std::uint64_t samples_served = 0;
  double uptime_seconds = 0.0;
  double samples_per_second = 0.0;
};

/// Encoded SAMPLE frame for (seed, epoch, sample_index). The target case is
/// `hint` when given, else sample_index modulo the dataset size.
/// Throws kInvalidArgument for an unknown hint.
std::vector<std::uint8_t> produce_sample_frame(const Dataset& dataset, const PipelineConfig& config,
                                               std::uint64_t base_seed, std::uint64_t epoch,
                                               std::uint64_t sample_index,
                                               const std::optional<std::string>& hint = std::nullopt);

/// Streaming feed server. One acceptor thread, one thread per connection
/// speaking the wire protocol, and a shared pool of `workers` threads
/// producing samples. The dataset is shared read-only.
class FeedServer {
 public:
  FeedServer(std::shared_ptr<const Dataset> dataset, PipelineConfig config, ServerOptions options);
  ~FeedServer();
  FeedServer(const FeedServer&) = delete;
  FeedServer& operator=(const FeedServer&) = delete;

  /// Binds and starts serving. Throws kIoError when the endpoint is not
  /// bindable.
  void start();
  /// Stops accepting, closes open connections and joins every thread.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  /// Bound TCP port (0 for a unix socket).
  int port() const noexcept;
  ServerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tumorcp
