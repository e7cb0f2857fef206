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

#include "tumorcp/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <future>
#include <list>
#include <map>
#include <mutex>
#include <thread>

#include "tumorcp/serialize.hpp"
#include "tumorcp/wire.hpp"

namespace tumorcp {

namespace {

using Bytes = std::vector<std::uint8_t>;
using SampleFuture = std::shared_future<std::shared_ptr<const Bytes>>;

// Client frames are all tiny; anything larger is a protocol violation.
constexpr std::uint64_t kMaxRequestPayload = 1 << 16;

class WorkerPool {
 public:
  explicit WorkerPool(unsigned n) {
    for (unsigned i = 0; i < n; ++i) threads_.emplace_back([this] { run(); });
  }
  ~WorkerPool() { shutdown(); }

  SampleFuture submit(std::function<Bytes()> fn) {
    auto task = std::make_shared<std::packaged_task<std::shared_ptr<const Bytes>()>>(
        [fn = std::move(fn)] { return std::make_shared<const Bytes>(fn()); });
    SampleFuture fut = task->get_future().share();
    {
      std::lock_guard lock(mu_);
      if (stopping_) throw Error(ErrorCode::kIoError, "server is stopping");
      queue_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut;
  }

  // Queued tasks that never ran are dropped; their futures report a broken
  // promise.
  void shutdown() {
    {
      std::lock_guard lock(mu_);
      if (stopping_ && threads_.empty()) return;
      stopping_ = true;
      queue_.clear();
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
    threads_.clear();
  }

 private:
  void run() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> threads_;
  bool stopping_ = false;
};

struct Endpoint {
  bool is_unix = false;
  std::string host;
  std::string port;
  std::string path;
};

Endpoint parse_bind(const std::string& bind) {
  Endpoint ep;
  if (bind.find('/') != std::string::npos) {
    ep.is_unix = true;
    ep.path = bind;
    return ep;
  }
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "bind address must be host:port or a path");
  ep.host = bind.substr(0, colon);
  ep.port = bind.substr(colon + 1);
  if (ep.host.size() >= 2 && ep.host.front() == '[' && ep.host.back() == ']') ep.host = ep.host.substr(1, ep.host.size() - 2);
  if (ep.host.empty()) ep.host = "0.0.0.0";
  if (ep.port.empty() || ep.port.find_first_not_of("0123456789") != std::string::npos || ep.port.size() > 5 ||
      std::stoi(ep.port) > 65535)
    throw Error(ErrorCode::kInvalidArgument, "invalid port in bind address: " + bind);
  return ep;
}

[[noreturn]] void sys_fail(const std::string& what) {
  throw Error(ErrorCode::kIoError, what + ": " + std::strerror(errno));
}

int listen_unix(const std::string& path) {
  sockaddr_un addr{};
  if (path.size() >= sizeof(addr.sun_path)) throw Error(ErrorCode::kInvalidArgument, "socket path too long");
  addr.sun_family = AF_UNIX;
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  struct stat st {};
  if (::stat(path.c_str(), &st) == 0 && S_ISSOCK(st.st_mode)) ::unlink(path.c_str());
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) sys_fail("socket");
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd, 64) != 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    sys_fail("cannot bind " + path);
  }
  return fd;
}

int listen_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw Error(ErrorCode::kIoError, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  int last_errno = 0;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) return fd;
    last_errno = errno;
    ::close(fd);
  }
  errno = last_errno;
  sys_fail("cannot bind " + host + ":" + port);
}

// Half-close and swallow whatever the client already sent, so that closing
// with unread input does not reset the connection and drop our last reply.
void linger_close(int fd) {
  ::shutdown(fd, SHUT_WR);
  char sink[4096];
  std::size_t drained = 0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(500);
  while (drained < (1u << 20)) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) break;
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left)) <= 0) break;
    const ssize_t n = ::recv(fd, sink, sizeof(sink), 0);
    if (n <= 0) break;
    drained += static_cast<std::size_t>(n);
  }
}

}  // namespace

std::vector<std::uint8_t> produce_sample_frame(const Dataset& dataset, const PipelineConfig& config,
                                               std::uint64_t base_seed, std::uint64_t epoch,
                                               std::uint64_t sample_index,
                                               const std::optional<std::string>& hint) {
  if (dataset.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  std::size_t target = static_cast<std::size_t>(sample_index % dataset.size());
  if (hint) {
    const auto found = dataset.find(*hint);
    if (!found) throw Error(ErrorCode::kInvalidArgument, "unknown case: " + *hint);
    target = *found;
  }
  RngStream rng(base_seed, sample_stream_id(target, epoch, sample_index));
  const AugmentResult r = augment_once(dataset, target, config, rng);
  Bytes out;
  wire::encode_sample_frame(r.record.target_case, r.volume.dims(), r.volume.spacing, record_line(r.record),
                            r.volume.voxels.values(), r.labelmap.labels.values(), out);
  return out;
}

struct FeedServer::Impl {
  std::shared_ptr<const Dataset> dataset;
  PipelineConfig config;
  ServerOptions options;
  Endpoint endpoint;

  int listen_fd = -1;
  int bound_port = 0;
  std::thread acceptor;
  std::unique_ptr<WorkerPool> pool;

  struct Connection {
    int fd = -1;
    std::thread thread;
    std::atomic<bool> done{false};
  };
  std::mutex conn_mu;
  std::list<Connection> connections;

  std::atomic<bool> running{false};
  std::atomic<bool> stopping{false};
  std::mutex state_mu;
  std::condition_variable state_cv;
  bool stopped = false;

  std::atomic<std::uint64_t> n_connections{0};
  std::atomic<std::uint64_t> n_served{0};
  std::chrono::steady_clock::time_point started;

  void accept_loop();
  void serve_connection(Connection& conn);
  void reap_finished();
};

void FeedServer::Impl::reap_finished() {
  std::lock_guard lock(conn_mu);
  for (auto it = connections.begin(); it != connections.end();) {
    if (it->done.load()) {
      it->thread.join();
      ::close(it->fd);
      it = connections.erase(it);
    } else {
      ++it;
    }
  }
}

void FeedServer::Impl::accept_loop() {
  while (!stopping.load()) {
    pollfd p{listen_fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, 100);
    reap_finished();
    if (rc <= 0) continue;
    const int fd = ::accept4(listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    if (!endpoint.is_unix) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }
    ++n_connections;
    std::lock_guard lock(conn_mu);
    if (stopping.load()) {
      ::close(fd);
      break;
    }
    Connection& c = connections.emplace_back();
    c.fd = fd;
    c.thread = std::thread([this, &c] {
      serve_connection(c);
      linger_close(c.fd);
      c.done = true;
    });
  }
}

void FeedServer::Impl::serve_connection(Connection& conn) {
  using wire::ErrorCodeWire;
  using wire::Op;
  const int fd = conn.fd;
  auto fail = [&](ErrorCodeWire code, const std::string& msg) {
    spdlog::debug("connection error {}: {}", static_cast<int>(code), msg);
    try {
      wire::send_frame(fd, wire::make_frame(wire::ErrorReply{code, msg}));
    } catch (const Error&) {
    }
  };

  bool helloed = false;
  std::uint64_t seed = options.base_seed;
  std::uint64_t served = 0;
  // Prefetched samples keyed by (epoch, sample_index), requests without hint.
  std::map<std::pair<std::uint64_t, std::uint64_t>, SampleFuture> ahead;
  const Dataset& ds = *dataset;

  auto submit = [&](std::uint64_t epoch, std::uint64_t index, std::optional<std::string> hint) {
    return pool->submit([&ds, cfg = config, seed, epoch, index, hint = std::move(hint)] {
      return produce_sample_frame(ds, cfg, seed, epoch, index, hint);
    });
  };

  try {
    while (!stopping.load()) {
      std::optional<wire::Frame> frame;
      try {
        frame = wire::recv_frame(fd, kMaxRequestPayload);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kProtocolError) fail(ErrorCodeWire::kMalformedFrame, e.what());
        return;
      }
      if (!frame) return;
      if (frame->version != wire::kProtocolVersion) {
        fail(ErrorCodeWire::kVersionMismatch, "unsupported protocol version " + std::to_string(frame->version));
        return;
      }
      if (!wire::is_known_op(frame->op)) {
        fail(ErrorCodeWire::kUnknownOp, "unknown op " + std::to_string(frame->op));
        return;
      }
      const Op op = static_cast<Op>(frame->op);
      if (!helloed && (op == Op::kNext || op == Op::kSeed)) {
        fail(ErrorCodeWire::kNotHelloed, std::string(wire::op_name(op)) + " before HELLO");
        return;
      }
      switch (op) {
        case Op::kHello: {
          wire::HelloRequest req;
          try {
            req = wire::parse_hello(frame->payload);
          } catch (const Error& e) {
            fail(ErrorCodeWire::kMalformedFrame, e.what());
            return;
          }
          if (req.client_version != wire::kProtocolVersion) {
            fail(ErrorCodeWire::kVersionMismatch, "server speaks version 1");
            return;
          }
          helloed = true;
          wire::send_frame(fd, wire::make_frame(wire::HelloReply{wire::kProtocolVersion, ds.size(), seed}));
          break;
        }
        case Op::kSeed: {
          wire::SeedMessage req;
          try {
            req = wire::parse_seed(frame->payload);
          } catch (const Error& e) {
            fail(ErrorCodeWire::kMalformedFrame, e.what());
            return;
          }
          seed = req.base_seed;
          ahead.clear();
          wire::send_frame(fd, wire::make_seed_reply_frame(wire::SeedMessage{seed}));
          break;
        }
        case Op::kNext: {
          wire::NextRequest req;
          try {
            req = wire::parse_next(frame->payload);
          } catch (const Error& e) {
            fail(ErrorCodeWire::kMalformedFrame, e.what());
            return;
          }
          if (req.case_hint && !ds.find(*req.case_hint)) {
            fail(ErrorCodeWire::kBadRequest, "unknown case: " + *req.case_hint);
            return;
          }
          SampleFuture fut;
          if (req.case_hint) {
            fut = submit(req.epoch, req.sample_index, req.case_hint);
          } else {
            const auto key = std::make_pair(req.epoch, req.sample_index);
            if (auto it = ahead.find(key); it != ahead.end()) {
              fut = it->second;
            } else {
              fut = submit(req.epoch, req.sample_index, std::nullopt);
            }
            // Keep only the window that follows this request.
            const std::uint64_t depth = options.prefetch_depth;
            for (auto it = ahead.begin(); it != ahead.end();) {
              const bool keep = it->first.first == req.epoch && it->first.second > req.sample_index &&
                                it->first.second - req.sample_index <= depth;
              it = keep ? std::next(it) : ahead.erase(it);
            }
            for (std::uint64_t k = 1; k <= depth && req.sample_index + k > req.sample_index; ++k) {
              const auto next_key = std::make_pair(req.epoch, req.sample_index + k);
              if (!ahead.contains(next_key)) ahead.emplace(next_key, submit(req.epoch, req.sample_index + k, std::nullopt));
            }
          }
          std::shared_ptr<const Bytes> bytes;
          try {
            bytes = fut.get();
          } catch (const std::exception& e) {
            fail(ErrorCodeWire::kInternal, e.what());
            return;
          }
          wire::send_bytes(fd, *bytes);
          ++served;
          ++n_served;
          break;
        }
        case Op::kBye:
          wire::send_frame(fd, wire::make_frame(wire::ByeReply{served}));
          return;
        default:
          fail(ErrorCodeWire::kBadRequest, std::string(wire::op_name(op)) + " is a server reply");
          return;
      }
    }
  } catch (const std::exception& e) {
    // Peer went away mid-send, or the server is shutting down.
    spdlog::debug("connection closed: {}", e.what());
  }
}

FeedServer::FeedServer(std::shared_ptr<const Dataset> dataset, PipelineConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!dataset || dataset->size() == 0) throw Error(ErrorCode::kInvalidArgument, "server needs a non-empty dataset");
  if (options.workers == 0) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  config.validate();
  impl_->dataset = std::move(dataset);
  impl_->config = std::move(config);
  impl_->endpoint = parse_bind(options.bind);
  impl_->options = std::move(options);
}

FeedServer::~FeedServer() { stop(); }

void FeedServer::start() {
  Impl& s = *impl_;
  if (s.running.exchange(true)) throw Error(ErrorCode::kInvalidArgument, "server already started");
  try {
    s.listen_fd = s.endpoint.is_unix ? listen_unix(s.endpoint.path) : listen_tcp(s.endpoint.host, s.endpoint.port);
  } catch (...) {
    s.running = false;
    throw;
  }
  if (!s.endpoint.is_unix) {
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(s.listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    s.bound_port = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                              : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  }
  s.pool = std::make_unique<WorkerPool>(s.options.workers);
  s.started = std::chrono::steady_clock::now();
  s.acceptor = std::thread([&s] { s.accept_loop(); });
  spdlog::info("serving {} cases on {} with {} workers", s.dataset->size(),
               s.endpoint.is_unix ? s.endpoint.path : s.endpoint.host + ":" + std::to_string(s.bound_port),
               s.options.workers);
}

void FeedServer::stop() {
  Impl& s = *impl_;
  if (!s.running.load() || s.stopping.exchange(true)) return;
  if (s.acceptor.joinable()) s.acceptor.join();
  {
    std::lock_guard lock(s.conn_mu);
    for (auto& c : s.connections) ::shutdown(c.fd, SHUT_RDWR);
  }
  s.pool->shutdown();
  {
    std::lock_guard lock(s.conn_mu);
    for (auto& c : s.connections) {
      c.thread.join();
      ::close(c.fd);
    }
    s.connections.clear();
  }
  ::close(s.listen_fd);
  if (s.endpoint.is_unix) ::unlink(s.endpoint.path.c_str());
  const ServerStats st = stats();
  spdlog::info("served {} samples over {} connections ({:.1f} samples/s)", st.samples_served, st.connections,
               st.samples_per_second);
  {
    std::lock_guard lock(s.state_mu);
    s.stopped = true;
  }
  s.state_cv.notify_all();
}

void FeedServer::wait() {
  std::unique_lock lock(impl_->state_mu);
  impl_->state_cv.wait(lock, [this] { return impl_->stopped; });
}

int FeedServer::port() const noexcept { return impl_->bound_port; }

ServerStats FeedServer::stats() const {
  ServerStats st;
  st.connections = impl_->n_connections.load();
  st.samples_served = impl_->n_served.load();
  if (impl_->running.load()) {
    st.uptime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - impl_->started).count();
    if (st.uptime_seconds > 0) st.samples_per_second = static_cast<double>(st.samples_served) / st.uptime_seconds;
  }
  return st;
}

}  // namespace tumorcp
