// Copyright 2026 The clusterfetch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLUSTERFETCH_SERVER_HPP_
#define CLUSTERFETCH_SERVER_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "clusterfetch/index.hpp"
#include "clusterfetch/net.hpp"
#include "clusterfetch/wire.hpp"

namespace clusterfetch {

// Answers requests against an immutable index. Holds no per-client state and
// never a decryption key; HandleMessage is safe to call from many threads.
class Server {
 public:
  explicit Server(Index index);

  // Never throws: failures come back as ERROR frames.
  Frame HandleMessage(const Frame& request) const;

  // Number of homomorphic products computed (PIR and scoring answers).
  std::uint64_t answer_count() const { return answers_.load(); }
  const Index& index() const { return index_; }

 private:
  Frame HandleSetup(const Frame& request) const;
  Frame HandlePirQuery(const Frame& request) const;
  Frame HandleScoreQuery(const Frame& request) const;

  Index index_;
  std::optional<AnyMatrix> cluster_db_;
  std::optional<AnyMatrix> doc_db_;
  std::optional<AnyMatrix> node_db_;
  std::vector<Matrix<std::uint64_t>> score_dbs_;
  mutable std::atomic<std::uint64_t> answers_{0};
};

// Thread-per-connection TCP front end; responses on a connection are sent in
// request order.
class TcpServer {
 public:
  TcpServer(const Server& server, const HostPort& listen);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }
  // Accepts on a background thread.
  void Start();
  // Blocks until Stop() (from another thread or a signal handler path).
  void Wait();
  void Stop();

 private:
  struct Connection {
    Socket socket;
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void AcceptLoop();
  void ServeConnection(int fd) const;

  const Server& server_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<Connection> connections_;
};

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_SERVER_HPP_
