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

#ifndef CLUSTERFETCH_NET_HPP_
#define CLUSTERFETCH_NET_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "clusterfetch/wire.hpp"

namespace clusterfetch {

// Owns a POSIX socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      Close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { Close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void Shutdown();
  void Close();

 private:
  int fd_ = -1;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

// "host:port"; throws kInvalidArgument.
HostPort ParseHostPort(std::string_view text);

Socket ConnectTcp(const HostPort& addr);
Socket ListenTcp(const HostPort& addr, int backlog = 64);
std::uint16_t LocalPort(const Socket& s);

void WriteAll(int fd, std::span<const std::uint8_t> bytes);
void WriteFrame(int fd, const Frame& frame);

// nullopt on a clean close before the first byte. A bad length prefix
// throws kProtocol; a close mid-frame or an I/O error throws kTransport.
std::optional<Frame> ReadFrame(int fd);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_NET_HPP_
