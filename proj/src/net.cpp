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

#include "clusterfetch/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>

namespace clusterfetch {
namespace {

[[noreturn]] void Fail(const std::string& what) {
  throw Error(ErrorCode::kTransport, what + ": " + std::strerror(errno));
}

// Returns bytes read before EOF (== out.size() when complete).
std::size_t ReadUpTo(int fd, std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t n = ::recv(fd, out.data() + done, out.size() - done, 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail("recv");
    }
    done += static_cast<std::size_t>(n);
  }
  return done;
}

addrinfo* Resolve(const HostPort& addr, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(addr.port);
  const int rc = ::getaddrinfo(addr.host.empty() ? nullptr : addr.host.c_str(), port.c_str(),
                               &hints, &res);
  if (rc != 0) {
    throw Error(ErrorCode::kTransport, "resolve " + addr.host + ": " + ::gai_strerror(rc));
  }
  return res;
}

}  // namespace

void Socket::Shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

HostPort ParseHostPort(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "expected host:port, got '" + std::string(text) + "'");
  }
  HostPort hp;
  hp.host = std::string(text.substr(0, colon));
  if (hp.host.size() >= 2 && hp.host.front() == '[' && hp.host.back() == ']') {
    hp.host = hp.host.substr(1, hp.host.size() - 2);
  }
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port '" + std::string(port) + "'");
  }
  hp.port = static_cast<std::uint16_t>(value);
  return hp;
}

Socket ConnectTcp(const HostPort& addr) {
  addrinfo* res = Resolve(addr, false);
  Socket s;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    Socket candidate(::socket(p->ai_family, p->ai_socktype, p->ai_protocol));
    if (!candidate.valid()) continue;
    if (::connect(candidate.fd(), p->ai_addr, p->ai_addrlen) == 0) {
      s = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!s.valid()) Fail("connect " + addr.host + ":" + std::to_string(addr.port));
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

Socket ListenTcp(const HostPort& addr, int backlog) {
  addrinfo* res = Resolve(addr, true);
  Socket s;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    Socket candidate(::socket(p->ai_family, p->ai_socktype, p->ai_protocol));
    if (!candidate.valid()) continue;
    int one = 1;
    ::setsockopt(candidate.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(candidate.fd(), p->ai_addr, p->ai_addrlen) == 0 &&
        ::listen(candidate.fd(), backlog) == 0) {
      s = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!s.valid()) Fail("listen " + addr.host + ":" + std::to_string(addr.port));
  return s;
}

std::uint16_t LocalPort(const Socket& s) {
  sockaddr_storage ss{};
  socklen_t len = sizeof(ss);
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&ss), &len) != 0) Fail("getsockname");
  if (ss.ss_family == AF_INET6) {
    return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
  }
  return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
}

void WriteAll(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail("send");
    }
    done += static_cast<std::size_t>(n);
  }
}

void WriteFrame(int fd, const Frame& frame) { WriteAll(fd, EncodeFrame(frame)); }

std::optional<Frame> ReadFrame(int fd) {
  std::uint8_t header[4];
  const std::size_t got = ReadUpTo(fd, header);
  if (got == 0) return std::nullopt;
  if (got < sizeof(header)) {
    throw Error(ErrorCode::kTransport, "connection closed inside a frame header");
  }
  std::uint32_t length;
  std::memcpy(&length, header, sizeof(length));
  if (length == 0 || length > kMaxFrameLength) {
    throw Error(ErrorCode::kProtocol, "bad frame length " + std::to_string(length));
  }
  // Grow with the data actually received, not the declared length.
  constexpr std::size_t kStep = std::size_t{1} << 20;
  Bytes body;
  while (body.size() < length) {
    const std::size_t old = body.size();
    const std::size_t step = std::min<std::size_t>(kStep, length - old);
    body.resize(old + step);
    if (ReadUpTo(fd, std::span(body).subspan(old)) != step) {
      throw Error(ErrorCode::kTransport, "connection closed inside a frame body");
    }
  }
  Frame f;
  f.msg_type = body[0];
  f.payload.assign(body.begin() + 1, body.end());
  return f;
}

}  // namespace clusterfetch
