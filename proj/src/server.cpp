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

#include "clusterfetch/server.hpp"

#include <sys/socket.h>

#include <cerrno>
#include <exception>

namespace clusterfetch {
namespace {

std::optional<AnyMatrix> Lift(const std::optional<FetchDatabase>& db) {
  if (!db) return std::nullopt;
  return WithWord(db->params.cipher_mod_bits, [&]<class Word>(Word) -> AnyMatrix {
    return LiftPlaintext<Word>(db->plain.entries, db->params);
  });
}

}  // namespace

Server::Server(Index index) : index_(std::move(index)) {
  cluster_db_ = Lift(index_.clusters);
  doc_db_ = Lift(index_.docs);
  node_db_ = Lift(index_.nodes);
  if (index_.score_params) {
    for (const auto& m : index_.scoring.matrices) {
      score_dbs_.push_back(LiftPlaintext<std::uint64_t>(m, *index_.score_params));
    }
  }
}

Frame Server::HandleMessage(const Frame& request) const {
  try {
    switch (request.type()) {
      case MsgType::kSetupReq: return HandleSetup(request);
      case MsgType::kPirQuery: return HandlePirQuery(request);
      case MsgType::kScoreQuery: return HandleScoreQuery(request);
      default:
        return ErrorFrame(ErrorCode::kUnknownMessage,
                          "unknown message type " + std::to_string(request.msg_type));
    }
  } catch (const Error& e) {
    return ErrorFrame(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return ErrorFrame(ErrorCode::kInternal, "out of memory");
  } catch (const std::exception& e) {
    return ErrorFrame(ErrorCode::kInternal, e.what());
  }
}

Frame Server::HandleSetup(const Frame& request) const {
  std::uint8_t mask = kAllComponents;
  if (request.payload.size() == 1) {
    mask = request.payload[0];
  } else if (!request.payload.empty()) {
    throw Error(ErrorCode::kProtocol, "SETUP_REQ payload must be empty or one mask byte");
  }
  ByteWriter w;
  WritePublicSetup(w, index_, mask);
  return MakeFrame(MsgType::kSetupResp, w.take());
}

Frame Server::HandlePirQuery(const Frame& request) const {
  ByteReader r(request.payload, ErrorCode::kProtocol);
  const auto target = r.get<std::uint8_t>();
  const FetchDatabase* db = nullptr;
  const AnyMatrix* lifted = nullptr;
  switch (static_cast<TargetMatrix>(target)) {
    case TargetMatrix::kCluster:
      if (index_.clusters) db = &*index_.clusters, lifted = &*cluster_db_;
      break;
    case TargetMatrix::kDoc:
      if (index_.docs) db = &*index_.docs, lifted = &*doc_db_;
      break;
    case TargetMatrix::kNode:
      if (index_.nodes) db = &*index_.nodes, lifted = &*node_db_;
      break;
    default:
      throw Error(ErrorCode::kProtocol, "unknown target matrix " + std::to_string(target));
  }
  if (db == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "index has no matrix for target " + std::to_string(target));
  }
  return WithWord(db->params.cipher_mod_bits, [&]<class Word>(Word) {
    PirQuery<Word> q{ReadResidues<Word>(r), db->params.profile};
    if (!r.done()) throw Error(ErrorCode::kProtocol, "trailing bytes in PIR_QUERY");
    const PirAnswer<Word> ans = Answer(std::get<Matrix<Word>>(*lifted), q);
    answers_.fetch_add(1);
    return MakePirAnswerFrame(ans);
  });
}

Frame Server::HandleScoreQuery(const Frame& request) const {
  if (!index_.score_params) throw Error(ErrorCode::kInvalidArgument, "index has no scoring matrices");
  ByteReader r(request.payload, ErrorCode::kProtocol);
  const auto cluster = r.get<std::uint32_t>();
  PirQuery<std::uint64_t> q{ReadResidues<std::uint64_t>(r), Profile::kScoring};
  if (!r.done()) throw Error(ErrorCode::kProtocol, "trailing bytes in SCORE_QUERY");
  if (cluster >= score_dbs_.size()) {
    throw Error(ErrorCode::kUnknownCluster, "cluster " + std::to_string(cluster) + " of " +
                                                std::to_string(score_dbs_.size()));
  }
  const auto ans = Answer(score_dbs_[cluster], q);
  answers_.fetch_add(1);
  return MakeScoreAnswerFrame(ans);
}

TcpServer::TcpServer(const Server& server, const HostPort& listen)
    : server_(server), listener_(ListenTcp(listen)), port_(LocalPort(listener_)) {}

TcpServer::~TcpServer() { Stop(); }

void TcpServer::Start() { acceptor_ = std::thread([this] { AcceptLoop(); }); }

void TcpServer::Wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void TcpServer::Stop() {
  if (stopping_.exchange(true)) {
    Wait();
    return;
  }
  listener_.Shutdown();
  Wait();
  std::vector<Connection> conns;
  {
    std::lock_guard lock(mu_);
    conns.swap(connections_);
  }
  for (auto& c : conns) c.socket.Shutdown();
  for (auto& c : conns) {
    if (c.thread.joinable()) c.thread.join();
  }
  listener_.Close();
}

void TcpServer::AcceptLoop() {
  while (!stopping_.load()) {
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    std::lock_guard lock(mu_);
    // Reap finished connections so long-running servers do not accumulate threads.
    std::erase_if(connections_, [](Connection& c) {
      if (!c.done->load()) return false;
      c.thread.join();
      return true;
    });
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread worker([this, fd, done] {
      ServeConnection(fd);
      done->store(true);
    });
    connections_.push_back({Socket(fd), std::move(worker), std::move(done)});
  }
}

void TcpServer::ServeConnection(int fd) const {
  try {
    while (true) {
      std::optional<Frame> request;
      try {
        request = ReadFrame(fd);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kProtocol) WriteFrame(fd, ErrorFrame(e.code(), e.what()));
        break;
      }
      if (!request) break;
      WriteFrame(fd, server_.HandleMessage(*request));
    }
  } catch (const std::exception&) {
    // Transport failure: drop the connection.
  }
  ::shutdown(fd, SHUT_RDWR);
}

}  // namespace clusterfetch
