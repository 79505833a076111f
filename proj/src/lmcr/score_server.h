// Copyright 2026 The LMCR Authors.
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

#ifndef LMCR_SCORE_SERVER_H_
#define LMCR_SCORE_SERVER_H_

#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "lmcr/scorer.h"

namespace httplib {
class Server;
}  // namespace httplib

namespace lmcr {

struct ServerOptions {
  std::string host = "127.0.0.1";
  // Zero picks a free port.
  int port = 0;
  // Larger batches are refused with HTTP 413.
  std::size_t max_batch = 1024;
  // Advertised by /health; defaults to the scorer's name.
  std::string name;
  // When set, requests must carry "Authorization: Bearer <token>".
  std::optional<std::string> auth_token;
};

// Serves a Scorer over the /score + /health protocol on a background thread.
class ScoreServer {
 public:
  ScoreServer(std::shared_ptr<const Scorer> scorer, ServerOptions options);
  ~ScoreServer();
  ScoreServer(const ScoreServer &) = delete;
  ScoreServer &operator=(const ScoreServer &) = delete;

  // Binds and starts serving; returns the bound port. Throws kIoError when
  // the port cannot be bound.
  int Start();
  void Stop();
  // Blocks until the server stops.
  void Wait();
  int port() const { return port_; }

  // Request handling without the network, for tests and embedding.
  // Returns the HTTP status and fills `reply`.
  int HandleScore(const std::string &body, std::string *reply) const;
  std::string HandleHealth() const;

 private:
  std::shared_ptr<const Scorer> scorer_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::condition_variable stopped_cv_;
  bool stopped_ = false;
};

}  // namespace lmcr

#endif  // LMCR_SCORE_SERVER_H_
