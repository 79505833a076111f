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

#ifndef LMCR_REMOTE_SCORER_H_
#define LMCR_REMOTE_SCORER_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "lmcr/scorer.h"
#include "lmcr/text.h"

namespace lmcr {

// A parsed "http://host[:port][/prefix]" endpoint.
struct Endpoint {
  std::string host;
  int port = 80;
  std::string prefix;

  std::string ToString() const;
};

// Throws kConfigError for anything but a plain http URL with a valid port.
Endpoint ParseEndpoint(std::string_view url);

struct RemoteOptions {
  std::string endpoint;
  double timeout_seconds = 10.0;
  Direction direction = Direction::kForward;
  std::optional<std::string> auth_token;
  // Sequences per request.
  std::size_t batch_size = 64;
  // Extra attempts after a transport failure or a 5xx reply.
  int max_retries = 2;
  // Requests allowed on the wire at once across all callers.
  int max_in_flight = 4;
};

struct ServerDescriptor {
  std::string name;
  Direction direction = Direction::kForward;
  uint64_t vocab_size = 0;
};

// Scorer backed by a service speaking the /score + /health JSON protocol.
// Sequences are sent with their <s> and </s> markers; the reply must hold
// size() - 1 non-positive natural-log values per sequence.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(RemoteOptions options);
  ~RemoteScorer() override;

  std::vector<double> CondLogProbs(const TokenSequence &seq) const override;
  std::vector<std::vector<double>> CondLogProbsBatch(
      std::span<const TokenSequence> batch) const override;

  Direction direction() const override { return options_.direction; }
  std::string name() const override;
  // Known after a successful Health().
  std::optional<uint64_t> vocab_size() const override;

  // Throws kConfigError when the advertised direction differs from the
  // configured one.
  ServerDescriptor Health() const;

  const RemoteOptions &options() const { return options_; }

 private:
  std::vector<std::vector<double>> ScoreChunk(
      std::span<const TokenSequence> chunk) const;
  std::string Get(const std::string &path) const;
  std::string Post(const std::string &path, const std::string &body) const;
  template <typename Call>
  std::string WithRetries(const std::string &what, Call call) const;

  RemoteOptions options_;
  Endpoint endpoint_;
  mutable std::counting_semaphore<> in_flight_;
  mutable std::atomic<uint64_t> next_id_{1};
  mutable std::mutex mu_;
  mutable std::optional<ServerDescriptor> descriptor_;
};

}  // namespace lmcr

#endif  // LMCR_REMOTE_SCORER_H_
