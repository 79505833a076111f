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

#include "lmcr/remote_scorer.h"

#include <chrono>
#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "lmcr/status.h"

namespace lmcr {
namespace {

using nlohmann::json;

constexpr std::size_t kExcerptBytes = 160;

std::string Excerpt(std::string_view payload) {
  if (payload.size() <= kExcerptBytes) return std::string(payload);
  return std::string(payload.substr(0, kExcerptBytes)) + "...";
}

[[noreturn]] void ProtocolFail(const std::string &what, std::string_view payload) {
  Fail(ErrorCode::kProtocolError, what + "; payload: " + Excerpt(payload));
}

// Failure that may succeed on a later attempt.
struct Transient {
  std::string message;
};

}  // namespace

std::string Endpoint::ToString() const {
  return "http://" + host + ":" + std::to_string(port) + prefix;
}

Endpoint ParseEndpoint(std::string_view url) {
  static const std::regex kPattern(
      R"(^http://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(?::([0-9]{1,5}))?(/[^\s?#]*)?$)");
  std::cmatch m;
  if (!std::regex_match(url.data(), url.data() + url.size(), m, kPattern)) {
    Fail(ErrorCode::kConfigError, "invalid endpoint URL: " + std::string(url));
  }
  Endpoint e;
  e.host = m[1].str();
  if (m[2].matched) {
    e.port = std::stoi(m[2].str());
    if (e.port < 1 || e.port > 65535) {
      Fail(ErrorCode::kConfigError, "endpoint port out of range: " + std::string(url));
    }
  }
  e.prefix = m[3].matched ? m[3].str() : "";
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

RemoteScorer::RemoteScorer(RemoteOptions options)
    : options_(std::move(options)),
      endpoint_(ParseEndpoint(options_.endpoint)),
      in_flight_(std::max(options_.max_in_flight, 1)) {
  if (!(options_.timeout_seconds > 0.0)) {
    Fail(ErrorCode::kConfigError, "remote timeout must be positive");
  }
  if (options_.batch_size == 0) {
    Fail(ErrorCode::kConfigError, "remote batch size must be positive");
  }
  if (options_.max_retries < 0) {
    Fail(ErrorCode::kConfigError, "remote retries must be non-negative");
  }
  if (options_.max_in_flight < 1) {
    Fail(ErrorCode::kConfigError, "in-flight cap must be positive");
  }
}

RemoteScorer::~RemoteScorer() = default;

std::string RemoteScorer::name() const { return "remote:" + options_.endpoint; }

std::optional<uint64_t> RemoteScorer::vocab_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!descriptor_) return std::nullopt;
  return descriptor_->vocab_size;
}

template <typename Call>
std::string RemoteScorer::WithRetries(const std::string &what, Call call) const {
  std::string last;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    in_flight_.acquire();
    try {
      std::string body = call();
      in_flight_.release();
      return body;
    } catch (const Transient &t) {
      in_flight_.release();
      last = t.message;
    } catch (...) {
      in_flight_.release();
      throw;
    }
  }
  Fail(ErrorCode::kUnavailable,
       what + " failed at " + options_.endpoint + ": " + last);
}

namespace {

std::unique_ptr<httplib::Client> MakeClient(const Endpoint &endpoint,
                                            const RemoteOptions &options) {
  auto client = std::make_unique<httplib::Client>(endpoint.host, endpoint.port);
  auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(options.timeout_seconds));
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  client->set_keep_alive(false);
  if (options.auth_token) client->set_bearer_token_auth(*options.auth_token);
  return client;
}

std::string CheckReply(const httplib::Result &res) {
  if (!res) throw Transient{httplib::to_string(res.error())};
  if (res->status >= 500) {
    throw Transient{"HTTP " + std::to_string(res->status)};
  }
  if (res->status == 413) {
    ProtocolFail("server refused the batch as too large (HTTP 413)", res->body);
  }
  if (res->status != 200) {
    ProtocolFail("unexpected HTTP " + std::to_string(res->status), res->body);
  }
  return res->body;
}

}  // namespace

std::string RemoteScorer::Get(const std::string &path) const {
  return WithRetries("GET " + path, [&] {
    auto client = MakeClient(endpoint_, options_);
    return CheckReply(client->Get(endpoint_.prefix + path));
  });
}

std::string RemoteScorer::Post(const std::string &path,
                               const std::string &body) const {
  return WithRetries("POST " + path, [&] {
    auto client = MakeClient(endpoint_, options_);
    return CheckReply(
        client->Post(endpoint_.prefix + path, body, "application/json"));
  });
}

ServerDescriptor RemoteScorer::Health() const {
  std::string body = Get("/health");
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) ProtocolFail("malformed /health reply", body);
  auto name = j.find("name");
  auto dir = j.find("direction");
  auto vocab = j.find("vocab_size");
  if (name == j.end() || !name->is_string() || dir == j.end() ||
      !dir->is_string() || vocab == j.end() || !vocab->is_number_integer() ||
      vocab->get<int64_t>() < 0) {
    ProtocolFail("malformed /health reply", body);
  }
  ServerDescriptor d;
  d.name = name->get<std::string>();
  std::string dir_name = dir->get<std::string>();
  if (dir_name != "forward" && dir_name != "backward") {
    ProtocolFail("unknown direction in /health reply", body);
  }
  d.direction = ParseDirection(dir_name);
  d.vocab_size = vocab->get<uint64_t>();
  if (d.direction != options_.direction) {
    Fail(ErrorCode::kConfigError,
         "server at " + options_.endpoint + " is " +
             std::string(DirectionName(d.direction)) + " but " +
             std::string(DirectionName(options_.direction)) + " was configured");
  }
  std::lock_guard<std::mutex> lock(mu_);
  descriptor_ = d;
  return d;
}

std::vector<double> RemoteScorer::CondLogProbs(const TokenSequence &seq) const {
  return CondLogProbsBatch(std::span<const TokenSequence>(&seq, 1)).front();
}

std::vector<std::vector<double>> RemoteScorer::CondLogProbsBatch(
    std::span<const TokenSequence> batch) const {
  if (batch.empty()) Fail(ErrorCode::kInvalidArgument, "empty batch");
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); i += options_.batch_size) {
    auto part = ScoreChunk(
        batch.subspan(i, std::min(options_.batch_size, batch.size() - i)));
    for (auto &row : part) out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::vector<double>> RemoteScorer::ScoreChunk(
    std::span<const TokenSequence> chunk) const {
  const std::string id = std::to_string(next_id_.fetch_add(1));
  json request = {{"id", id}, {"sequences", json::array()}};
  for (const auto &seq : chunk) request["sequences"].push_back(seq.tokens());
  const std::string body = Post("/score", request.dump());

  json reply = json::parse(body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) {
    ProtocolFail("malformed /score reply", body);
  }
  auto rid = reply.find("id");
  if (rid == reply.end() || !rid->is_string()) ProtocolFail("reply without id", body);
  if (rid->get<std::string>() != id) {
    ProtocolFail("reply id does not match request id " + id, body);
  }
  auto rows = reply.find("logprobs");
  if (rows == reply.end() || !rows->is_array()) {
    ProtocolFail("reply without logprobs array", body);
  }
  if (rows->size() != chunk.size()) {
    ProtocolFail("expected " + std::to_string(chunk.size()) + " rows, got " +
                     std::to_string(rows->size()),
                 body);
  }
  std::vector<std::vector<double>> out(chunk.size());
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    const json &row = (*rows)[i];
    const std::size_t want = chunk[i].size() - 1;
    if (!row.is_array() || row.size() != want) {
      ProtocolFail("row " + std::to_string(i) + " should hold " +
                       std::to_string(want) + " values",
                   body);
    }
    out[i].reserve(want);
    for (const json &v : row) {
      if (!v.is_number() || v.get<double>() > 0.0) {
        ProtocolFail("row " + std::to_string(i) + " has a value that is not a log-probability",
                     body);
      }
      out[i].push_back(v.get<double>());
    }
  }
  return out;
}

}  // namespace lmcr
