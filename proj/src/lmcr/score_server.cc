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

#include "lmcr/score_server.h"

#include "httplib.h"
#include "json.hpp"
#include "lmcr/status.h"

namespace lmcr {
namespace {

using nlohmann::json;

std::string ErrorBody(const std::string &message) {
  return json{{"error", message}}.dump();
}

}  // namespace

ScoreServer::ScoreServer(std::shared_ptr<const Scorer> scorer,
                         ServerOptions options)
    : scorer_(std::move(scorer)), options_(std::move(options)) {
  if (!scorer_) Fail(ErrorCode::kInvalidArgument, "server needs a scorer");
  if (options_.port < 0 || options_.port > 65535) {
    Fail(ErrorCode::kConfigError, "port out of range");
  }
  if (options_.max_batch == 0) {
    Fail(ErrorCode::kConfigError, "max batch must be positive");
  }
  if (options_.name.empty()) options_.name = scorer_->name();
}

ScoreServer::~ScoreServer() { Stop(); }

std::string ScoreServer::HandleHealth() const {
  json j = {{"name", options_.name},
            {"direction", std::string(DirectionName(scorer_->direction()))},
            {"vocab_size", scorer_->vocab_size().value_or(0)}};
  return j.dump();
}

int ScoreServer::HandleScore(const std::string &body, std::string *reply) const {
  json request = json::parse(body, nullptr, false);
  if (request.is_discarded() || !request.is_object()) {
    *reply = ErrorBody("request is not a JSON object");
    return 400;
  }
  auto id = request.find("id");
  auto seqs = request.find("sequences");
  if (id == request.end() || !id->is_string() || seqs == request.end() ||
      !seqs->is_array()) {
    *reply = ErrorBody("request needs a string id and a sequences array");
    return 400;
  }
  if (seqs->size() > options_.max_batch) {
    *reply = ErrorBody("batch of " + std::to_string(seqs->size()) +
                       " exceeds the limit of " +
                       std::to_string(options_.max_batch));
    return 413;
  }
  std::vector<TokenSequence> batch;
  batch.reserve(seqs->size());
  try {
    for (const json &seq : *seqs) {
      batch.push_back(TokenSequence::FromTokens(seq.get<std::vector<std::string>>()));
    }
  } catch (const std::exception &e) {
    *reply = ErrorBody(std::string("bad sequence: ") + e.what());
    return 400;
  }
  json rows = json::array();
  if (!batch.empty()) {
    try {
      for (auto &row : scorer_->CondLogProbsBatch(batch)) rows.push_back(std::move(row));
    } catch (const std::exception &e) {
      *reply = ErrorBody(e.what());
      return 500;
    }
  }
  *reply = json{{"id", *id}, {"logprobs", std::move(rows)}}.dump();
  return 200;
}

int ScoreServer::Start() {
  if (server_) Fail(ErrorCode::kInvalidArgument, "server already started");
  server_ = std::make_unique<httplib::Server>();
  auto authorized = [this](const httplib::Request &req, httplib::Response &res) {
    if (!options_.auth_token) return true;
    if (req.get_header_value("Authorization") == "Bearer " + *options_.auth_token) {
      return true;
    }
    res.status = 401;
    res.set_content(ErrorBody("unauthorized"), "application/json");
    return false;
  };
  server_->Get("/health", [this, authorized](const httplib::Request &req,
                                              httplib::Response &res) {
    if (!authorized(req, res)) return;
    res.set_content(HandleHealth(), "application/json");
  });
  server_->Post("/score", [this, authorized](const httplib::Request &req,
                                              httplib::Response &res) {
    if (!authorized(req, res)) return;
    std::string reply;
    res.status = HandleScore(req.body, &reply);
    res.set_content(reply, "application/json");
  });
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ <= 0) {
    server_.reset();
    Fail(ErrorCode::kIoError, "cannot bind " + options_.host + ":" +
                                  std::to_string(options_.port));
  }
  stopped_ = false;
  thread_ = std::thread([this] {
    server_->listen_after_bind();
    std::lock_guard<std::mutex> lock(mu_);
    stopped_ = true;
    stopped_cv_.notify_all();
  });
  server_->wait_until_ready();
  return port_;
}

void ScoreServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void ScoreServer::Wait() {
  if (!server_) return;
  std::unique_lock<std::mutex> lock(mu_);
  stopped_cv_.wait(lock, [this] { return stopped_; });
}

}  // namespace lmcr
