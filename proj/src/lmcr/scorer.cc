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

#include "lmcr/scorer.h"

#include <cmath>

#include "lmcr/status.h"

namespace lmcr {

std::string_view DirectionName(Direction d) {
  return d == Direction::kForward ? "forward" : "backward";
}

Direction ParseDirection(std::string_view name) {
  if (name == "forward") return Direction::kForward;
  if (name == "backward") return Direction::kBackward;
  Fail(ErrorCode::kConfigError, "unknown direction '" + std::string(name) + "'");
}

std::vector<std::vector<double>> Scorer::CondLogProbsBatch(
    std::span<const TokenSequence> batch) const {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto &seq : batch) out.push_back(CondLogProbs(seq));
  return out;
}

UniformScorer::UniformScorer(uint64_t vocab_size, Direction direction)
    : vocab_size_(vocab_size), direction_(direction) {
  if (vocab_size == 0) {
    Fail(ErrorCode::kConfigError, "uniform scorer needs a positive vocab size");
  }
}

std::vector<double> UniformScorer::CondLogProbs(const TokenSequence &seq) const {
  return std::vector<double>(seq.size() - 1,
                             -std::log(static_cast<double>(vocab_size_)));
}

std::string UniformScorer::name() const {
  return "uniform-" + std::to_string(vocab_size_);
}

}  // namespace lmcr
