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

#ifndef LMCR_SCORER_H_
#define LMCR_SCORER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmcr/text.h"

namespace lmcr {

enum class Direction { kForward, kBackward };

std::string_view DirectionName(Direction d);
// Throws kConfigError for anything but "forward"/"backward".
Direction ParseDirection(std::string_view name);

// An autoregressive language model: for a token sequence it yields
// log P(w_t | w_0..w_{t-1}) (natural log) for every t >= 1, so the result
// has size() - 1 entries. Backward models are handed already-reversed
// sequences by their callers. Implementations must be safe to call
// concurrently.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::vector<double> CondLogProbs(const TokenSequence &seq) const = 0;
  virtual std::vector<std::vector<double>> CondLogProbsBatch(
      std::span<const TokenSequence> batch) const;

  virtual Direction direction() const = 0;
  virtual std::string name() const = 0;
  // Size of the predicted vocabulary, when known.
  virtual std::optional<uint64_t> vocab_size() const { return std::nullopt; }
};

// Source of Count(c) for full-normalized scoring.
class UnigramCounter {
 public:
  virtual ~UnigramCounter() = default;
  virtual uint64_t UnigramCount(std::string_view token) const = 0;
};

// Every position gets -ln(vocab_size).
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(uint64_t vocab_size,
                         Direction direction = Direction::kForward);

  std::vector<double> CondLogProbs(const TokenSequence &seq) const override;
  Direction direction() const override { return direction_; }
  std::string name() const override;
  std::optional<uint64_t> vocab_size() const override { return vocab_size_; }

 private:
  uint64_t vocab_size_;
  Direction direction_;
};

}  // namespace lmcr

#endif  // LMCR_SCORER_H_
