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

#ifndef LMCR_ANALYSIS_H_
#define LMCR_ANALYSIS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmcr/dataset.h"
#include "lmcr/resolver.h"
#include "lmcr/scorer.h"

namespace lmcr {

enum class PositionKind { kPrefix, kCandidate, kSuffix };

// log q_t at one scored position. `position` indexes the original question
// tokens; every candidate position maps onto the pronoun start.
struct PositionRatio {
  std::size_t position = 0;
  std::string token;
  double log_ratio = 0.0;
  PositionKind kind = PositionKind::kSuffix;
};

// Per-position log-ratios between substituting the "correct" and the
// "incorrect" candidate, in original token order.
struct RatioProfile {
  std::string question_id;
  ScoreMode mode = ScoreMode::kPartial;
  Direction direction = Direction::kForward;
  std::size_t correct = 0;
  std::size_t incorrect = 1;
  std::vector<PositionRatio> positions;
  // Scored range, as positions of the correct substitution in scoring order.
  std::size_t range_lo = 0;
  std::size_t range_hi = 0;
  // log Q, the sum of log q_t.
  double log_q = 0.0;
  // score(correct) - score(incorrect) summed directly from the two
  // substitutions' log-probabilities.
  double score_difference = 0.0;
};

// Forward scorer; mode is full or partial. Throws kEmptySuffix in partial
// mode when a candidate ends the sentence.
RatioProfile PositionRatios(const Scorer &scorer, const SchemaQuestion &q,
                            std::pair<std::size_t, std::size_t> pair,
                            ScoreMode mode);

// Backward scorer: both substitutions are reversed before scoring, so the
// "suffix" in partial mode covers the words before the pronoun. Positions are
// mapped back to original indices (interior index i <-> n-1-i).
RatioProfile BackwardRatios(const Scorer &scorer, const SchemaQuestion &q,
                            std::pair<std::size_t, std::size_t> pair,
                            ScoreMode mode);

struct QDecision {
  std::size_t choice = 0;
  bool tie = false;
};

// Picks `correct` iff log Q > 0; a tie goes to the lower candidate index.
QDecision DecideByQ(const RatioProfile &profile);

struct KeywordReport {
  std::size_t top_k = 2;
  std::vector<PositionRatio> top;
  // Rank top_k and top_k + 1 share a value.
  bool tie = false;
  // Fewer positions than top_k were available.
  bool truncated = false;
  bool annotated = false;
  bool hit = false;
};

KeywordReport DetectKeywords(const RatioProfile &profile, std::size_t top_k = 2,
                             std::optional<std::size_t> special_word = std::nullopt);

struct Heatmap {
  // One entry per rendered token: original index, normalized |log q| and
  // the sign of log q.
  std::vector<std::size_t> positions;
  std::vector<double> intensity;
  std::vector<int> sign;
  std::string ansi;
  std::string html;
};

// q-hat = |log q| / max |log q|. The pronoun slot gathers the candidate
// positions; markers are shown only when scored.
Heatmap RenderHeatmap(const RatioProfile &profile, const SchemaQuestion &q);

std::string HtmlEscape(std::string_view text);

}  // namespace lmcr

#endif  // LMCR_ANALYSIS_H_
