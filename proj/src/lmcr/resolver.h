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

#ifndef LMCR_RESOLVER_H_
#define LMCR_RESOLVER_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmcr/dataset.h"
#include "lmcr/scorer.h"
#include "lmcr/text.h"

namespace lmcr {

enum class ScoreMode { kFull, kPartial, kFullNormalized };
enum class Combine { kMeanLogScore, kMajorityVote };

std::string_view ScoreModeName(ScoreMode mode);
ScoreMode ParseScoreMode(std::string_view name);
std::string_view CombineName(Combine combine);
Combine ParseCombine(std::string_view name);

// Scores closer than this count as a tie.
inline constexpr double kTieTolerance = 1e-12;

inline constexpr std::string_view kPossessiveClitic = "'s";

// The question sentence with the pronoun span replaced by one candidate.
// `candidate` covers the candidate tokens (plus the possessive clitic when
// one was added); `suffix_start` is the first position after it.
struct SubstitutedSentence {
  TokenSequence tokens;
  TokenSpan candidate;
  std::size_t suffix_start = 0;
};

bool IsPossessivePronoun(std::span<const std::string> pronoun);

// Throws kInvalidArgument for a bad index and kSchemaError for an empty
// candidate.
SubstitutedSentence Substitute(const SchemaQuestion &q,
                               std::size_t candidate_index);

// Sums of per-position log-probabilities; `logprobs[i]` belongs to token
// position i + 1.
double FullFromLogProbs(std::span<const double> logprobs);
// Positions >= suffix_start. Throws kEmptySuffix when no word follows the
// candidate.
double PartialFromLogProbs(std::span<const double> logprobs,
                           const SubstitutedSentence &sub);
// Positions before suffix_start: log P(w_1 .. c).
double PrefixFromLogProbs(std::span<const double> logprobs,
                          const SubstitutedSentence &sub);
bool HasSuffix(const SubstitutedSentence &sub);

// log Count(c): sum of log unigram counts over the candidate tokens, zero
// counts read as one.
double LogCount(const UnigramCounter &counts,
                std::span<const std::string> candidate);

// Forward scorers only (kConfigError otherwise).
double ScoreFull(const Scorer &scorer, const SubstitutedSentence &sub);
double ScorePartial(const Scorer &scorer, const SubstitutedSentence &sub);
double ScoreFullNormalized(const Scorer &scorer, const UnigramCounter &counts,
                           const SubstitutedSentence &sub,
                           std::span<const std::string> candidate);

// Everything the ensemble decision needs about one candidate; per-scorer
// vectors are indexed like the scorer list.
struct CandidateScores {
  SubstitutedSentence sub;
  std::vector<std::vector<double>> logprobs;
  std::vector<double> full;
  // Empty when the candidate ends the sentence.
  std::vector<double> partial;
  std::vector<double> normalized;
  bool has_suffix = true;
  bool has_counts = false;
  double log_count = 0.0;

  const std::vector<double> &ForMode(ScoreMode mode) const;
};

struct ScoreReport {
  ScoreMode mode = ScoreMode::kPartial;
  // Differs from `mode` when partial scoring fell back to full.
  ScoreMode effective_mode = ScoreMode::kPartial;
  Combine combine = Combine::kMeanLogScore;
  std::vector<CandidateScores> candidates;
  // Ensemble score per candidate (mean log-score, or vote count).
  std::vector<double> combined;
  std::size_t decision = 0;
  bool tie = false;
};

// argmax with ties (within kTieTolerance) going to the lowest index.
std::pair<std::size_t, bool> ArgMax(std::span<const double> scores);

// Scores every candidate with every scorer. `counts` may be null when
// full-normalized scoring is not needed.
std::vector<CandidateScores> ScoreCandidates(
    std::span<const Scorer *const> scorers, const SchemaQuestion &q,
    const UnigramCounter *counts);

ScoreReport Decide(std::vector<CandidateScores> candidates, ScoreMode mode,
                   Combine combine);
// Decision of one ensemble member alone.
std::pair<std::size_t, bool> DecideSingle(
    const std::vector<CandidateScores> &candidates, std::size_t scorer,
    ScoreMode mode);

struct ResolveOptions {
  ScoreMode mode = ScoreMode::kPartial;
  Combine combine = Combine::kMeanLogScore;
  const UnigramCounter *counts = nullptr;
};

ScoreReport Resolve(std::span<const Scorer *const> scorers,
                    const SchemaQuestion &q, const ResolveOptions &options);

}  // namespace lmcr

#endif  // LMCR_RESOLVER_H_
