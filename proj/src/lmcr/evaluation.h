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

#ifndef LMCR_EVALUATION_H_
#define LMCR_EVALUATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmcr/analysis.h"
#include "lmcr/dataset.h"
#include "lmcr/resolver.h"
#include "lmcr/scorer.h"

namespace lmcr {

struct EvalOptions {
  std::vector<ScoreMode> modes = {ScoreMode::kFull, ScoreMode::kFullNormalized,
                                  ScoreMode::kPartial};
  Combine combine = Combine::kMeanLogScore;
  // Required when full-normalized is among the modes.
  const UnigramCounter *counts = nullptr;
  int threads = 1;
};

// Outcome of one question under one scoring mode.
struct ModeOutcome {
  ScoreMode mode = ScoreMode::kPartial;
  ScoreMode effective_mode = ScoreMode::kPartial;
  std::size_t decision = 0;
  bool tie = false;
  std::vector<double> scores;
  std::optional<bool> correct;
  // Decision of each ensemble member alone.
  std::vector<std::size_t> member_decisions;
};

struct QuestionRecord {
  std::string id;
  std::optional<std::size_t> gold;
  // Same order as EvalReport::modes.
  std::vector<ModeOutcome> outcomes;
  // Wrong under full and right under partial; set when both modes ran and
  // the gold answer is known.
  std::optional<bool> corrected;
};

struct ModeSummary {
  ScoreMode mode = ScoreMode::kPartial;
  std::size_t correct = 0;
  // Questions with a gold answer.
  std::size_t total = 0;
  std::optional<double> accuracy;
  // Correct answers of each ensemble member alone.
  std::vector<std::size_t> member_correct;
};

struct CorrectionSummary {
  std::size_t wrong_full = 0;
  std::size_t corrected = 0;
  std::optional<double> percentage;
};

struct EvalReport {
  std::string set_name;
  std::vector<std::string> ensemble;
  Combine combine = Combine::kMeanLogScore;
  std::vector<ScoreMode> modes;
  // Sorted by question id.
  std::vector<QuestionRecord> records;
  std::vector<ModeSummary> summaries;
  std::optional<CorrectionSummary> correction;
};

// Throws kEmptyDataset, kDuplicateId, and kConfigError when full-normalized
// scoring is requested without counts.
EvalReport Evaluate(const QuestionSet &set, std::span<const Scorer *const> scorers,
                    const EvalOptions &options);

// Human-readable summary: accuracies at four decimals, member counts per
// mode and the full-to-partial correction breakdown.
std::string RenderEvalTable(const EvalReport &report);
// Machine output; accuracies omitted when no gold answer is known.
std::string EvalJson(const EvalReport &report);
std::string EvalTsv(const EvalReport &report);

struct AnalyzeOptions {
  ScoreMode mode = ScoreMode::kPartial;
  std::size_t top_k = 2;
  int threads = 1;
};

struct AnalysisRecord {
  std::string id;
  RatioProfile profile;
  QDecision decision;
  std::optional<bool> correct;
  KeywordReport keywords;
  Heatmap heatmap;
};

// Keyword retrieval over questions with an annotated special word and a
// gold answer. `retrieved` counts hits among the correctly answered ones.
struct KeywordTally {
  std::string mode;
  std::size_t annotated = 0;
  std::size_t answered = 0;
  std::size_t retrieved = 0;
  std::optional<double> accuracy;
};

struct AnalysisReport {
  std::string set_name;
  std::string scorer;
  Direction direction = Direction::kForward;
  ScoreMode mode = ScoreMode::kPartial;
  std::size_t top_k = 2;
  std::vector<AnalysisRecord> records;
  KeywordTally tally;
};

// Ratio analysis of the gold candidate against the first other candidate
// (candidates 0 and 1 without gold). Partial mode falls back to full for
// questions whose candidate ends the sentence.
AnalysisReport Analyze(const QuestionSet &set, const Scorer &scorer,
                       const AnalyzeOptions &options);

// Header plus one row when annotated questions exist.
std::string KeywordTallyTsv(const AnalysisReport &report);
// id, position, token, kind, log_ratio per scored position.
std::string RatioTsv(const AnalysisReport &report);
std::string RenderAnalysisText(const AnalysisReport &report);
std::string RenderAnalysisHtml(const AnalysisReport &report);

}  // namespace lmcr

#endif  // LMCR_EVALUATION_H_
