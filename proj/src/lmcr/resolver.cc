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

#include "lmcr/resolver.h"

#include <algorithm>
#include <cmath>

#include "lmcr/status.h"

namespace lmcr {
namespace {

void RequireForward(const Scorer &scorer) {
  if (scorer.direction() != Direction::kForward) {
    Fail(ErrorCode::kConfigError,
         "scorer '" + scorer.name() + "' is not a forward model");
  }
}

void CheckLength(std::span<const double> logprobs,
                 const SubstitutedSentence &sub) {
  if (logprobs.size() + 1 != sub.tokens.size()) {
    Fail(ErrorCode::kProtocolError, "log-probability count does not match tokens");
  }
}

}  // namespace

std::string_view ScoreModeName(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::kFull: return "full";
    case ScoreMode::kPartial: return "partial";
    case ScoreMode::kFullNormalized: return "full_normalized";
  }
  return "?";
}

ScoreMode ParseScoreMode(std::string_view name) {
  if (name == "full") return ScoreMode::kFull;
  if (name == "partial") return ScoreMode::kPartial;
  if (name == "full_normalized" || name == "normalized") {
    return ScoreMode::kFullNormalized;
  }
  Fail(ErrorCode::kConfigError, "unknown scoring mode '" + std::string(name) + "'");
}

std::string_view CombineName(Combine combine) {
  return combine == Combine::kMeanLogScore ? "mean_logscore" : "majority_vote";
}

Combine ParseCombine(std::string_view name) {
  if (name == "mean_logscore" || name == "mean") return Combine::kMeanLogScore;
  if (name == "majority_vote" || name == "vote") return Combine::kMajorityVote;
  Fail(ErrorCode::kConfigError, "unknown combine rule '" + std::string(name) + "'");
}

bool IsPossessivePronoun(std::span<const std::string> pronoun) {
  if (pronoun.size() != 1) return false;
  static constexpr std::string_view kPossessive[] = {"its", "his", "their",
                                                     "hers", "theirs"};
  std::string lower = pronoun[0];
  for (char &c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return std::find(std::begin(kPossessive), std::end(kPossessive), lower) !=
         std::end(kPossessive);
}

SubstitutedSentence Substitute(const SchemaQuestion &q,
                               std::size_t candidate_index) {
  if (candidate_index >= q.candidates.size()) {
    Fail(ErrorCode::kInvalidArgument, "candidate index out of range");
  }
  const auto &candidate = q.candidates[candidate_index];
  if (candidate.empty()) {
    Fail(ErrorCode::kSchemaError, "question '" + q.id + "': empty candidate");
  }
  const auto &tokens = q.tokens.tokens();
  std::span<const std::string> pronoun(tokens.begin() + q.pronoun.start,
                                       tokens.begin() + q.pronoun.end);
  bool identical = std::equal(candidate.begin(), candidate.end(),
                              pronoun.begin(), pronoun.end());
  bool clitic = !identical && IsPossessivePronoun(pronoun);

  std::vector<std::string> out(tokens.begin() + 1,
                               tokens.begin() + q.pronoun.start);
  std::size_t start = out.size() + 1;
  out.insert(out.end(), candidate.begin(), candidate.end());
  if (clitic) out.emplace_back(kPossessiveClitic);
  std::size_t end = out.size() + 1;
  out.insert(out.end(), tokens.begin() + q.pronoun.end, tokens.end() - 1);

  SubstitutedSentence sub;
  sub.tokens = TokenSequence::FromInterior(std::move(out));
  sub.candidate = {start, end};
  sub.suffix_start = end;
  return sub;
}

double FullFromLogProbs(std::span<const double> logprobs) {
  double sum = 0.0;
  for (double v : logprobs) sum += v;
  return sum;
}

bool HasSuffix(const SubstitutedSentence &sub) {
  return sub.suffix_start + 1 < sub.tokens.size();
}

double PartialFromLogProbs(std::span<const double> logprobs,
                           const SubstitutedSentence &sub) {
  CheckLength(logprobs, sub);
  if (!HasSuffix(sub)) {
    Fail(ErrorCode::kEmptySuffix, "no words follow the candidate");
  }
  double sum = 0.0;
  for (std::size_t i = sub.suffix_start - 1; i < logprobs.size(); ++i) {
    sum += logprobs[i];
  }
  return sum;
}

double PrefixFromLogProbs(std::span<const double> logprobs,
                          const SubstitutedSentence &sub) {
  CheckLength(logprobs, sub);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < sub.suffix_start; ++i) sum += logprobs[i];
  return sum;
}

double LogCount(const UnigramCounter &counts,
                std::span<const std::string> candidate) {
  double sum = 0.0;
  for (const auto &token : candidate) {
    uint64_t c = counts.UnigramCount(token);
    sum += std::log(static_cast<double>(std::max<uint64_t>(c, 1)));
  }
  return sum;
}

double ScoreFull(const Scorer &scorer, const SubstitutedSentence &sub) {
  RequireForward(scorer);
  auto lp = scorer.CondLogProbs(sub.tokens);
  CheckLength(lp, sub);
  return FullFromLogProbs(lp);
}

double ScorePartial(const Scorer &scorer, const SubstitutedSentence &sub) {
  RequireForward(scorer);
  if (!HasSuffix(sub)) {
    Fail(ErrorCode::kEmptySuffix, "no words follow the candidate");
  }
  return PartialFromLogProbs(scorer.CondLogProbs(sub.tokens), sub);
}

double ScoreFullNormalized(const Scorer &scorer, const UnigramCounter &counts,
                           const SubstitutedSentence &sub,
                           std::span<const std::string> candidate) {
  return ScoreFull(scorer, sub) - LogCount(counts, candidate);
}

const std::vector<double> &CandidateScores::ForMode(ScoreMode mode) const {
  switch (mode) {
    case ScoreMode::kFull: return full;
    case ScoreMode::kPartial:
      if (!has_suffix) Fail(ErrorCode::kEmptySuffix, "no words follow the candidate");
      return partial;
    case ScoreMode::kFullNormalized:
      if (!has_counts) {
        Fail(ErrorCode::kConfigError, "full_normalized scoring needs unigram counts");
      }
      return normalized;
  }
  return full;
}

std::pair<std::size_t, bool> ArgMax(std::span<const double> scores) {
  if (scores.empty()) Fail(ErrorCode::kInvalidArgument, "no scores");
  double best = *std::max_element(scores.begin(), scores.end());
  std::size_t decision = scores.size();
  std::size_t tied = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (best - scores[i] <= kTieTolerance) {
      if (decision == scores.size()) decision = i;
      ++tied;
    }
  }
  return {decision, tied > 1};
}

std::vector<CandidateScores> ScoreCandidates(
    std::span<const Scorer *const> scorers, const SchemaQuestion &q,
    const UnigramCounter *counts) {
  if (scorers.empty()) Fail(ErrorCode::kConfigError, "no scorers configured");
  for (const Scorer *s : scorers) RequireForward(*s);

  std::vector<CandidateScores> out(q.candidates.size());
  std::vector<TokenSequence> batch;
  for (std::size_t c = 0; c < q.candidates.size(); ++c) {
    out[c].sub = Substitute(q, c);
    out[c].has_suffix = HasSuffix(out[c].sub);
    if (counts != nullptr) {
      out[c].has_counts = true;
      out[c].log_count = LogCount(*counts, q.candidates[c]);
    }
    batch.push_back(out[c].sub.tokens);
  }
  for (const Scorer *s : scorers) {
    auto results = s->CondLogProbsBatch(batch);
    if (results.size() != batch.size()) {
      Fail(ErrorCode::kProtocolError, "scorer returned wrong batch size");
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
      auto &cand = out[c];
      CheckLength(results[c], cand.sub);
      double full = FullFromLogProbs(results[c]);
      cand.full.push_back(full);
      if (cand.has_suffix) {
        cand.partial.push_back(PartialFromLogProbs(results[c], cand.sub));
      }
      if (cand.has_counts) cand.normalized.push_back(full - cand.log_count);
      cand.logprobs.push_back(std::move(results[c]));
    }
  }
  return out;
}

std::pair<std::size_t, bool> DecideSingle(
    const std::vector<CandidateScores> &candidates, std::size_t scorer,
    ScoreMode mode) {
  bool all_suffix = std::all_of(candidates.begin(), candidates.end(),
                                [](const auto &c) { return c.has_suffix; });
  if (mode == ScoreMode::kPartial && !all_suffix) mode = ScoreMode::kFull;
  std::vector<double> scores;
  for (const auto &c : candidates) scores.push_back(c.ForMode(mode).at(scorer));
  return ArgMax(scores);
}

ScoreReport Decide(std::vector<CandidateScores> candidates, ScoreMode mode,
                   Combine combine) {
  ScoreReport report;
  report.mode = mode;
  report.combine = combine;
  bool all_suffix = std::all_of(candidates.begin(), candidates.end(),
                                [](const auto &c) { return c.has_suffix; });
  report.effective_mode =
      mode == ScoreMode::kPartial && !all_suffix ? ScoreMode::kFull : mode;
  const std::size_t num_scorers = candidates.empty() ? 0 : candidates[0].full.size();

  if (combine == Combine::kMeanLogScore) {
    for (const auto &c : candidates) {
      const auto &scores = c.ForMode(report.effective_mode);
      double sum = 0.0;
      for (double s : scores) sum += s;
      report.combined.push_back(sum / static_cast<double>(scores.size()));
    }
  } else {
    report.combined.assign(candidates.size(), 0.0);
    for (std::size_t s = 0; s < num_scorers; ++s) {
      report.combined[DecideSingle(candidates, s, report.effective_mode).first] += 1.0;
    }
  }
  std::tie(report.decision, report.tie) = ArgMax(report.combined);
  report.candidates = std::move(candidates);
  return report;
}

ScoreReport Resolve(std::span<const Scorer *const> scorers,
                    const SchemaQuestion &q, const ResolveOptions &options) {
  if (options.mode == ScoreMode::kFullNormalized && options.counts == nullptr) {
    Fail(ErrorCode::kConfigError, "full_normalized scoring needs unigram counts");
  }
  return Decide(ScoreCandidates(scorers, q, options.counts), options.mode,
                options.combine);
}

}  // namespace lmcr
