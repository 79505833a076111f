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

#include "lmcr/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "lmcr/status.h"

namespace lmcr {
namespace {

SubstitutedSentence ReverseSubstitution(const SubstitutedSentence &s) {
  const std::size_t n = s.tokens.size();
  SubstitutedSentence out;
  out.tokens = Reverse(s.tokens);
  out.candidate = {n - s.candidate.end, n - s.candidate.start};
  out.suffix_start = out.candidate.end;
  return out;
}

// Maps a position of the forward correct substitution to the original
// question index.
std::size_t ForwardToOriginal(const SchemaQuestion &q,
                              const SubstitutedSentence &a, std::size_t pos) {
  if (pos < a.candidate.start) return pos;
  if (pos < a.candidate.end) return q.pronoun.start;
  return q.pronoun.end + (pos - a.candidate.end);
}

std::string JoinRange(const TokenSequence &tokens, TokenSpan span) {
  std::string out;
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Builds the profile from two substitutions in scoring orientation.
// `to_original` maps positions of `a` to original question indices.
RatioProfile BuildProfile(const SchemaQuestion &q, const SubstitutedSentence &a,
                          const std::vector<double> &lp_a,
                          const SubstitutedSentence &b,
                          const std::vector<double> &lp_b, ScoreMode mode,
                          const std::function<std::size_t(std::size_t)> &to_original) {
  if (mode != ScoreMode::kFull && mode != ScoreMode::kPartial) {
    Fail(ErrorCode::kConfigError, "ratio profiles support full and partial modes");
  }
  if (lp_a.size() + 1 != a.tokens.size() || lp_b.size() + 1 != b.tokens.size()) {
    Fail(ErrorCode::kProtocolError, "log-probability count does not match tokens");
  }
  if (mode == ScoreMode::kPartial && (!HasSuffix(a) || !HasSuffix(b))) {
    Fail(ErrorCode::kEmptySuffix, "no words follow the candidate");
  }
  RatioProfile p;
  p.question_id = q.id;
  p.mode = mode;
  auto add = [&](std::size_t pos_a, PositionKind kind, double log_ratio) {
    std::size_t original = to_original(pos_a);
    std::string token = kind == PositionKind::kCandidate
                            ? JoinRange(a.tokens, a.candidate) + "|" +
                                  JoinRange(b.tokens, b.candidate)
                            : a.tokens[pos_a];
    p.positions.push_back({original, std::move(token), log_ratio, kind});
  };

  if (mode == ScoreMode::kFull) {
    for (std::size_t pos = 1; pos < a.candidate.start; ++pos) {
      add(pos, PositionKind::kPrefix, lp_a[pos - 1] - lp_b[pos - 1]);
    }
    if (a.candidate.length() == b.candidate.length()) {
      for (std::size_t k = 0; k < a.candidate.length(); ++k) {
        add(a.candidate.start + k, PositionKind::kCandidate,
            lp_a[a.candidate.start + k - 1] - lp_b[b.candidate.start + k - 1]);
      }
    } else {
      double sum_a = 0.0, sum_b = 0.0;
      for (std::size_t i = a.candidate.start; i < a.candidate.end; ++i) sum_a += lp_a[i - 1];
      for (std::size_t i = b.candidate.start; i < b.candidate.end; ++i) sum_b += lp_b[i - 1];
      add(a.candidate.start, PositionKind::kCandidate, sum_a - sum_b);
    }
  }
  const std::size_t suffix_len = a.tokens.size() - a.suffix_start;
  for (std::size_t j = 0; j < suffix_len; ++j) {
    add(a.suffix_start + j, PositionKind::kSuffix,
        lp_a[a.suffix_start + j - 1] - lp_b[b.suffix_start + j - 1]);
  }
  std::stable_sort(p.positions.begin(), p.positions.end(),
                   [](const auto &x, const auto &y) { return x.position < y.position; });

  p.range_lo = mode == ScoreMode::kFull ? 1 : a.suffix_start;
  p.range_hi = a.tokens.size() - 1;
  for (const auto &r : p.positions) p.log_q += r.log_ratio;
  p.score_difference =
      mode == ScoreMode::kFull
          ? FullFromLogProbs(lp_a) - FullFromLogProbs(lp_b)
          : PartialFromLogProbs(lp_a, a) - PartialFromLogProbs(lp_b, b);
  return p;
}

void CheckPair(const SchemaQuestion &q, std::pair<std::size_t, std::size_t> pair) {
  if (pair.first == pair.second || pair.first >= q.candidates.size() ||
      pair.second >= q.candidates.size()) {
    Fail(ErrorCode::kInvalidArgument, "invalid candidate pair");
  }
}

std::string Rgb(int sign, double intensity) {
  // Green for positions favouring the correct candidate, red otherwise.
  int fade = static_cast<int>(std::lround(255.0 * (1.0 - intensity)));
  int r = sign < 0 ? 255 : fade;
  int g = sign < 0 ? fade : 255;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d;%d;%d", r, g, fade);
  return buf;
}

}  // namespace

RatioProfile PositionRatios(const Scorer &scorer, const SchemaQuestion &q,
                            std::pair<std::size_t, std::size_t> pair,
                            ScoreMode mode) {
  CheckPair(q, pair);
  if (scorer.direction() != Direction::kForward) {
    Fail(ErrorCode::kConfigError, "forward ratios need a forward scorer");
  }
  SubstitutedSentence a = Substitute(q, pair.first);
  SubstitutedSentence b = Substitute(q, pair.second);
  std::vector<TokenSequence> batch{a.tokens, b.tokens};
  auto lp = scorer.CondLogProbsBatch(batch);
  RatioProfile p = BuildProfile(q, a, lp.at(0), b, lp.at(1), mode,
                                [&](std::size_t pos) { return ForwardToOriginal(q, a, pos); });
  p.direction = Direction::kForward;
  p.correct = pair.first;
  p.incorrect = pair.second;
  return p;
}

RatioProfile BackwardRatios(const Scorer &scorer, const SchemaQuestion &q,
                            std::pair<std::size_t, std::size_t> pair,
                            ScoreMode mode) {
  CheckPair(q, pair);
  if (scorer.direction() != Direction::kBackward) {
    Fail(ErrorCode::kConfigError, "backward ratios need a backward scorer");
  }
  SubstitutedSentence fa = Substitute(q, pair.first);
  SubstitutedSentence fb = Substitute(q, pair.second);
  SubstitutedSentence a = ReverseSubstitution(fa);
  SubstitutedSentence b = ReverseSubstitution(fb);
  std::vector<TokenSequence> batch{a.tokens, b.tokens};
  auto lp = scorer.CondLogProbsBatch(batch);
  const std::size_t n = a.tokens.size();
  RatioProfile p = BuildProfile(
      q, a, lp.at(0), b, lp.at(1), mode, [&](std::size_t pos) {
        return pos + 1 == n ? std::size_t{0} : ForwardToOriginal(q, fa, n - 1 - pos);
      });
  // The final reversed marker stands for the sentence start.
  for (auto &r : p.positions) {
    if (r.position == 0) r.token = std::string(kBos);
  }
  p.direction = Direction::kBackward;
  p.correct = pair.first;
  p.incorrect = pair.second;
  return p;
}

QDecision DecideByQ(const RatioProfile &profile) {
  if (std::fabs(profile.log_q) <= kTieTolerance) {
    return {std::min(profile.correct, profile.incorrect), true};
  }
  return {profile.log_q > 0 ? profile.correct : profile.incorrect, false};
}

KeywordReport DetectKeywords(const RatioProfile &profile, std::size_t top_k,
                             std::optional<std::size_t> special_word) {
  if (top_k < 1) Fail(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  std::vector<PositionRatio> ranked = profile.positions;
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto &x, const auto &y) {
    return x.log_ratio > y.log_ratio;
  });
  KeywordReport report;
  report.top_k = top_k;
  report.truncated = ranked.size() < top_k;
  std::size_t keep = std::min(top_k, ranked.size());
  if (ranked.size() > keep && keep > 0) {
    report.tie = std::fabs(ranked[keep - 1].log_ratio - ranked[keep].log_ratio) <=
                 kTieTolerance;
  }
  report.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
  report.annotated = special_word.has_value();
  if (special_word) {
    report.hit = std::any_of(report.top.begin(), report.top.end(),
                             [&](const auto &r) { return r.position == *special_word; });
  }
  return report;
}

std::string HtmlEscape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

Heatmap RenderHeatmap(const RatioProfile &profile, const SchemaQuestion &q) {
  std::map<std::size_t, double> slots;
  for (const auto &r : profile.positions) slots[r.position] += r.log_ratio;
  double max_abs = 0.0;
  for (const auto &[pos, v] : slots) max_abs = std::max(max_abs, std::fabs(v));

  Heatmap h;
  char title[64];
  h.html = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" +
           HtmlEscape(profile.question_id) +
           "</title></head><body>\n<p class=\"meta\">" +
           HtmlEscape(profile.question_id) + " &middot; " +
           std::string(ScoreModeName(profile.mode)) + " &middot; " +
           std::string(DirectionName(profile.direction)) + "</p>\n<p>";
  const std::size_t n = q.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > q.pronoun.start && i < q.pronoun.end) continue;
    bool marker = i == 0 || i + 1 == n;
    auto slot = slots.find(i);
    if (marker && slot == slots.end()) continue;
    double value = slot == slots.end() ? 0.0 : slot->second;
    double intensity = max_abs > 0.0 ? std::fabs(value) / max_abs : 0.0;
    int sign = value > 0 ? 1 : (value < 0 ? -1 : 0);

    std::string label;
    if (i == q.pronoun.start) {
      std::string pronoun = JoinRange(q.tokens, q.pronoun);
      label = pronoun + " (" + q.candidate_texts[profile.correct] + "* / " +
              q.candidate_texts[profile.incorrect] + ")";
    } else {
      label = q.tokens[i];
    }
    if (q.special_word && *q.special_word == i) label = "[" + label + "]";

    h.positions.push_back(i);
    h.intensity.push_back(intensity);
    h.sign.push_back(sign);

    if (!h.ansi.empty()) h.ansi.push_back(' ');
    h.ansi += "\x1b[30;48;2;" + Rgb(sign, intensity) + "m" + label + "\x1b[0m";

    std::snprintf(title, sizeof(title), "log q = %.6g", value);
    char style[96];
    std::snprintf(style, sizeof(style), "background-color: rgba(%d,%d,0,%.4f)",
                  sign < 0 ? 200 : 0, sign < 0 ? 0 : 160, intensity);
    h.html += "<span class=\"tok\" style=\"" + std::string(style) + "\" title=\"" +
              title + "\">" + HtmlEscape(label) + "</span> ";
  }
  h.html += "</p>\n</body></html>\n";
  return h;
}

}  // namespace lmcr
