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

#include "lmcr/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <thread>

#include "json.hpp"
#include "lmcr/status.h"

namespace lmcr {
namespace {

using nlohmann::ordered_json;

std::string Fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn fn) {
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1,
                              std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Record>
void SortById(std::vector<Record> *records) {
  std::stable_sort(records->begin(), records->end(),
                   [](const Record &a, const Record &b) { return a.id < b.id; });
}

std::optional<double> Ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::pair<std::size_t, std::size_t> AnalysisPair(const SchemaQuestion &q) {
  std::size_t correct = q.gold.value_or(0);
  std::size_t incorrect = correct == 0 ? 1 : 0;
  return {correct, incorrect};
}

std::string_view KindName(PositionKind kind) {
  switch (kind) {
    case PositionKind::kPrefix: return "prefix";
    case PositionKind::kCandidate: return "candidate";
    case PositionKind::kSuffix: return "suffix";
  }
  return "suffix";
}

std::string HeatmapBody(const std::string &html) {
  auto begin = html.find("<body>");
  auto end = html.rfind("</body>");
  if (begin == std::string::npos || end == std::string::npos) return html;
  begin += 6;
  return html.substr(begin, end - begin);
}

}  // namespace

EvalReport Evaluate(const QuestionSet &set, std::span<const Scorer *const> scorers,
                    const EvalOptions &options) {
  CheckQuestionSet(set);
  if (scorers.empty()) Fail(ErrorCode::kConfigError, "no scorers configured");
  if (options.modes.empty()) Fail(ErrorCode::kConfigError, "no scoring modes");
  const bool wants_counts =
      std::count(options.modes.begin(), options.modes.end(),
                 ScoreMode::kFullNormalized) > 0;
  if (wants_counts && options.counts == nullptr) {
    Fail(ErrorCode::kConfigError, "full_normalized scoring needs unigram counts");
  }

  EvalReport report;
  report.set_name = set.name;
  report.combine = options.combine;
  report.modes = options.modes;
  for (const Scorer *s : scorers) report.ensemble.push_back(s->name());

  report.records.resize(set.questions.size());
  ParallelFor(set.questions.size(), options.threads, [&](std::size_t i) {
    const SchemaQuestion &q = set.questions[i];
    auto candidates =
        ScoreCandidates(scorers, q, wants_counts ? options.counts : nullptr);
    QuestionRecord &rec = report.records[i];
    rec.id = q.id;
    rec.gold = q.gold;
    for (ScoreMode mode : options.modes) {
      ScoreReport decided = Decide(candidates, mode, options.combine);
      ModeOutcome out;
      out.mode = mode;
      out.effective_mode = decided.effective_mode;
      out.decision = decided.decision;
      out.tie = decided.tie;
      out.scores = decided.combined;
      if (q.gold) out.correct = out.decision == *q.gold;
      for (std::size_t s = 0; s < scorers.size(); ++s) {
        out.member_decisions.push_back(DecideSingle(candidates, s, mode).first);
      }
      rec.outcomes.push_back(std::move(out));
    }
  });
  SortById(&report.records);

  for (std::size_t m = 0; m < report.modes.size(); ++m) {
    ModeSummary summary;
    summary.mode = report.modes[m];
    summary.member_correct.assign(scorers.size(), 0);
    for (const auto &rec : report.records) {
      if (!rec.gold) continue;
      ++summary.total;
      const ModeOutcome &out = rec.outcomes[m];
      if (*out.correct) ++summary.correct;
      for (std::size_t s = 0; s < scorers.size(); ++s) {
        if (out.member_decisions[s] == *rec.gold) ++summary.member_correct[s];
      }
    }
    summary.accuracy = Ratio(summary.correct, summary.total);
    report.summaries.push_back(std::move(summary));
  }

  auto full = std::find(report.modes.begin(), report.modes.end(), ScoreMode::kFull);
  auto partial =
      std::find(report.modes.begin(), report.modes.end(), ScoreMode::kPartial);
  if (full != report.modes.end() && partial != report.modes.end()) {
    const auto fi = static_cast<std::size_t>(full - report.modes.begin());
    const auto pi = static_cast<std::size_t>(partial - report.modes.begin());
    CorrectionSummary correction;
    for (auto &rec : report.records) {
      if (!rec.gold) continue;
      bool wrong_full = !*rec.outcomes[fi].correct;
      rec.corrected = wrong_full && *rec.outcomes[pi].correct;
      if (wrong_full) ++correction.wrong_full;
      if (*rec.corrected) ++correction.corrected;
    }
    correction.percentage = Ratio(correction.corrected, correction.wrong_full);
    report.correction = correction;
  }
  return report;
}

std::string RenderEvalTable(const EvalReport &report) {
  std::string out = "question set: " + report.set_name + "\n";
  out += "ensemble (" + std::string(CombineName(report.combine)) + "):";
  for (const auto &name : report.ensemble) out += " " + name;
  out += "\n\n";

  out += Pad("mode", 18) + Pad("correct", 10) + Pad("total", 8) + "accuracy\n";
  for (const auto &s : report.summaries) {
    out += Pad(std::string(ScoreModeName(s.mode)), 18) +
           Pad(std::to_string(s.correct), 10) + Pad(std::to_string(s.total), 8) +
           (s.accuracy ? Fixed4(*s.accuracy) : std::string("-")) + "\n";
  }

  if (report.ensemble.size() > 1) {
    out += "\ncorrect answers per model\n" + Pad("model", 40);
    for (const auto &s : report.summaries) {
      out += Pad(std::string(ScoreModeName(s.mode)), 18);
    }
    out += "\n";
    for (std::size_t m = 0; m < report.ensemble.size(); ++m) {
      out += Pad(report.ensemble[m], 40);
      for (const auto &s : report.summaries) {
        out += Pad(std::to_string(s.member_correct[m]), 18);
      }
      out += "\n";
    }
  }

  if (report.correction) {
    const auto &c = *report.correction;
    out += "\n" + Pad("wrong under full", 20) + Pad("corrected", 12) +
           "correction percentage\n";
    out += Pad(std::to_string(c.wrong_full), 20) + Pad(std::to_string(c.corrected), 12) +
           (c.percentage ? Fixed4(*c.percentage * 100.0) + "%" : std::string("-")) +
           "\n";
  }

  out += "\n" + Pad("id", 24);
  for (ScoreMode mode : report.modes) out += Pad(std::string(ScoreModeName(mode)), 18);
  out += "gold\n";
  for (const auto &rec : report.records) {
    out += Pad(rec.id, 24);
    for (const auto &o : rec.outcomes) {
      std::string cell = std::to_string(o.decision);
      if (o.tie) cell += " (tie)";
      if (o.correct) cell += *o.correct ? " ok" : " x";
      out += Pad(cell, 18);
    }
    out += (rec.gold ? std::to_string(*rec.gold) : std::string("-")) + "\n";
  }
  return out;
}

std::string EvalJson(const EvalReport &report) {
  ordered_json j;
  j["question_set"] = report.set_name;
  j["ensemble"] = report.ensemble;
  j["combine"] = std::string(CombineName(report.combine));
  ordered_json summaries = ordered_json::array();
  for (const auto &s : report.summaries) {
    ordered_json e;
    e["mode"] = std::string(ScoreModeName(s.mode));
    e["correct"] = s.correct;
    e["total"] = s.total;
    if (s.accuracy) e["accuracy"] = *s.accuracy;
    e["member_correct"] = s.member_correct;
    summaries.push_back(std::move(e));
  }
  j["summaries"] = std::move(summaries);
  if (report.correction) {
    ordered_json c;
    c["wrong_full"] = report.correction->wrong_full;
    c["corrected"] = report.correction->corrected;
    if (report.correction->percentage) c["percentage"] = *report.correction->percentage;
    j["correction"] = std::move(c);
  }
  ordered_json records = ordered_json::array();
  for (const auto &rec : report.records) {
    ordered_json r;
    r["id"] = rec.id;
    r["gold"] = rec.gold ? ordered_json(*rec.gold) : ordered_json(nullptr);
    ordered_json outcomes = ordered_json::array();
    for (const auto &o : rec.outcomes) {
      ordered_json e;
      e["mode"] = std::string(ScoreModeName(o.mode));
      e["effective_mode"] = std::string(ScoreModeName(o.effective_mode));
      e["decision"] = o.decision;
      e["tie"] = o.tie;
      e["scores"] = o.scores;
      if (o.correct) e["correct"] = *o.correct;
      e["member_decisions"] = o.member_decisions;
      outcomes.push_back(std::move(e));
    }
    r["outcomes"] = std::move(outcomes);
    if (rec.corrected) r["corrected"] = *rec.corrected;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j.dump(2) + "\n";
}

std::string EvalTsv(const EvalReport &report) {
  std::string out = "id\tmode\teffective_mode\tdecision\ttie\tgold\tcorrect\tcorrected";
  const std::size_t max_candidates = [&] {
    std::size_t m = 0;
    for (const auto &rec : report.records) {
      for (const auto &o : rec.outcomes) m = std::max(m, o.scores.size());
    }
    return m;
  }();
  for (std::size_t c = 0; c < max_candidates; ++c) out += "\tscore_" + std::to_string(c);
  out += "\n";
  for (const auto &rec : report.records) {
    for (const auto &o : rec.outcomes) {
      out += rec.id + "\t" + std::string(ScoreModeName(o.mode)) + "\t" +
             std::string(ScoreModeName(o.effective_mode)) + "\t" +
             std::to_string(o.decision) + "\t" + (o.tie ? "1" : "0") + "\t" +
             (rec.gold ? std::to_string(*rec.gold) : "") + "\t" +
             (o.correct ? (*o.correct ? "1" : "0") : "") + "\t" +
             (rec.corrected ? (*rec.corrected ? "1" : "0") : "");
      for (std::size_t c = 0; c < max_candidates; ++c) {
        out += "\t" + (c < o.scores.size() ? Full(o.scores[c]) : std::string());
      }
      out += "\n";
    }
  }
  out += "#summary\tmode\tcorrect\ttotal\taccuracy\n";
  for (const auto &s : report.summaries) {
    out += "#summary\t" + std::string(ScoreModeName(s.mode)) + "\t" +
           std::to_string(s.correct) + "\t" + std::to_string(s.total) + "\t" +
           (s.accuracy ? Full(*s.accuracy) : "") + "\n";
  }
  return out;
}

AnalysisReport Analyze(const QuestionSet &set, const Scorer &scorer,
                       const AnalyzeOptions &options) {
  CheckQuestionSet(set);
  if (options.mode == ScoreMode::kFullNormalized) {
    Fail(ErrorCode::kConfigError, "ratio analysis supports full and partial modes");
  }
  if (options.top_k == 0) Fail(ErrorCode::kConfigError, "top-k must be positive");

  AnalysisReport report;
  report.set_name = set.name;
  report.scorer = scorer.name();
  report.direction = scorer.direction();
  report.mode = options.mode;
  report.top_k = options.top_k;
  report.records.resize(set.questions.size());

  const bool backward = scorer.direction() == Direction::kBackward;
  ParallelFor(set.questions.size(), options.threads, [&](std::size_t i) {
    const SchemaQuestion &q = set.questions[i];
    auto pair = AnalysisPair(q);
    auto run = [&](ScoreMode mode) {
      return backward ? BackwardRatios(scorer, q, pair, mode)
                      : PositionRatios(scorer, q, pair, mode);
    };
    AnalysisRecord &rec = report.records[i];
    rec.id = q.id;
    try {
      rec.profile = run(options.mode);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kEmptySuffix) throw;
      rec.profile = run(ScoreMode::kFull);
    }
    rec.decision = DecideByQ(rec.profile);
    if (q.gold) rec.correct = rec.decision.choice == *q.gold;
    rec.keywords = DetectKeywords(rec.profile, options.top_k, q.special_word);
    rec.heatmap = RenderHeatmap(rec.profile, q);
  });
  SortById(&report.records);

  KeywordTally &tally = report.tally;
  tally.mode = std::string(DirectionName(report.direction)) + "-" +
               std::string(ScoreModeName(report.mode));
  std::size_t resolved = 0;
  for (const auto &rec : report.records) {
    if (!rec.keywords.annotated || !rec.correct) continue;
    ++tally.annotated;
    if (!*rec.correct) continue;
    ++resolved;
    ++tally.answered;
    if (rec.keywords.hit) ++tally.retrieved;
  }
  tally.accuracy = Ratio(resolved, tally.annotated);
  return report;
}

std::string KeywordTallyTsv(const AnalysisReport &report) {
  std::string out = "mode\tresolution_accuracy\tretrieved\tanswered\n";
  const KeywordTally &t = report.tally;
  if (t.annotated == 0) return out;
  out += t.mode + "\t" + Full(t.accuracy.value_or(0.0)) + "\t" +
         std::to_string(t.retrieved) + "\t" + std::to_string(t.answered) + "\n";
  return out;
}

std::string RatioTsv(const AnalysisReport &report) {
  std::string out = "id\tposition\ttoken\tkind\tlog_ratio\n";
  for (const auto &rec : report.records) {
    for (const auto &p : rec.profile.positions) {
      out += rec.id + "\t" + std::to_string(p.position) + "\t" + p.token + "\t" +
             std::string(KindName(p.kind)) + "\t" + Full(p.log_ratio) + "\n";
    }
  }
  return out;
}

std::string RenderAnalysisText(const AnalysisReport &report) {
  std::string out = "question set: " + report.set_name + "\nscorer: " + report.scorer +
                    " (" + std::string(DirectionName(report.direction)) + ", " +
                    std::string(ScoreModeName(report.mode)) + ")\n\n";
  for (const auto &rec : report.records) {
    out += rec.id + "  log Q = " + Fixed4(rec.profile.log_q) + "  choice " +
           std::to_string(rec.decision.choice) + (rec.decision.tie ? " (tie)" : "");
    if (rec.correct) out += *rec.correct ? "  ok" : "  wrong";
    out += "\n  " + rec.heatmap.ansi + "\n  top-" + std::to_string(rec.keywords.top_k) +
           ":";
    for (const auto &p : rec.keywords.top) {
      out += " " + p.token + "(" + Fixed4(p.log_ratio) + ")";
    }
    if (rec.keywords.tie) out += " [tie]";
    if (rec.keywords.annotated) out += rec.keywords.hit ? "  keyword found" : "  keyword missed";
    out += "\n";
  }
  const KeywordTally &t = report.tally;
  out += "\n" + Pad("mode", 20) + Pad("resolution accuracy", 22) + "special word retrieved\n";
  if (t.annotated == 0) {
    out += "(no annotated special words)\n";
  } else {
    out += Pad(t.mode, 20) + Pad(Fixed4(t.accuracy.value_or(0.0)), 22) +
           std::to_string(t.retrieved) + " / " + std::to_string(t.answered) + "\n";
  }
  return out;
}

std::string RenderAnalysisHtml(const AnalysisReport &report) {
  std::string out =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" +
      HtmlEscape(report.set_name) + "</title></head><body>\n";
  for (const auto &rec : report.records) out += HeatmapBody(rec.heatmap.html);
  out += "</body></html>\n";
  return out;
}

}  // namespace lmcr
