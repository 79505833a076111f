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

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit status
// when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lmcr/analysis.h"
#include "lmcr/corpus_rank.h"
#include "lmcr/evaluation.h"
#include "lmcr/ngram_model.h"
#include "lmcr/resolver.h"
#include "support/oracle.h"
#include "support/synthetic.h"
#include "support/test_util.h"

namespace lmcr {
namespace {

constexpr double kChainRuleTolerance = 1e-9;
constexpr double kNormalizationTolerance = 1e-9;
constexpr double kOracleTolerance = 1e-12;
constexpr double kQTolerance = 1e-9;
constexpr double kRankTolerance = 1e-12;
constexpr double kChainRuleSeconds = 5.0;
constexpr double kNormalizationSeconds = 5.0;
constexpr double kSuiteSeconds = 10.0;
constexpr double kRankSeconds = 10.0;
constexpr int kChainRuleQuestions = 1200;
constexpr int kContextsPerConfig = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(const std::string &name, const std::function<Outcome()> &check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string Fmt(const char *format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

std::unique_ptr<NGramModel> Train(const std::vector<TokenSequence> &corpus, int order,
                                  bool laplace, bool chars,
                                  Direction direction = Direction::kForward) {
  TrainOptions o;
  o.order = order;
  o.smoothing = laplace ? Smoothing::Laplace(0.1) : Smoothing::JelinekMercer();
  o.direction = direction;
  if (chars) return TrainCharNGram(corpus, o);
  return TrainWordNGram(corpus, o);
}

Outcome ChainRule() {
  auto start = std::chrono::steady_clock::now();
  testing::RandomText rnd(1001);
  auto corpus = rnd.Corpus(100);
  std::vector<std::unique_ptr<NGramModel>> models;
  for (int order = 1; order <= 3; ++order) {
    for (bool laplace : {true, false}) {
      for (bool chars : {false, true}) models.push_back(Train(corpus, order, laplace, chars));
    }
  }
  int checked = 0;
  double worst = 0.0;
  for (int i = 0; i < kChainRuleQuestions; ++i) {
    SchemaQuestion q = rnd.Question("chain-" + std::to_string(i));
    const NGramModel &model = *models[i % models.size()];
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
      SubstitutedSentence sub = Substitute(q, c);
      if (sub.suffix_start + 1 >= sub.tokens.size()) continue;
      std::vector<double> lp = model.CondLogProbs(sub.tokens);
      double prefix = 0.0;
      for (std::size_t t = 1; t < sub.suffix_start; ++t) prefix += lp[t - 1];
      double gap = std::abs(ScoreFull(model, sub) - prefix - ScorePartial(model, sub));
      worst = std::max(worst, gap);
      ++checked;
    }
  }
  double secs = Seconds(start);
  return {worst < kChainRuleTolerance && secs < kChainRuleSeconds &&
              checked >= kChainRuleQuestions,
          std::to_string(checked) + " substitutions from " +
              std::to_string(kChainRuleQuestions) + " questions, " +
              Fmt("max gap %.3g (< %.0e), ", worst, kChainRuleTolerance) +
              Fmt("%.2fs (< %.0fs)", secs, kChainRuleSeconds)};
}

Outcome Normalization() {
  auto start = std::chrono::steady_clock::now();
  testing::RandomText rnd(2002);
  auto corpus = rnd.Corpus(80);
  double worst = 0.0;
  int configs = 0;
  for (int order = 1; order <= 4; ++order) {
    for (bool laplace : {true, false}) {
      for (bool chars : {false, true}) {
        auto model = Train(corpus, order, laplace, chars);
        std::vector<Symbol> symbols = model->PredictedSymbols();
        for (int i = 0; i < kContextsPerConfig; ++i) {
          std::vector<Symbol> history = {0};
          int len = rnd.Uniform(0, order + 1);
          for (int k = 0; k < len; ++k) {
            history.push_back(symbols[rnd.Uniform(0, static_cast<int>(symbols.size()) - 1)]);
          }
          double sum = 0.0;
          for (Symbol w : symbols) sum += model->estimator().Prob(history, w);
          worst = std::max(worst, std::abs(sum - 1.0));
        }
        ++configs;
      }
    }
  }
  double secs = Seconds(start);
  return {worst <= kNormalizationTolerance && secs < kNormalizationSeconds,
          std::to_string(configs) + " configurations x " + std::to_string(kContextsPerConfig) +
              Fmt(" contexts, max |sum-1| %.3g, %.2fs (< %.0fs)", worst, secs,
                  kNormalizationSeconds)};
}

Outcome OracleEquivalence() {
  std::vector<std::vector<TokenSequence>> corpora = {
      testing::BallCupCorpus(),
      {Tokenize("the cat sat ."), Tokenize("the dog sat .")},
      testing::RandomText(3003).Corpus(30)};
  testing::RandomText rnd(3004);
  double worst = 0.0;
  int compared = 0;
  for (const auto &corpus : corpora) {
    auto interiors = testing::Interiors(corpus);
    std::vector<TokenSequence> probes = corpus;
    for (int i = 0; i < 10; ++i) probes.push_back(Tokenize(rnd.Sentence(1, 7)));
    for (int order = 1; order <= 3; ++order) {
      testing::WordOracle word_oracle(interiors, order);
      testing::CharOracle char_oracle(interiors, order);
      for (bool laplace : {true, false}) {
        auto word = Train(corpus, order, laplace, false);
        auto chars = Train(corpus, order, laplace, true);
        for (const auto &seq : probes) {
          std::vector<std::string> interior(seq.interior().begin(), seq.interior().end());
          auto a = word->CondLogProbs(seq);
          auto b = word_oracle.CondLogProbs(interior, laplace, 0.1);
          auto c = chars->CondLogProbs(seq);
          auto d = char_oracle.CondLogProbs(interior, laplace, 0.1);
          if (a.size() != b.size() || c.size() != d.size()) return {false, "length mismatch"};
          double joint_a = 0, joint_b = 0, joint_c = 0, joint_d = 0;
          for (std::size_t t = 0; t < a.size(); ++t) {
            worst = std::max(worst, std::abs(a[t] - b[t]));
            worst = std::max(worst, std::abs(c[t] - d[t]));
            joint_a += a[t];
            joint_b += b[t];
            joint_c += c[t];
            joint_d += d[t];
          }
          worst = std::max({worst, std::abs(joint_a - joint_b), std::abs(joint_c - joint_d)});
          compared += 2;
        }
      }
    }
  }
  return {worst <= kOracleTolerance,
          std::to_string(compared) + Fmt(" sequences, max |log diff| %.3g (<= %.0e)", worst,
                                         kOracleTolerance)};
}

Outcome QConsistency() {
  testing::RandomText rnd(4004);
  auto corpus = rnd.Corpus(80);
  double worst = 0.0;
  int cases = 0, disagreements = 0;
  auto check = [&](const Scorer &model, const SchemaQuestion &q, std::size_t a, std::size_t b,
                   ScoreMode mode) {
    RatioProfile p = PositionRatios(model, q, {a, b}, mode);
    worst = std::max(worst, std::abs(std::exp(p.log_q) - std::exp(p.score_difference)));
    const Scorer *scorers[] = {&model};
    std::vector<CandidateScores> all = ScoreCandidates(scorers, q, nullptr);
    ScoreReport r = Decide({all[a], all[b]}, mode, Combine::kMeanLogScore);
    std::size_t resolved = r.decision == 0 ? a : b;
    if (r.tie) resolved = std::min(a, b);
    if (DecideByQ(p).choice != resolved) ++disagreements;
    ++cases;
  };
  for (int order = 1; order <= 3; ++order) {
    for (bool laplace : {true, false}) {
      auto model = Train(corpus, order, laplace, false);
      for (int i = 0; i < 60; ++i) {
        SchemaQuestion q = rnd.Question("q-" + std::to_string(i));
        bool suffix = true;
        for (std::size_t c = 0; c < q.candidates.size(); ++c) {
          suffix = suffix && HasSuffix(Substitute(q, c));
        }
        check(*model, q, 0, 1, ScoreMode::kFull);
        if (suffix) check(*model, q, 0, 1, ScoreMode::kPartial);
        if (q.candidates.size() > 2) check(*model, q, 2, 0, ScoreMode::kFull);
      }
    }
  }
  testing::SyntheticSuite suite = testing::ForwardSuite();
  auto model = testing::TrainSuiteModel(suite, Direction::kForward);
  for (const auto &q : suite.questions.questions) {
    check(*model, q, 0, 1, ScoreMode::kFull);
    check(*model, q, 0, 1, ScoreMode::kPartial);
  }
  return {worst <= kQTolerance && disagreements == 0,
          std::to_string(cases) + Fmt(" profiles, max |Q - exp(diff)| %.3g (<= %.0e), ", worst,
                                      kQTolerance) +
              std::to_string(disagreements) + " disagreements with resolve"};
}

Outcome SuiteCriterion() {
  auto start = std::chrono::steady_clock::now();
  testing::SyntheticSuite suite = testing::ForwardSuite();
  auto model = testing::TrainSuiteModel(suite, Direction::kForward);
  const Scorer *scorers[] = {model.get()};
  EvalOptions options;
  options.counts = model.get();
  EvalReport report = Evaluate(suite.questions, scorers, options);
  std::map<ScoreMode, std::size_t> correct;
  for (const auto &s : report.summaries) correct[s.mode] = s.correct;
  int traps_ok = 0;
  for (const auto &rec : report.records) {
    if (std::find(suite.trap_ids.begin(), suite.trap_ids.end(), rec.id) == suite.trap_ids.end()) {
      continue;
    }
    bool full_wrong = false, normalized_right = false, partial_right = false;
    for (const auto &o : rec.outcomes) {
      if (o.mode == ScoreMode::kFull) full_wrong = !*o.correct;
      if (o.mode == ScoreMode::kFullNormalized) normalized_right = *o.correct;
      if (o.mode == ScoreMode::kPartial) partial_right = *o.correct;
    }
    if (full_wrong && normalized_right && partial_right) ++traps_ok;
  }
  double secs = Seconds(start);
  const std::size_t n = suite.questions.questions.size();
  return {n == 12 && correct[ScoreMode::kPartial] == n &&
              traps_ok == static_cast<int>(suite.trap_ids.size()) && !suite.trap_ids.empty() &&
              report.correction && report.correction->corrected > 0 && secs < kSuiteSeconds,
          "partial " + std::to_string(correct[ScoreMode::kPartial]) + "/" + std::to_string(n) +
              ", full " + std::to_string(correct[ScoreMode::kFull]) + "/" + std::to_string(n) +
              ", full_normalized " + std::to_string(correct[ScoreMode::kFullNormalized]) + "/" +
              std::to_string(n) + ", traps fixed by both " + std::to_string(traps_ok) + "/" +
              std::to_string(suite.trap_ids.size()) +
              Fmt(", %.2fs (< %.0fs)", secs, kSuiteSeconds)};
}

Outcome KeywordDetection() {
  std::string detail;
  bool pass = true;
  for (Direction d : {Direction::kForward, Direction::kBackward}) {
    testing::SyntheticSuite suite =
        d == Direction::kForward ? testing::ForwardSuite() : testing::BackwardSuite();
    auto model = testing::TrainSuiteModel(suite, d);
    std::size_t hits = 0;
    for (const auto &q : suite.questions.questions) {
      std::pair<std::size_t, std::size_t> pair{*q.gold, 1 - *q.gold};
      RatioProfile p = d == Direction::kForward
                           ? PositionRatios(*model, q, pair, ScoreMode::kPartial)
                           : BackwardRatios(*model, q, pair, ScoreMode::kPartial);
      if (DetectKeywords(p, 2, q.special_word).hit) ++hits;
    }
    const std::size_t n = suite.questions.questions.size();
    pass = pass && hits == n && n > 0;
    if (!detail.empty()) detail += ", ";
    detail += std::string(DirectionName(d)) + " top-2 " + std::to_string(hits) + "/" +
              std::to_string(n);
  }
  return {pass, detail};
}

// Clipped-overlap F1 straight from token vectors.
double OracleF1(const std::vector<std::vector<std::string>> &docs,
                const std::vector<std::vector<std::string>> &queries, int n) {
  auto count = [n](const std::vector<std::vector<std::string>> &texts) {
    std::map<std::vector<std::string>, long> m;
    for (const auto &t : texts) {
      for (std::size_t i = 0; i + n <= t.size(); ++i) {
        ++m[std::vector<std::string>(t.begin() + i, t.begin() + i + n)];
      }
    }
    return m;
  };
  auto d = count(docs), q = count(queries);
  long dn = 0, qn = 0, overlap = 0;
  for (const auto &[g, c] : d) {
    dn += c;
    auto it = q.find(g);
    if (it != q.end()) overlap += std::min(c, it->second);
  }
  for (const auto &[g, c] : q) qn += c;
  if (dn == 0 || qn == 0 || overlap == 0) return 0.0;
  double p = static_cast<double>(overlap) / dn, r = static_cast<double>(overlap) / qn;
  return 2 * p * r / (p + r);
}

double OracleScore(const std::vector<std::string> &doc,
                   const std::vector<std::vector<std::string>> &queries) {
  double s = 0;
  for (int n = 1; n <= 4; ++n) s += n * OracleF1({doc}, queries, n);
  return s / 10.0;
}

Outcome RankerCriterion() {
  auto start = std::chrono::steady_clock::now();
  // Hand-derived values.
  NGramProfile q = ProfileOf(Tokenize("a b c"));
  Similarity s = SimilarityScore(ProfileOf(Tokenize("a b d")), q);
  Similarity para = SimilarityScore(ProfileOf(Tokenize("e c a x d")),
                                    ProfileOf(Tokenize("a b c d e")));
  double hand = std::max({std::abs(s.f1[0] - 2.0 / 3.0), std::abs(s.f1[1] - 0.5),
                          std::abs(s.f1[2]), std::abs(s.score - 1.0 / 6.0),
                          std::abs(para.score - 0.08)});

  // Streaming selection against a full sort of oracle scores.
  testing::RandomText rnd(5005);
  QuestionSet questions{"rank", {}};
  std::vector<std::vector<std::string>> query_tokens;
  for (int i = 0; i < 6; ++i) {
    SchemaQuestion sq = rnd.Question("r" + std::to_string(i));
    query_tokens.emplace_back(sq.tokens.interior().begin(), sq.tokens.interior().end());
    questions.questions.push_back(std::move(sq));
  }
  std::vector<Document> docs;
  std::vector<std::pair<double, uint64_t>> oracle;
  for (uint64_t id = 1; id <= 10000; ++id) {
    auto words = rnd.Words(3, 14);
    std::string text;
    for (const auto &w : words) text += (text.empty() ? "" : " ") + w;
    docs.push_back({id, 0, text});
    oracle.emplace_back(OracleScore(words, query_tokens), id);
  }
  std::sort(oracle.begin(), oracle.end(), [](const auto &a, const auto &b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  RankOptions options;
  RankResult result = RankCorpus(docs, questions, options);
  bool selection = result.kept.size() == 10;
  double score_gap = 0.0;
  for (std::size_t i = 0; selection && i < 10; ++i) {
    score_gap = std::max(score_gap, std::abs(result.kept[i].score - oracle[i].first));
    selection = result.kept[i].id == oracle[i].second;
  }
  selection = selection && score_gap <= kRankTolerance;

  // A question copied verbatim into the corpus.
  std::vector<Document> leak = {{1, 0, docs[0].text}, {2, 0, questions.questions[3].text}};
  auto hits = ContaminationReport(leak, questions, 0.5, TokenizePolicy{});
  bool flagged = hits.size() == 1 && hits[0].doc_id == 2 && hits[0].question_id == "r3" &&
                 std::abs(hits[0].score - 1.0) <= kRankTolerance;
  double secs = Seconds(start);
  return {hand <= kRankTolerance && selection && flagged && secs < kRankSeconds,
          Fmt("hand values max error %.3g (<= %.0e), ", hand, kRankTolerance) + "top " +
              std::to_string(result.kept.size()) + " of 10000 " +
              (selection ? "match" : "differ from") + " full sort, contamination " +
              (flagged ? "flagged at 1.0" : "missed") +
              Fmt(", %.2fs (< %.0fs)", secs, kRankSeconds)};
}

int Shell(const std::string &cmd) {
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism() {
  testing::TempDir dir;
  testing::SyntheticSuite suite = testing::ForwardSuite();
  std::string corpus;
  for (const auto &s : suite.corpus) corpus += s.Join() + "\n";
  dir.Write("corpus.txt", corpus);
  ExportJsonl(suite.questions, dir.File("q.jsonl"));
  const std::string cli = std::string("'") + LMCR_CLI_PATH + "'";
  if (Shell(cli + " train --corpus '" + dir.File("corpus.txt") + "' --out '" +
            dir.File("m.bin") + "' >/dev/null") != 0) {
    return {false, "training failed"};
  }
  std::vector<std::string> outputs;
  for (const char *ext : {"json", "tsv"}) {
    for (int run = 0; run < 2; ++run) {
      std::string out = dir.File("run" + std::to_string(run) + "." + ext);
      std::string table = dir.File("table" + std::to_string(run) + "." + ext);
      if (Shell(cli + " eval --questions '" + dir.File("q.jsonl") + "' --scorers 'ngram:" +
                dir.File("m.bin") + "," + "uniform:40' --threads " +
                std::to_string(run + 1) + " --out '" + out + "' >'" + table + "'") != 0) {
        return {false, "eval failed"};
      }
      outputs.push_back(testing::Slurp(out) + "\n--\n" + testing::Slurp(table));
    }
  }
  bool same = outputs[0] == outputs[1] && outputs[2] == outputs[3] && !outputs[0].empty();
  return {same, same ? "json, tsv and table outputs byte-identical across two runs"
                     : "outputs differ between runs"};
}

}  // namespace
}  // namespace lmcr

int main() {
  using namespace lmcr;
  Report("chain-rule identity", ChainRule);
  Report("normalization", Normalization);
  Report("oracle equivalence", OracleEquivalence);
  Report("Q-consistency", QConsistency);
  Report("synthetic Winograd suite", SuiteCriterion);
  Report("keyword detection", KeywordDetection);
  Report("corpus ranker", RankerCriterion);
  Report("determinism", Determinism);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
