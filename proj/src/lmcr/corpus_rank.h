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

#ifndef LMCR_CORPUS_RANK_H_
#define LMCR_CORPUS_RANK_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmcr/dataset.h"
#include "lmcr/text.h"

namespace lmcr {

inline constexpr int kMaxSimilarityOrder = 4;

// Surface n-grams of orders 1..4 over interior tokens (markers excluded).
struct NGramProfile {
  std::array<NGramMultiset, kMaxSimilarityOrder> grams{
      NGramMultiset(1), NGramMultiset(2), NGramMultiset(3), NGramMultiset(4)};

  void Add(const TokenSequence &seq);
  const NGramMultiset &order(int n) const { return grams.at(n - 1); }
};

NGramProfile ProfileOf(const TokenSequence &seq);
// Aggregated over every question sentence of the set.
NGramProfile QueryProfileOf(const QuestionSet &questions);

// Clipped-overlap F1 between document and query n-grams of order n; zero if
// either side has no n-grams of that order.
double NGramF1(const NGramProfile &doc, const NGramProfile &query, int n);

struct Similarity {
  double score = 0.0;
  std::array<double, kMaxSimilarityOrder> f1{};
};

// sum_n n * F1(n) / sum_n n, n = 1..4.
Similarity SimilarityScore(const NGramProfile &doc, const NGramProfile &query);

struct Document {
  uint64_t id = 0;
  uint64_t offset = 0;
  std::string text;
};

struct RankedDocument {
  uint64_t id = 0;
  double score = 0.0;
  std::array<double, kMaxSimilarityOrder> f1{};
  uint64_t offset = 0;
  std::string text;
};

// Higher score first, then lower id.
bool RanksBefore(const RankedDocument &a, const RankedDocument &b);

// Bounded best-k selection; partial selections merge associatively.
class TopKSelector {
 public:
  explicit TopKSelector(std::size_t k) : k_(k) {}

  void Offer(RankedDocument doc);
  void Merge(TopKSelector other);
  std::size_t size() const { return heap_.size(); }
  // Best first.
  std::vector<RankedDocument> Sorted() const;

 private:
  std::size_t k_;
  // Heap whose top is the worst retained document.
  std::vector<RankedDocument> heap_;
};

// ceil(fraction * total), at least one document when total > 0.
std::size_t KeepCount(double top_fraction, uint64_t total);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<uint64_t> counts;
};

// Equal-width buckets over the observed score range.
Histogram MakeHistogram(std::span<const RankedDocument> docs, int buckets = 100);

enum class QueryMode { kAggregate, kPerQuestionMax };

struct RankOptions {
  double top_fraction = 0.001;
  QueryMode query_mode = QueryMode::kAggregate;
  TokenizePolicy policy;
  // Drops documents whose share of tokens missing from `known_words`
  // exceeds the threshold. Off unless both are set.
  std::optional<double> max_oov_fraction;
  const Vocabulary *known_words = nullptr;
  int histogram_buckets = 100;
  int threads = 1;
};

struct RankResult {
  uint64_t total_docs = 0;
  uint64_t dropped_low_quality = 0;
  std::vector<RankedDocument> kept;
  Histogram histogram;
};

// Streaming ranker. The number of documents must be known up front so the
// selection can stay bounded at ceil(fraction * total).
class CorpusRanker {
 public:
  CorpusRanker(const QuestionSet &questions, uint64_t total_docs,
               const RankOptions &options);

  void Add(const Document &doc);
  // Scores the batch on up to `threads` workers, then offers in order.
  void AddBatch(std::span<const Document> docs);
  RankResult Finish();

  // Scores one document against the configured query.
  std::optional<RankedDocument> Score(const Document &doc) const;

 private:
  void Offer(std::optional<RankedDocument> ranked);

  RankOptions options_;
  std::vector<NGramProfile> queries_;
  uint64_t expected_;
  uint64_t seen_ = 0;
  uint64_t dropped_ = 0;
  TopKSelector selector_;
};

// Throws kEmptyCorpus for an empty document list and kConfigError for a
// fraction outside (0, 1].
RankResult RankCorpus(std::span<const Document> docs,
                      const QuestionSet &questions, const RankOptions &options);
// Document per non-blank line, plain or gzip; ids are 1-based line numbers.
RankResult RankCorpusFile(const std::string &path, const QuestionSet &questions,
                          const RankOptions &options);

std::vector<Document> ReadDocuments(const std::string &path);
std::vector<Document> ParseDocuments(std::string_view text);

struct ContaminationHit {
  uint64_t doc_id = 0;
  uint64_t offset = 0;
  std::string question_id;
  double score = 0.0;
};

// Documents whose similarity to some single question reaches `threshold`,
// paired with the best-matching question.
std::vector<ContaminationHit> ContaminationReport(std::span<const Document> docs,
                                                  const QuestionSet &questions,
                                                  double threshold,
                                                  const TokenizePolicy &policy);

std::string RankingTsv(const RankResult &result);
std::string HistogramCsv(const Histogram &histogram);
std::string ContaminationTsv(std::span<const ContaminationHit> hits);
// Kept documents, one per line, best first.
std::string ExtractedCorpus(const RankResult &result);

}  // namespace lmcr

#endif  // LMCR_CORPUS_RANK_H_
