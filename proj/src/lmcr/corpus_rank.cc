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

#include "lmcr/corpus_rank.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <thread>

#include "lmcr/status.h"

namespace lmcr {
namespace {

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

// Shortest text that reads back to the same value.
std::string Num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Reads lines from plain or gzip-compressed files.
class LineReader {
 public:
  explicit LineReader(const std::string &path) : file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) Fail(ErrorCode::kIoError, "cannot open " + path);
  }
  ~LineReader() { gzclose(file_); }
  LineReader(const LineReader &) = delete;
  LineReader &operator=(const LineReader &) = delete;

  // Returns false at end of input. `offset` is the byte offset of the line
  // start in the uncompressed stream.
  bool Next(std::string *line, uint64_t *offset) {
    line->clear();
    *offset = consumed_;
    char buf[1 << 16];
    bool any = false;
    while (gzgets(file_, buf, sizeof(buf)) != nullptr) {
      any = true;
      std::string_view chunk(buf);
      consumed_ += chunk.size();
      line->append(chunk);
      if (!chunk.empty() && chunk.back() == '\n') break;
    }
    int err = 0;
    gzerror(file_, &err);
    if (err != Z_OK && err != Z_STREAM_END) {
      Fail(ErrorCode::kIoError, "corrupt compressed input");
    }
    if (!line->empty() && line->back() == '\n') line->pop_back();
    if (!line->empty() && line->back() == '\r') line->pop_back();
    return any;
  }

 private:
  gzFile file_;
  uint64_t consumed_ = 0;
};

void CheckFraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    Fail(ErrorCode::kConfigError, "top fraction must be in (0, 1]");
  }
}

}  // namespace

void NGramProfile::Add(const TokenSequence &seq) {
  for (int n = 1; n <= kMaxSimilarityOrder; ++n) {
    grams[n - 1].Merge(ExtractNGrams(seq, n));
  }
}

NGramProfile ProfileOf(const TokenSequence &seq) {
  NGramProfile p;
  p.Add(seq);
  return p;
}

NGramProfile QueryProfileOf(const QuestionSet &questions) {
  NGramProfile p;
  for (const auto &q : questions.questions) p.Add(q.tokens);
  return p;
}

double NGramF1(const NGramProfile &doc, const NGramProfile &query, int n) {
  if (n < 1 || n > kMaxSimilarityOrder) {
    Fail(ErrorCode::kInvalidOrder, "similarity order must be in 1..4");
  }
  const NGramMultiset &d = doc.order(n);
  const NGramMultiset &q = query.order(n);
  if (d.empty() || q.empty()) return 0.0;
  const NGramMultiset &small = d.entries().size() <= q.entries().size() ? d : q;
  const NGramMultiset &large = &small == &d ? q : d;
  uint64_t overlap = 0;
  for (const auto &[key, count] : small.entries()) {
    overlap += std::min(count, large.Count(key));
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(d.total());
  double recall = static_cast<double>(overlap) / static_cast<double>(q.total());
  return 2.0 * precision * recall / (precision + recall);
}

Similarity SimilarityScore(const NGramProfile &doc, const NGramProfile &query) {
  Similarity s;
  double weighted = 0.0, weights = 0.0;
  for (int n = 1; n <= kMaxSimilarityOrder; ++n) {
    s.f1[n - 1] = NGramF1(doc, query, n);
    weighted += n * s.f1[n - 1];
    weights += n;
  }
  s.score = weighted / weights;
  return s;
}

bool RanksBefore(const RankedDocument &a, const RankedDocument &b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

void TopKSelector::Offer(RankedDocument doc) {
  if (k_ == 0) return;
  if (heap_.size() < k_) {
    heap_.push_back(std::move(doc));
    std::push_heap(heap_.begin(), heap_.end(), RanksBefore);
  } else if (RanksBefore(doc, heap_.front())) {
    std::pop_heap(heap_.begin(), heap_.end(), RanksBefore);
    heap_.back() = std::move(doc);
    std::push_heap(heap_.begin(), heap_.end(), RanksBefore);
  }
}

void TopKSelector::Merge(TopKSelector other) {
  for (auto &doc : other.heap_) Offer(std::move(doc));
}

std::vector<RankedDocument> TopKSelector::Sorted() const {
  std::vector<RankedDocument> out = heap_;
  std::sort(out.begin(), out.end(), RanksBefore);
  return out;
}

std::size_t KeepCount(double top_fraction, uint64_t total) {
  CheckFraction(top_fraction);
  if (total == 0) return 0;
  // The small slack keeps 0.001 * 10000 at 10 despite rounding.
  double k = std::ceil(top_fraction * static_cast<double>(total) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, total);
}

Histogram MakeHistogram(std::span<const RankedDocument> docs, int buckets) {
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(std::max(buckets, 1)), 0);
  if (docs.empty()) return h;
  h.lo = h.hi = docs.front().score;
  for (const auto &d : docs) {
    h.lo = std::min(h.lo, d.score);
    h.hi = std::max(h.hi, d.score);
  }
  const double width = h.hi - h.lo;
  for (const auto &d : docs) {
    std::size_t b = 0;
    if (width > 0) {
      b = static_cast<std::size_t>((d.score - h.lo) / width *
                                   static_cast<double>(h.counts.size()));
      b = std::min(b, h.counts.size() - 1);
    }
    ++h.counts[b];
  }
  return h;
}

CorpusRanker::CorpusRanker(const QuestionSet &questions, uint64_t total_docs,
                           const RankOptions &options)
    : options_(options),
      expected_(total_docs),
      selector_(KeepCount(options.top_fraction, total_docs)) {
  if (questions.questions.empty()) {
    Fail(ErrorCode::kEmptyDataset, "no questions to rank against");
  }
  if (options_.query_mode == QueryMode::kAggregate) {
    queries_.push_back(QueryProfileOf(questions));
  } else {
    for (const auto &q : questions.questions) queries_.push_back(ProfileOf(q.tokens));
  }
}

std::optional<RankedDocument> CorpusRanker::Score(const Document &doc) const {
  std::vector<std::string> words;
  try {
    words = TokenizeWords(doc.text, options_.policy);
  } catch (const Error &) {
    words.clear();  // Unreadable text scores zero.
  }
  if (options_.max_oov_fraction && options_.known_words != nullptr && !words.empty()) {
    std::size_t oov = 0;
    for (const auto &w : words) oov += options_.known_words->Find(w) ? 0 : 1;
    if (static_cast<double>(oov) / static_cast<double>(words.size()) >
        *options_.max_oov_fraction) {
      return std::nullopt;
    }
  }
  RankedDocument ranked;
  ranked.id = doc.id;
  ranked.offset = doc.offset;
  ranked.text = doc.text;
  if (words.empty()) return ranked;
  NGramProfile profile = ProfileOf(TokenSequence::FromInterior(std::move(words)));
  for (const auto &query : queries_) {
    Similarity s = SimilarityScore(profile, query);
    if (s.score > ranked.score || (&query == &queries_.front())) {
      ranked.score = s.score;
      ranked.f1 = s.f1;
    }
  }
  return ranked;
}

void CorpusRanker::Add(const Document &doc) {
  if (++seen_ > expected_) {
    Fail(ErrorCode::kInvalidArgument, "more documents than announced");
  }
  Offer(Score(doc));
}

void CorpusRanker::AddBatch(std::span<const Document> docs) {
  if (seen_ + docs.size() > expected_) {
    Fail(ErrorCode::kInvalidArgument, "more documents than announced");
  }
  seen_ += docs.size();
  std::vector<std::optional<RankedDocument>> ranked(docs.size());
  const std::size_t workers = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(options_.threads, 1)), 1,
      std::max<std::size_t>(docs.size(), 1));
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < docs.size(); i += workers) ranked[i] = Score(docs[i]);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto &t : pool) t.join();
  }
  for (auto &r : ranked) Offer(std::move(r));
}

void CorpusRanker::Offer(std::optional<RankedDocument> ranked) {
  if (!ranked) {
    ++dropped_;
    return;
  }
  selector_.Offer(std::move(*ranked));
}

RankResult CorpusRanker::Finish() {
  if (seen_ != expected_) {
    Fail(ErrorCode::kInvalidArgument, "fewer documents than announced");
  }
  RankResult result;
  result.total_docs = seen_;
  result.dropped_low_quality = dropped_;
  result.kept = selector_.Sorted();
  result.histogram = MakeHistogram(result.kept, options_.histogram_buckets);
  return result;
}

RankResult RankCorpus(std::span<const Document> docs,
                      const QuestionSet &questions, const RankOptions &options) {
  if (docs.empty()) Fail(ErrorCode::kEmptyCorpus, "no documents to rank");
  CorpusRanker ranker(questions, docs.size(), options);
  const std::size_t k = KeepCount(options.top_fraction, docs.size());
  const std::size_t shards = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(options.threads, 1)), 1, docs.size());
  std::vector<TopKSelector> partial(shards, TopKSelector(k));
  std::vector<uint64_t> dropped(shards, 0);
  auto work = [&](std::size_t shard) {
    for (std::size_t i = shard * docs.size() / shards;
         i < (shard + 1) * docs.size() / shards; ++i) {
      if (auto ranked = ranker.Score(docs[i])) {
        partial[shard].Offer(std::move(*ranked));
      } else {
        ++dropped[shard];
      }
    }
  };
  if (shards == 1) {
    work(0);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t s = 0; s < shards; ++s) workers.emplace_back(work, s);
    for (auto &w : workers) w.join();
  }
  TopKSelector merged(k);
  RankResult result;
  result.total_docs = docs.size();
  for (std::size_t s = 0; s < shards; ++s) {
    merged.Merge(std::move(partial[s]));
    result.dropped_low_quality += dropped[s];
  }
  result.kept = merged.Sorted();
  result.histogram = MakeHistogram(result.kept, options.histogram_buckets);
  return result;
}

RankResult RankCorpusFile(const std::string &path, const QuestionSet &questions,
                          const RankOptions &options) {
  CheckFraction(options.top_fraction);
  uint64_t total = 0;
  std::string line;
  uint64_t offset = 0;
  {
    LineReader counter(path);
    while (counter.Next(&line, &offset)) total += IsBlank(line) ? 0 : 1;
  }
  if (total == 0) Fail(ErrorCode::kEmptyCorpus, "no documents in " + path);
  CorpusRanker ranker(questions, total, options);
  LineReader reader(path);
  uint64_t line_no = 0;
  constexpr std::size_t kBatch = 4096;
  std::vector<Document> batch;
  while (reader.Next(&line, &offset)) {
    ++line_no;
    if (IsBlank(line)) continue;
    batch.push_back(Document{line_no, offset, line});
    if (batch.size() == kBatch) {
      ranker.AddBatch(batch);
      batch.clear();
    }
  }
  ranker.AddBatch(batch);
  return ranker.Finish();
}

std::vector<Document> ParseDocuments(std::string_view text) {
  std::vector<Document> out;
  std::size_t pos = 0;
  uint64_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!IsBlank(line)) out.push_back(Document{line_no, pos, std::string(line)});
    pos = nl + 1;
  }
  return out;
}

std::vector<Document> ReadDocuments(const std::string &path) {
  std::vector<Document> out;
  LineReader reader(path);
  std::string line;
  uint64_t offset = 0, line_no = 0;
  while (reader.Next(&line, &offset)) {
    ++line_no;
    if (!IsBlank(line)) out.push_back(Document{line_no, offset, line});
  }
  return out;
}

std::vector<ContaminationHit> ContaminationReport(std::span<const Document> docs,
                                                  const QuestionSet &questions,
                                                  double threshold,
                                                  const TokenizePolicy &policy) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    Fail(ErrorCode::kConfigError, "contamination threshold must be in (0, 1]");
  }
  std::vector<NGramProfile> profiles;
  for (const auto &q : questions.questions) profiles.push_back(ProfileOf(q.tokens));
  std::vector<ContaminationHit> hits;
  for (const auto &doc : docs) {
    std::vector<std::string> words;
    try {
      words = TokenizeWords(doc.text, policy);
    } catch (const Error &) {
      continue;
    }
    if (words.empty()) continue;
    NGramProfile profile = ProfileOf(TokenSequence::FromInterior(std::move(words)));
    double best = -1.0;
    std::size_t best_q = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      double s = SimilarityScore(profile, profiles[i]).score;
      if (s > best) {
        best = s;
        best_q = i;
      }
    }
    if (best >= threshold) {
      hits.push_back({doc.id, doc.offset, questions.questions[best_q].id, best});
    }
  }
  return hits;
}

std::string RankingTsv(const RankResult &result) {
  std::string out = "id\tscore\tf1_1\tf1_2\tf1_3\tf1_4\toffset\n";
  for (const auto &d : result.kept) {
    out += std::to_string(d.id) + '\t' + Num(d.score);
    for (double f : d.f1) out += '\t' + Num(f);
    out += '\t' + std::to_string(d.offset) + '\n';
  }
  return out;
}

std::string HistogramCsv(const Histogram &h) {
  std::string out = "bucket,lo,hi,count\n";
  const double width =
      h.counts.empty() ? 0.0 : (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    double lo = h.lo + width * static_cast<double>(b);
    double hi = b + 1 == h.counts.size() ? h.hi : lo + width;
    out += std::to_string(b) + ',' + Num(lo) + ',' + Num(hi) + ',' +
           std::to_string(h.counts[b]) + '\n';
  }
  return out;
}

std::string ContaminationTsv(std::span<const ContaminationHit> hits) {
  std::string out = "id\tquestion\tscore\toffset\n";
  for (const auto &h : hits) {
    out += std::to_string(h.doc_id) + '\t' + h.question_id + '\t' + Num(h.score) +
           '\t' + std::to_string(h.offset) + '\n';
  }
  return out;
}

std::string ExtractedCorpus(const RankResult &result) {
  std::string out;
  for (const auto &d : result.kept) out += d.text + '\n';
  return out;
}

}  // namespace lmcr
