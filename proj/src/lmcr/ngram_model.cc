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

#include "lmcr/ngram_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include "lmcr/dataset.h"
#include "lmcr/status.h"

namespace lmcr {
namespace {

constexpr char kMagic[8] = {'L', 'M', 'C', 'R', 'N', 'G', 'M', '\n'};
constexpr char kEndMagic[8] = {'L', 'M', 'C', 'R', 'E', 'N', 'D', '\n'};
constexpr uint32_t kFormatVersion = 1;

void AppendSymbol(Symbol s, std::string *key) {
  key->push_back(static_cast<char>((s >> 24) & 0xFF));
  key->push_back(static_cast<char>((s >> 16) & 0xFF));
  key->push_back(static_cast<char>((s >> 8) & 0xFF));
  key->push_back(static_cast<char>(s & 0xFF));
}

std::string PackKey(std::span<const Symbol> symbols) {
  std::string key;
  key.reserve(symbols.size() * 4);
  for (Symbol s : symbols) AppendSymbol(s, &key);
  return key;
}

std::vector<Symbol> UnpackKey(const std::string &key) {
  std::vector<Symbol> out(key.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto *p = reinterpret_cast<const unsigned char *>(key.data()) + 4 * i;
    out[i] = (Symbol{p[0]} << 24) | (Symbol{p[1]} << 16) | (Symbol{p[2]} << 8) |
             Symbol{p[3]};
  }
  return out;
}

uint64_t Lookup(const std::unordered_map<std::string, uint64_t> &map,
                const std::string &key) {
  auto it = map.find(key);
  return it == map.end() ? 0 : it->second;
}

void ValidateSmoothing(const Smoothing &s, int order) {
  if (s.kind == Smoothing::Kind::kLaplace) {
    if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) {
      Fail(ErrorCode::kConfigError, "Laplace alpha must be positive");
    }
    return;
  }
  if (s.lambdas.empty()) return;
  if (s.lambdas.size() != static_cast<std::size_t>(order)) {
    Fail(ErrorCode::kConfigError,
         "Jelinek-Mercer needs one weight per order (" +
             std::to_string(order) + ")");
  }
  double sum = 0.0;
  for (double l : s.lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      Fail(ErrorCode::kConfigError, "Jelinek-Mercer weights must be >= 0");
    }
    sum += l;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    Fail(ErrorCode::kConfigError, "Jelinek-Mercer weights must sum to 1");
  }
}

// Shortest text that reads back to the same value.
std::string FormatDouble(double v) {
  char buf[32];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

// Little-endian binary writer/reader for the model container.
class Writer {
 public:
  explicit Writer(std::string *out) : out_(out) {}
  void Bytes(const void *p, std::size_t n) {
    out_->append(static_cast<const char *>(p), n);
  }
  void U8(uint8_t v) { Bytes(&v, 1); }
  void U32(uint32_t v) { Bytes(&v, 4); }
  void U64(uint64_t v) { Bytes(&v, 8); }
  void F64(double v) { Bytes(&v, 8); }
  void Str(std::string_view s) {
    U32(static_cast<uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }

 private:
  std::string *out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void Bytes(void *p, std::size_t n) {
    if (in_.size() - pos_ < n) Fail(ErrorCode::kFormatError, "truncated model file");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  uint8_t U8() { uint8_t v; Bytes(&v, 1); return v; }
  uint32_t U32() { uint32_t v; Bytes(&v, 4); return v; }
  uint64_t U64() { uint64_t v; Bytes(&v, 8); return v; }
  double F64() { double v; Bytes(&v, 8); return v; }
  std::string Str() {
    uint32_t n = U32();
    if (in_.size() - pos_ < n) Fail(ErrorCode::kFormatError, "truncated model file");
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

template <typename Fn>
void ForShards(std::size_t n, int threads, Fn fn) {
  std::size_t shards = std::max<std::size_t>(
      1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1))));
  if (shards == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> workers;
  for (std::size_t s = 0; s < shards; ++s) {
    workers.emplace_back(fn, s, s * n / shards, (s + 1) * n / shards);
  }
  for (auto &w : workers) w.join();
}

std::vector<TokenSequence> Oriented(std::span<const TokenSequence> corpus,
                                    Direction direction) {
  std::vector<TokenSequence> out;
  out.reserve(corpus.size());
  for (const auto &seq : corpus) {
    out.push_back(direction == Direction::kBackward ? Reverse(seq) : seq);
  }
  return out;
}

NGramCounts CountSymbols(const std::vector<std::vector<Symbol>> &streams,
                         int order, int threads) {
  std::size_t shards = std::max<std::size_t>(
      1, std::min<std::size_t>(streams.size(),
                               static_cast<std::size_t>(std::max(threads, 1))));
  std::vector<NGramCounts> partial(shards, NGramCounts(order));
  ForShards(streams.size(), static_cast<int>(shards),
            [&](std::size_t shard, std::size_t begin, std::size_t end) {
              for (std::size_t i = begin; i < end; ++i) {
                partial[shard].AddSequence(streams[i]);
              }
            });
  NGramCounts merged(order);
  for (const auto &p : partial) merged.Merge(p);
  return merged;
}

Smoothing FinishSmoothing(const NGramEstimator &draft,
                          const std::vector<std::vector<Symbol>> &heldout,
                          const TrainOptions &options) {
  Smoothing s = draft.smoothing();
  if (s.kind == Smoothing::Kind::kJelinekMercer && !heldout.empty()) {
    s.lambdas = TuneInterpolation(draft, heldout, options.em_iterations);
  }
  return s;
}

}  // namespace

std::string Smoothing::ToString() const {
  if (kind == Kind::kLaplace) return "laplace:" + FormatDouble(alpha);
  std::string out = "jm";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    out += (i == 0 ? ":" : ",") + FormatDouble(lambdas[i]);
  }
  return out;
}

Smoothing ParseSmoothing(std::string_view spec) {
  std::string_view head = spec.substr(0, spec.find(':'));
  std::string_view tail =
      spec.find(':') == std::string_view::npos ? "" : spec.substr(spec.find(':') + 1);
  try {
    if (head == "laplace") {
      Smoothing s =
          Smoothing::Laplace(tail.empty() ? 1.0 : std::stod(std::string(tail)));
      ValidateSmoothing(s, 1);
      return s;
    }
    if (head == "jm") {
      std::vector<double> lambdas;
      std::stringstream in{std::string(tail)};
      std::string item;
      while (std::getline(in, item, ',')) lambdas.push_back(std::stod(item));
      Smoothing s = Smoothing::JelinekMercer(std::move(lambdas));
      ValidateSmoothing(s, static_cast<int>(s.lambdas.size()));
      return s;
    }
  } catch (const std::logic_error &) {
    // Falls through to the error below.
  }
  Fail(ErrorCode::kConfigError, "bad smoothing spec '" + std::string(spec) + "'");
}

NGramCounts::NGramCounts(int order) : order_(order) {
  if (order < 1) Fail(ErrorCode::kInvalidOrder, "n-gram order must be >= 1");
  ngrams_.resize(order);
  contexts_.resize(order - 1);
}

void NGramCounts::AddSequence(std::span<const Symbol> symbols) {
  for (std::size_t t = 1; t < symbols.size(); ++t) {
    ++total_;
    std::size_t max_j = std::min<std::size_t>(order_, t + 1);
    for (std::size_t j = 1; j <= max_j; ++j) {
      auto window = symbols.subspan(t + 1 - j, j);
      ++ngrams_[j - 1][PackKey(window)];
      if (j >= 2) ++contexts_[j - 2][PackKey(window.first(j - 1))];
    }
  }
}

void NGramCounts::Merge(const NGramCounts &other) {
  if (other.order_ != order_) {
    Fail(ErrorCode::kInvalidOrder, "cannot merge counts of different order");
  }
  for (int j = 0; j < order_; ++j) {
    for (const auto &[k, c] : other.ngrams_[j]) ngrams_[j][k] += c;
  }
  for (int j = 0; j + 1 < order_; ++j) {
    for (const auto &[k, c] : other.contexts_[j]) contexts_[j][k] += c;
  }
  total_ += other.total_;
}

uint64_t NGramCounts::Count(std::span<const Symbol> ngram) const {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return 0;
  return Lookup(ngrams_[ngram.size() - 1], PackKey(ngram));
}

uint64_t NGramCounts::ContextCount(std::span<const Symbol> context) const {
  if (context.empty()) return total_;
  if (context.size() >= static_cast<std::size_t>(order_)) return 0;
  return Lookup(contexts_[context.size() - 1], PackKey(context));
}

std::vector<std::pair<std::vector<Symbol>, uint64_t>> NGramCounts::Entries(
    int n) const {
  std::vector<std::pair<std::string, uint64_t>> raw(ngrams_.at(n - 1).begin(),
                                                    ngrams_.at(n - 1).end());
  std::sort(raw.begin(), raw.end());
  std::vector<std::pair<std::vector<Symbol>, uint64_t>> out;
  out.reserve(raw.size());
  for (const auto &[k, c] : raw) out.emplace_back(UnpackKey(k), c);
  return out;
}

void NGramCounts::Set(std::span<const Symbol> ngram, uint64_t count) {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) {
    Fail(ErrorCode::kFormatError, "n-gram longer than model order");
  }
  ngrams_[ngram.size() - 1][PackKey(ngram)] = count;
  if (ngram.size() == 1) {
    total_ += count;
  } else {
    contexts_[ngram.size() - 2][PackKey(ngram.first(ngram.size() - 1))] += count;
  }
}

NGramEstimator::NGramEstimator(NGramCounts counts, Smoothing smoothing,
                               Symbol first_predicted, uint64_t predict_size)
    : counts_(std::move(counts)),
      smoothing_(std::move(smoothing)),
      first_predicted_(first_predicted),
      predict_size_(predict_size) {
  ValidateSmoothing(smoothing_, counts_.order());
  if (predict_size_ == 0) Fail(ErrorCode::kConfigError, "empty vocabulary");
}

std::vector<double> NGramEstimator::LevelProbs(std::span<const Symbol> history,
                                               Symbol w) const {
  const int n = counts_.order();
  const double v = static_cast<double>(predict_size_);
  std::vector<double> levels(n);
  Symbol unigram[1] = {w};
  levels[0] = (static_cast<double>(counts_.Count(unigram)) + 1.0) /
              (static_cast<double>(counts_.total()) + v);
  std::vector<Symbol> gram;
  for (int j = 2; j <= n; ++j) {
    levels[j - 1] = levels[j - 2];
    if (static_cast<std::size_t>(j - 1) > history.size()) continue;
    auto ctx = history.last(j - 1);
    uint64_t cc = counts_.ContextCount(ctx);
    if (cc == 0) continue;
    gram.assign(ctx.begin(), ctx.end());
    gram.push_back(w);
    levels[j - 1] = static_cast<double>(counts_.Count(gram)) /
                    static_cast<double>(cc);
  }
  return levels;
}

double NGramEstimator::Prob(std::span<const Symbol> history, Symbol w) const {
  const int n = counts_.order();
  if (smoothing_.kind == Smoothing::Kind::kLaplace) {
    std::size_t h = std::min<std::size_t>(n, history.size() + 1);
    auto ctx = history.last(h - 1);
    std::vector<Symbol> gram(ctx.begin(), ctx.end());
    gram.push_back(w);
    const double a = smoothing_.alpha;
    return (static_cast<double>(counts_.Count(gram)) + a) /
           (static_cast<double>(counts_.ContextCount(ctx)) +
            a * static_cast<double>(predict_size_));
  }
  auto levels = LevelProbs(history, w);
  double p = 0.0;
  for (int j = 0; j < n; ++j) {
    double lambda = smoothing_.lambdas.empty() ? 1.0 / n : smoothing_.lambdas[j];
    p += lambda * levels[j];
  }
  return p;
}

std::vector<double> TuneInterpolation(
    const NGramEstimator &estimator,
    const std::vector<std::vector<Symbol>> &heldout, int iterations) {
  const int n = estimator.counts().order();
  std::vector<double> lambdas = estimator.smoothing().lambdas;
  if (lambdas.empty()) lambdas.assign(n, 1.0 / n);
  std::vector<std::vector<double>> levels;
  for (const auto &seq : heldout) {
    std::span<const Symbol> s(seq);
    for (std::size_t t = 1; t < s.size(); ++t) {
      levels.push_back(estimator.LevelProbs(s.first(t), s[t]));
    }
  }
  if (levels.empty()) return lambdas;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> acc(n, 0.0);
    for (const auto &p : levels) {
      double mix = 0.0;
      for (int j = 0; j < n; ++j) mix += lambdas[j] * p[j];
      for (int j = 0; j < n; ++j) acc[j] += lambdas[j] * p[j] / mix;
    }
    double total = 0.0;
    for (double a : acc) total += a;
    for (int j = 0; j < n; ++j) lambdas[j] = acc[j] / total;
  }
  return lambdas;
}

std::vector<Symbol> NGramModel::PredictedSymbols() const {
  std::vector<Symbol> out(estimator_.predict_size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = estimator_.first_predicted() + static_cast<Symbol>(i);
  }
  return out;
}

std::vector<double> NGramModel::Distribution(
    std::span<const Symbol> history) const {
  std::vector<double> out;
  for (Symbol s : PredictedSymbols()) out.push_back(estimator_.Prob(history, s));
  return out;
}

std::string NGramModel::Serialize() const {
  std::string out;
  Writer w(&out);
  w.Bytes(kMagic, sizeof(kMagic));
  w.U32(kFormatVersion);
  w.U8(static_cast<uint8_t>(kind()));
  w.U8(direction_ == Direction::kForward ? 0 : 1);
  w.U32(static_cast<uint32_t>(order()));
  const Smoothing &s = smoothing();
  w.U8(static_cast<uint8_t>(s.kind));
  w.F64(s.alpha);
  w.U32(static_cast<uint32_t>(s.lambdas.size()));
  for (double l : s.lambdas) w.F64(l);
  w.Str(name_);
  SerializeVocab(&out);
  for (int j = 1; j <= order(); ++j) {
    auto entries = estimator_.counts().Entries(j);
    w.U64(entries.size());
    for (const auto &[gram, count] : entries) {
      for (Symbol sym : gram) w.U32(sym);
      w.U64(count);
    }
  }
  w.Bytes(kEndMagic, sizeof(kEndMagic));
  return out;
}

void NGramModel::Save(const std::string &path) const {
  WriteFile(path, Serialize());
}

std::string NGramModel::DumpText() const {
  std::ostringstream out;
  out << "# lmcr " << (kind() == Kind::kWord ? "word" : "char")
      << " n-gram counts order=" << order()
      << " direction=" << DirectionName(direction_)
      << " smoothing=" << smoothing().ToString() << "\n";
  for (int j = 1; j <= order(); ++j) {
    for (const auto &[gram, count] : estimator_.counts().Entries(j)) {
      out << j << '\t';
      for (std::size_t i = 0; i < gram.size(); ++i) {
        out << (i ? " " : "") << SymbolName(gram[i]);
      }
      out << '\t' << count << '\n';
    }
  }
  return out.str();
}

std::unique_ptr<NGramModel> NGramModel::Deserialize(std::string_view bytes) {
  Reader r(bytes);
  char magic[8];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    Fail(ErrorCode::kFormatError, "not an lmcr model file (bad magic)");
  }
  uint32_t version = r.U32();
  if (version != kFormatVersion) {
    Fail(ErrorCode::kFormatError,
         "unsupported model format version " + std::to_string(version));
  }
  uint8_t kind = r.U8();
  if (kind > 1) Fail(ErrorCode::kFormatError, "unknown model kind");
  uint8_t dir = r.U8();
  if (dir > 1) Fail(ErrorCode::kFormatError, "unknown direction");
  Direction direction = dir == 0 ? Direction::kForward : Direction::kBackward;
  uint32_t order = r.U32();
  if (order < 1 || order > 64) Fail(ErrorCode::kFormatError, "bad order");
  Smoothing smoothing;
  uint8_t skind = r.U8();
  if (skind > 1) Fail(ErrorCode::kFormatError, "unknown smoothing");
  smoothing.kind = static_cast<Smoothing::Kind>(skind);
  smoothing.alpha = r.F64();
  uint32_t nl = r.U32();
  if (nl > order) Fail(ErrorCode::kFormatError, "bad smoothing weights");
  for (uint32_t i = 0; i < nl; ++i) smoothing.lambdas.push_back(r.F64());
  std::string name = r.Str();

  Vocabulary vocab;
  std::vector<unsigned char> alphabet;
  std::size_t symbol_count;
  if (kind == 0) {
    uint32_t size = r.U32();
    if (size < 3) Fail(ErrorCode::kFormatError, "vocabulary lacks reserved tokens");
    for (uint32_t i = 0; i < size; ++i) {
      std::string token = r.Str();
      uint64_t count = r.U64();
      if (i < 3) {
        if (token != vocab.Token(i)) {
          Fail(ErrorCode::kFormatError, "reserved tokens out of place");
        }
        vocab.SetCount(i, count);
      } else if (vocab.Find(token) || vocab.Add(token, count) != i) {
        Fail(ErrorCode::kFormatError, "duplicate vocabulary entry");
      }
    }
    symbol_count = vocab.size();
  } else {
    uint32_t size = r.U32();
    if (size + 3 > CharNGramModel::kMaxSymbols) {
      Fail(ErrorCode::kFormatError, "character alphabet too large");
    }
    for (uint32_t i = 0; i < size; ++i) alphabet.push_back(r.U8());
    symbol_count = alphabet.size() + 3;
  }

  NGramCounts counts(static_cast<int>(order));
  std::vector<Symbol> gram;
  for (uint32_t j = 1; j <= order; ++j) {
    uint64_t entries = r.U64();
    if (entries > bytes.size()) Fail(ErrorCode::kFormatError, "truncated model file");
    for (uint64_t e = 0; e < entries; ++e) {
      gram.resize(j);
      for (auto &sym : gram) {
        sym = r.U32();
        if (sym >= symbol_count) Fail(ErrorCode::kFormatError, "symbol out of range");
      }
      counts.Set(gram, r.U64());
    }
  }
  char end[8];
  r.Bytes(end, sizeof(end));
  if (std::memcmp(end, kEndMagic, sizeof(end)) != 0 || !r.done()) {
    Fail(ErrorCode::kFormatError, "corrupt model trailer");
  }
  try {
    if (kind == 0) {
      NGramEstimator est(std::move(counts), smoothing, 1, vocab.size() - 1);
      return std::make_unique<WordNGramModel>(std::move(vocab), std::move(est),
                                              direction, name);
    }
    NGramEstimator est(std::move(counts), smoothing, 0, symbol_count);
    return std::make_unique<CharNGramModel>(std::move(alphabet), std::move(est),
                                            direction, name);
  } catch (const Error &e) {
    Fail(ErrorCode::kFormatError, e.what());
  }
}

std::unique_ptr<NGramModel> NGramModel::Load(const std::string &path) {
  return Deserialize(ReadFile(path));
}

WordNGramModel::WordNGramModel(Vocabulary vocab, NGramEstimator estimator,
                               Direction direction, std::string name)
    : NGramModel(std::move(estimator), direction, std::move(name)),
      vocab_(std::move(vocab)) {}

std::vector<Symbol> WordNGramModel::Encode(const TokenSequence &seq) const {
  std::vector<Symbol> ids;
  ids.reserve(seq.size());
  for (const auto &t : seq.tokens()) ids.push_back(vocab_.IdOrUnk(t));
  return ids;
}

std::vector<double> WordNGramModel::CondLogProbs(const TokenSequence &seq) const {
  auto ids = Encode(seq);
  std::span<const Symbol> s(ids);
  std::vector<double> out;
  out.reserve(ids.size() - 1);
  for (std::size_t t = 1; t < ids.size(); ++t) {
    out.push_back(std::log(estimator_.Prob(s.first(t), s[t])));
  }
  return out;
}

uint64_t WordNGramModel::UnigramCount(std::string_view token) const {
  return vocab_.Count(vocab_.IdOrUnk(token));
}

void WordNGramModel::SerializeVocab(std::string *out) const {
  Writer w(out);
  w.U32(static_cast<uint32_t>(vocab_.size()));
  for (Symbol i = 0; i < vocab_.size(); ++i) {
    w.Str(vocab_.Token(i));
    w.U64(vocab_.Count(i));
  }
}

CharNGramModel::CharNGramModel(std::vector<unsigned char> alphabet,
                               NGramEstimator estimator, Direction direction,
                               std::string name)
    : NGramModel(std::move(estimator), direction, std::move(name)),
      alphabet_(std::move(alphabet)) {
  index_.fill(-1);
  for (std::size_t i = 0; i < alphabet_.size(); ++i) {
    if (index_[alphabet_[i]] != -1) {
      Fail(ErrorCode::kFormatError, "duplicate character in alphabet");
    }
    index_[alphabet_[i]] = static_cast<int>(i);
  }
}

Symbol CharNGramModel::CharSymbol(unsigned char c) const {
  int i = index_[c];
  return i < 0 ? kUnknownChar : static_cast<Symbol>(i + 3);
}

std::string CharNGramModel::SymbolName(Symbol s) const {
  switch (s) {
    case kBoundary: return "<w>";
    case kEndOfSentence: return "</s>";
    case kUnknownChar: return "<unk>";
    default: return std::string(1, static_cast<char>(alphabet_.at(s - 3)));
  }
}

std::vector<Symbol> CharNGramModel::Encode(const TokenSequence &seq) const {
  std::vector<Symbol> out{kBoundary};
  for (const auto &word : seq.interior()) {
    for (unsigned char c : word) out.push_back(CharSymbol(c));
    out.push_back(kBoundary);
  }
  out.push_back(kEndOfSentence);
  return out;
}

double CharNGramModel::WordLogProb(std::span<const Symbol> history,
                                   std::string_view word) const {
  std::vector<Symbol> ctx(history.begin(), history.end());
  double total = 0.0;
  auto step = [&](Symbol s) {
    total += std::log(estimator_.Prob(ctx, s));
    ctx.push_back(s);
  };
  for (unsigned char c : word) step(CharSymbol(c));
  step(kBoundary);
  return total;
}

std::vector<double> CharNGramModel::CondLogProbs(const TokenSequence &seq) const {
  auto stream = Encode(seq);
  std::span<const Symbol> s(stream);
  std::vector<double> out;
  out.reserve(seq.size() - 1);
  std::size_t pos = 1;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    std::size_t len = t + 1 == seq.size() ? 1 : seq[t].size() + 1;
    double lp = 0.0;
    for (std::size_t k = 0; k < len; ++k, ++pos) {
      lp += std::log(estimator_.Prob(s.first(pos), s[pos]));
    }
    out.push_back(lp);
  }
  return out;
}

void CharNGramModel::SerializeVocab(std::string *out) const {
  Writer w(out);
  w.U32(static_cast<uint32_t>(alphabet_.size()));
  for (unsigned char c : alphabet_) w.U8(c);
}

std::unique_ptr<WordNGramModel> TrainWordNGram(
    std::span<const TokenSequence> corpus, const TrainOptions &options) {
  if (corpus.empty()) Fail(ErrorCode::kEmptyCorpus, "empty training corpus");
  if (options.order < 1) Fail(ErrorCode::kInvalidOrder, "order must be >= 1");
  ValidateSmoothing(options.smoothing, options.order);
  auto oriented = Oriented(corpus, options.direction);

  Vocabulary vocab = BuildVocab(oriented, options.max_vocab, options.min_count);
  std::vector<std::vector<Symbol>> streams;
  streams.reserve(oriented.size());
  for (const auto &seq : oriented) {
    std::vector<Symbol> ids;
    for (const auto &t : seq.tokens()) ids.push_back(vocab.IdOrUnk(t));
    streams.push_back(std::move(ids));
  }
  NGramCounts counts = CountSymbols(streams, options.order, options.threads);

  std::vector<std::vector<Symbol>> heldout;
  for (const auto &seq : Oriented(options.heldout, options.direction)) {
    std::vector<Symbol> ids;
    for (const auto &t : seq.tokens()) ids.push_back(vocab.IdOrUnk(t));
    heldout.push_back(std::move(ids));
  }
  NGramEstimator draft(counts, options.smoothing, 1, vocab.size() - 1);
  Smoothing smoothing = FinishSmoothing(draft, heldout, options);
  NGramEstimator est(std::move(counts), smoothing, 1, vocab.size() - 1);
  std::string name = options.name.empty()
                         ? "word" + std::to_string(options.order) + "-" +
                               std::string(DirectionName(options.direction))
                         : options.name;
  return std::make_unique<WordNGramModel>(std::move(vocab), std::move(est),
                                          options.direction, std::move(name));
}

std::unique_ptr<CharNGramModel> TrainCharNGram(
    std::span<const TokenSequence> corpus, const TrainOptions &options) {
  if (corpus.empty()) Fail(ErrorCode::kEmptyCorpus, "empty training corpus");
  if (options.order < 1) Fail(ErrorCode::kInvalidOrder, "order must be >= 1");
  ValidateSmoothing(options.smoothing, options.order);
  auto oriented = Oriented(corpus, options.direction);

  std::array<uint64_t, 256> freq{};
  for (const auto &seq : oriented) {
    for (const auto &word : seq.interior()) {
      for (unsigned char c : word) ++freq[c];
    }
  }
  std::vector<unsigned char> seen;
  for (int c = 0; c < 256; ++c) {
    if (freq[c] > 0) seen.push_back(static_cast<unsigned char>(c));
  }
  const std::size_t room = CharNGramModel::kMaxSymbols - 3;
  if (seen.size() > room) {
    std::stable_sort(seen.begin(), seen.end(), [&](unsigned char a, unsigned char b) {
      return freq[a] > freq[b];
    });
    seen.resize(room);
    std::sort(seen.begin(), seen.end());
  }
  // The alphabet alone fixes the symbol mapping; counts come after.
  CharNGramModel mapper(seen, NGramEstimator(NGramCounts(1), Smoothing::Laplace(1.0), 0, 1),
                        options.direction, "");
  std::vector<std::vector<Symbol>> streams;
  for (const auto &seq : oriented) streams.push_back(mapper.Encode(seq));
  NGramCounts counts = CountSymbols(streams, options.order, options.threads);

  std::vector<std::vector<Symbol>> heldout;
  for (const auto &seq : Oriented(options.heldout, options.direction)) {
    heldout.push_back(mapper.Encode(seq));
  }
  const uint64_t symbols = seen.size() + 3;
  NGramEstimator draft(counts, options.smoothing, 0, symbols);
  Smoothing smoothing = FinishSmoothing(draft, heldout, options);
  NGramEstimator est(std::move(counts), smoothing, 0, symbols);
  std::string name = options.name.empty()
                         ? "char" + std::to_string(options.order) + "-" +
                               std::string(DirectionName(options.direction))
                         : options.name;
  return std::make_unique<CharNGramModel>(std::move(seen), std::move(est),
                                          options.direction, std::move(name));
}

std::vector<TokenSequence> ParseCorpus(std::string_view text,
                                       const TokenizePolicy &policy) {
  std::vector<TokenSequence> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto words = TokenizeWords(text.substr(pos, nl - pos), policy);
    if (!words.empty()) out.push_back(TokenSequence::FromInterior(std::move(words)));
    pos = nl + 1;
  }
  return out;
}

std::vector<TokenSequence> ReadCorpus(const std::string &path,
                                      const TokenizePolicy &policy) {
  return ParseCorpus(ReadFile(path), policy);
}

}  // namespace lmcr
