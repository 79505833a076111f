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

#ifndef LMCR_NGRAM_MODEL_H_
#define LMCR_NGRAM_MODEL_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmcr/scorer.h"
#include "lmcr/text.h"

namespace lmcr {

using Symbol = uint32_t;

struct Smoothing {
  enum class Kind : uint8_t { kLaplace = 0, kJelinekMercer = 1 };

  Kind kind = Kind::kJelinekMercer;
  // Additive constant for Laplace.
  double alpha = 1.0;
  // Jelinek-Mercer weight of each order, lowest first. Empty means uniform.
  std::vector<double> lambdas;

  static Smoothing Laplace(double alpha) { return {Kind::kLaplace, alpha, {}}; }
  static Smoothing JelinekMercer(std::vector<double> lambdas = {}) {
    return {Kind::kJelinekMercer, 0.0, std::move(lambdas)};
  }

  std::string ToString() const;
  friend bool operator==(const Smoothing &, const Smoothing &) = default;
};

// "laplace:0.5", "jm", or "jm:0.2,0.3,0.5".
Smoothing ParseSmoothing(std::string_view spec);

// Occurrence counts of every n-gram of orders 1..n over integer symbols,
// plus the matching context totals. Windows never reach before the start
// of a sequence, so positions near the start contribute lower orders only.
class NGramCounts {
 public:
  explicit NGramCounts(int order);

  int order() const { return order_; }
  // Counts the windows ending at each position >= 1 (position 0 is the
  // start marker and is only ever context).
  void AddSequence(std::span<const Symbol> symbols);
  void Merge(const NGramCounts &other);

  // 1 <= ngram.size() <= order.
  uint64_t Count(std::span<const Symbol> ngram) const;
  // 0 <= context.size() < order; the empty context yields the number of
  // predicted positions.
  uint64_t ContextCount(std::span<const Symbol> context) const;
  uint64_t total() const { return total_; }

  // Entries of one order as (symbols, count), sorted for stable output.
  std::vector<std::pair<std::vector<Symbol>, uint64_t>> Entries(int n) const;
  // Loader path: records an n-gram count and its context total.
  void Set(std::span<const Symbol> ngram, uint64_t count);

  friend bool operator==(const NGramCounts &, const NGramCounts &) = default;

 private:
  int order_;
  // Index j holds the (j+1)-grams, keyed by packed symbols.
  std::vector<std::unordered_map<std::string, uint64_t>> ngrams_;
  // Index j holds contexts of length j+1.
  std::vector<std::unordered_map<std::string, uint64_t>> contexts_;
  uint64_t total_ = 0;
};

// Conditional probabilities P(w | history) from counts and a smoothing rule.
// The predicted symbol set is [first_predicted, first_predicted + size).
class NGramEstimator {
 public:
  NGramEstimator(NGramCounts counts, Smoothing smoothing,
                 Symbol first_predicted, uint64_t predict_size);

  const NGramCounts &counts() const { return counts_; }
  const Smoothing &smoothing() const { return smoothing_; }
  Symbol first_predicted() const { return first_predicted_; }
  uint64_t predict_size() const { return predict_size_; }

  // `history` is every symbol before w, starting with the start marker.
  double Prob(std::span<const Symbol> history, Symbol w) const;
  // Per-order component distributions used by Jelinek-Mercer; each one is
  // normalized on its own.
  std::vector<double> LevelProbs(std::span<const Symbol> history,
                                 Symbol w) const;

 private:
  NGramCounts counts_;
  Smoothing smoothing_;
  Symbol first_predicted_;
  uint64_t predict_size_;
};

class NGramModel : public Scorer {
 public:
  enum class Kind : uint8_t { kWord = 0, kChar = 1 };

  virtual Kind kind() const = 0;
  int order() const { return estimator_.counts().order(); }
  const Smoothing &smoothing() const { return estimator_.smoothing(); }
  const NGramEstimator &estimator() const { return estimator_; }

  Direction direction() const override { return direction_; }
  std::string name() const override { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  std::optional<uint64_t> vocab_size() const override {
    return estimator_.predict_size();
  }

  std::vector<Symbol> PredictedSymbols() const;
  // P(. | history) over PredictedSymbols(), in that order.
  std::vector<double> Distribution(std::span<const Symbol> history) const;
  virtual std::string SymbolName(Symbol s) const = 0;

  std::string Serialize() const;
  void Save(const std::string &path) const;
  // ARPA-like debug listing: "order<TAB>n-gram<TAB>count" per line.
  std::string DumpText() const;

  // Throws kFormatError on bad magic, version, or truncation.
  static std::unique_ptr<NGramModel> Deserialize(std::string_view bytes);
  static std::unique_ptr<NGramModel> Load(const std::string &path);

 protected:
  NGramModel(NGramEstimator estimator, Direction direction, std::string name)
      : estimator_(std::move(estimator)),
        direction_(direction),
        name_(std::move(name)) {}

  virtual void SerializeVocab(std::string *out) const = 0;

  NGramEstimator estimator_;
  Direction direction_;
  std::string name_;
};

struct TrainOptions {
  int order = 3;
  Smoothing smoothing = Smoothing::JelinekMercer();
  Direction direction = Direction::kForward;
  // Word models only.
  std::optional<std::size_t> max_vocab;
  uint64_t min_count = 1;
  // Held-out text for tuning Jelinek-Mercer weights; empty keeps the given
  // (or uniform) weights.
  std::span<const TokenSequence> heldout;
  int em_iterations = 20;
  int threads = 1;
  std::string name;
};

class WordNGramModel : public NGramModel, public UnigramCounter {
 public:
  WordNGramModel(Vocabulary vocab, NGramEstimator estimator,
                 Direction direction, std::string name);

  Kind kind() const override { return Kind::kWord; }
  const Vocabulary &vocab() const { return vocab_; }

  std::vector<double> CondLogProbs(const TokenSequence &seq) const override;
  // Corpus frequency; unknown tokens report the aggregate <unk> count.
  uint64_t UnigramCount(std::string_view token) const override;
  std::string SymbolName(Symbol s) const override { return vocab_.Token(s); }

  std::vector<Symbol> Encode(const TokenSequence &seq) const;

 private:
  void SerializeVocab(std::string *out) const override;

  Vocabulary vocab_;
};

// Character model that scores whole words: a word's log-probability is the
// sum over its bytes plus the trailing word-boundary symbol. The sentence
// start acts as a boundary and the sentence end has its own symbol.
class CharNGramModel : public NGramModel {
 public:
  static constexpr Symbol kBoundary = 0;
  static constexpr Symbol kEndOfSentence = 1;
  static constexpr Symbol kUnknownChar = 2;
  static constexpr std::size_t kMaxSymbols = 256;

  // `alphabet` lists the byte of each symbol from 3 upwards.
  CharNGramModel(std::vector<unsigned char> alphabet, NGramEstimator estimator,
                 Direction direction, std::string name);

  Kind kind() const override { return Kind::kChar; }
  const std::vector<unsigned char> &alphabet() const { return alphabet_; }

  std::vector<double> CondLogProbs(const TokenSequence &seq) const override;
  std::string SymbolName(Symbol s) const override;

  Symbol CharSymbol(unsigned char c) const;
  // The full symbol stream of a sentence.
  std::vector<Symbol> Encode(const TokenSequence &seq) const;
  // log P(word | symbols so far), including the boundary.
  double WordLogProb(std::span<const Symbol> history,
                     std::string_view word) const;

 private:
  void SerializeVocab(std::string *out) const override;

  std::vector<unsigned char> alphabet_;
  std::array<int, 256> index_;
};

// Counts `corpus` (reversed first for backward models). Throws kEmptyCorpus,
// kInvalidOrder and kConfigError for bad smoothing parameters.
std::unique_ptr<WordNGramModel> TrainWordNGram(
    std::span<const TokenSequence> corpus, const TrainOptions &options);
std::unique_ptr<CharNGramModel> TrainCharNGram(
    std::span<const TokenSequence> corpus, const TrainOptions &options);

// Expectation-maximization of Jelinek-Mercer weights on held-out text.
std::vector<double> TuneInterpolation(const NGramEstimator &estimator,
                                      const std::vector<std::vector<Symbol>> &heldout,
                                      int iterations);

// One sentence per non-empty line.
std::vector<TokenSequence> ReadCorpus(const std::string &path,
                                      const TokenizePolicy &policy);
std::vector<TokenSequence> ParseCorpus(std::string_view text,
                                       const TokenizePolicy &policy);

}  // namespace lmcr

#endif  // LMCR_NGRAM_MODEL_H_
