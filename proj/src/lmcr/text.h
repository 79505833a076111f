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

#ifndef LMCR_TEXT_H_
#define LMCR_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lmcr {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

struct TokenizePolicy {
  bool lowercase = true;
  bool detach_punct = true;
};

// Word tokens of one sentence, always wrapped as [<s>, w_1 .. w_n, </s>].
class TokenSequence {
 public:
  TokenSequence();

  // Wraps `interior` in sentence markers. Throws kInvalidArgument on empty or
  // reserved tokens.
  static TokenSequence FromInterior(std::vector<std::string> interior);
  // Validates a full marker-delimited token list.
  static TokenSequence FromTokens(std::vector<std::string> tokens);

  const std::vector<std::string> &tokens() const { return tokens_; }
  std::span<const std::string> interior() const {
    return std::span<const std::string>(tokens_).subspan(1, tokens_.size() - 2);
  }
  std::size_t size() const { return tokens_.size(); }
  const std::string &operator[](std::size_t i) const { return tokens_[i]; }

  // Interior tokens joined by single spaces.
  std::string Join() const;

  friend bool operator==(const TokenSequence &, const TokenSequence &) = default;

 private:
  explicit TokenSequence(std::vector<std::string> tokens)
      : tokens_(std::move(tokens)) {}

  std::vector<std::string> tokens_;
};

bool IsValidUtf8(std::string_view text);

// Splits raw text into word tokens without sentence markers. May return an
// empty list; callers decide whether that is an error.
std::vector<std::string> TokenizeWords(std::string_view raw,
                                       const TokenizePolicy &policy = {});

// Throws kEmptyText when the text has no tokens.
TokenSequence Tokenize(std::string_view raw, const TokenizePolicy &policy = {});

// Reverses interior tokens; markers stay at the ends.
TokenSequence Reverse(const TokenSequence &seq);

// Multiset of order-n windows. Keys are the window tokens joined by a single
// space (tokens never contain whitespace).
class NGramMultiset {
 public:
  explicit NGramMultiset(int order = 1) : order_(order) {}

  int order() const { return order_; }
  const std::unordered_map<std::string, uint64_t> &entries() const {
    return entries_;
  }
  uint64_t Count(std::string_view key) const;
  uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }

  void Add(const std::string &key, uint64_t count = 1);
  void Merge(const NGramMultiset &other);

 private:
  int order_;
  std::unordered_map<std::string, uint64_t> entries_;
  uint64_t total_ = 0;
};

std::string JoinNGram(std::span<const std::string> window);

// Windows over the interior tokens, or over the whole sequence when
// `include_markers` is set. Throws kInvalidOrder for n < 1.
NGramMultiset ExtractNGrams(const TokenSequence &seq, int n,
                            bool include_markers = false);

// Token frequency table; shards merge associatively.
class TokenCounts {
 public:
  void Add(const TokenSequence &seq);
  void Merge(const TokenCounts &other);
  const std::unordered_map<std::string, uint64_t> &counts() const {
    return counts_;
  }
  uint64_t sequences() const { return sequences_; }

 private:
  std::unordered_map<std::string, uint64_t> counts_;
  uint64_t sequences_ = 0;
};

class Vocabulary {
 public:
  using Id = uint32_t;
  static constexpr Id kBosId = 0;
  static constexpr Id kEosId = 1;
  static constexpr Id kUnkId = 2;

  // Only the reserved tokens, with zero counts.
  Vocabulary();

  std::size_t size() const { return tokens_.size(); }
  std::optional<Id> Find(std::string_view token) const;
  Id IdOrUnk(std::string_view token) const;
  const std::string &Token(Id id) const { return tokens_.at(id); }
  uint64_t Count(Id id) const { return counts_.at(id); }

  // Appends a token; returns its id. Existing tokens are left untouched.
  Id Add(const std::string &token, uint64_t count);
  void SetCount(Id id, uint64_t count) { counts_.at(id) = count; }

 private:
  std::vector<std::string> tokens_;
  std::vector<uint64_t> counts_;
  std::unordered_map<std::string, Id> ids_;
};

// Keeps the `max_size` most frequent non-reserved tokens (ties broken
// lexicographically) with count >= min_count. Tokens that do not make the
// cut are folded into the <unk> count. Throws kEmptyCorpus.
Vocabulary BuildVocab(const TokenCounts &counts,
                      std::optional<std::size_t> max_size,
                      uint64_t min_count);
Vocabulary BuildVocab(std::span<const TokenSequence> corpus,
                      std::optional<std::size_t> max_size,
                      uint64_t min_count);

}  // namespace lmcr

#endif  // LMCR_TEXT_H_
