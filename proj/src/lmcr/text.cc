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

#include "lmcr/text.h"

#include <algorithm>
#include <cctype>

#include "lmcr/status.h"

namespace lmcr {
namespace {

bool IsReserved(std::string_view token) {
  return token == kBos || token == kEos;
}

bool IsDetachable(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')':
      return true;
    default:
      return false;
  }
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

void ValidateTokens(const std::vector<std::string> &interior) {
  for (const auto &token : interior) {
    if (token.empty()) Fail(ErrorCode::kInvalidArgument, "empty token");
    if (IsReserved(token)) {
      Fail(ErrorCode::kInvalidArgument,
           "reserved marker inside sentence: " + token);
    }
  }
}

// Splits one whitespace-free chunk, detaching punctuation. An apostrophe
// with word characters on both sides stays inside the word.
void SplitChunk(const std::string &chunk, std::vector<std::string> *out) {
  std::string word;
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    char c = chunk[i];
    if (!IsDetachable(c)) {
      word.push_back(c);
      continue;
    }
    if (c == '\'' && !word.empty() && i + 1 < chunk.size() &&
        !IsDetachable(chunk[i + 1])) {
      word.push_back(c);
      continue;
    }
    if (!word.empty()) out->push_back(std::move(word));
    word.clear();
    out->emplace_back(1, c);
  }
  if (!word.empty()) out->push_back(std::move(word));
}

}  // namespace

TokenSequence::TokenSequence()
    : tokens_{std::string(kBos), std::string(kEos)} {}

TokenSequence TokenSequence::FromInterior(std::vector<std::string> interior) {
  ValidateTokens(interior);
  std::vector<std::string> tokens;
  tokens.reserve(interior.size() + 2);
  tokens.emplace_back(kBos);
  for (auto &t : interior) tokens.push_back(std::move(t));
  tokens.emplace_back(kEos);
  return TokenSequence(std::move(tokens));
}

TokenSequence TokenSequence::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens.front() != kBos || tokens.back() != kEos) {
    Fail(ErrorCode::kInvalidArgument,
         "token sequence must start with <s> and end with </s>");
  }
  std::vector<std::string> interior(tokens.begin() + 1, tokens.end() - 1);
  return FromInterior(std::move(interior));
}

std::string TokenSequence::Join() const {
  std::string out;
  for (const auto &t : interior()) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool IsValidUtf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    int extra;
    uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (int k = 1; k <= extra; ++k) {
      unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::vector<std::string> TokenizeWords(std::string_view raw,
                                       const TokenizePolicy &policy) {
  if (!IsValidUtf8(raw)) Fail(ErrorCode::kInvalidArgument, "invalid UTF-8");
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && IsSpace(raw[i])) ++i;
    std::size_t start = i;
    while (i < raw.size() && !IsSpace(raw[i])) ++i;
    if (start == i) continue;
    std::string chunk(raw.substr(start, i - start));
    if (policy.lowercase) {
      for (char &c : chunk) {
        if (static_cast<unsigned char>(c) < 0x80) {
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
      }
    }
    if (policy.detach_punct) {
      SplitChunk(chunk, &out);
    } else {
      out.push_back(std::move(chunk));
    }
  }
  ValidateTokens(out);
  return out;
}

TokenSequence Tokenize(std::string_view raw, const TokenizePolicy &policy) {
  auto words = TokenizeWords(raw, policy);
  if (words.empty()) Fail(ErrorCode::kEmptyText, "no tokens in text");
  return TokenSequence::FromInterior(std::move(words));
}

TokenSequence Reverse(const TokenSequence &seq) {
  std::vector<std::string> interior(seq.interior().rbegin(),
                                    seq.interior().rend());
  return TokenSequence::FromInterior(std::move(interior));
}

uint64_t NGramMultiset::Count(std::string_view key) const {
  auto it = entries_.find(std::string(key));
  return it == entries_.end() ? 0 : it->second;
}

void NGramMultiset::Add(const std::string &key, uint64_t count) {
  if (count == 0) return;
  entries_[key] += count;
  total_ += count;
}

void NGramMultiset::Merge(const NGramMultiset &other) {
  if (other.order_ != order_) {
    Fail(ErrorCode::kInvalidOrder, "cannot merge n-gram sets of different order");
  }
  for (const auto &[key, count] : other.entries_) Add(key, count);
}

std::string JoinNGram(std::span<const std::string> window) {
  std::string key;
  for (const auto &t : window) {
    if (!key.empty()) key.push_back(' ');
    key += t;
  }
  return key;
}

NGramMultiset ExtractNGrams(const TokenSequence &seq, int n,
                            bool include_markers) {
  if (n < 1) Fail(ErrorCode::kInvalidOrder, "n-gram order must be >= 1");
  std::span<const std::string> tokens =
      include_markers ? std::span<const std::string>(seq.tokens())
                      : seq.interior();
  NGramMultiset out(n);
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    out.Add(JoinNGram(tokens.subspan(i, order)));
  }
  return out;
}

void TokenCounts::Add(const TokenSequence &seq) {
  for (const auto &t : seq.tokens()) ++counts_[t];
  ++sequences_;
}

void TokenCounts::Merge(const TokenCounts &other) {
  for (const auto &[token, count] : other.counts_) counts_[token] += count;
  sequences_ += other.sequences_;
}

Vocabulary::Vocabulary() {
  Add(std::string(kBos), 0);
  Add(std::string(kEos), 0);
  Add(std::string(kUnk), 0);
}

std::optional<Vocabulary::Id> Vocabulary::Find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Vocabulary::Id Vocabulary::IdOrUnk(std::string_view token) const {
  return Find(token).value_or(kUnkId);
}

Vocabulary::Id Vocabulary::Add(const std::string &token, uint64_t count) {
  if (auto existing = Find(token)) return *existing;
  Id id = static_cast<Id>(tokens_.size());
  tokens_.push_back(token);
  counts_.push_back(count);
  ids_.emplace(token, id);
  return id;
}

Vocabulary BuildVocab(const TokenCounts &counts,
                      std::optional<std::size_t> max_size,
                      uint64_t min_count) {
  if (counts.sequences() == 0) Fail(ErrorCode::kEmptyCorpus, "empty corpus");
  std::vector<std::pair<std::string, uint64_t>> entries;
  uint64_t unk = 0;
  for (const auto &[token, count] : counts.counts()) {
    if (token == kBos || token == kEos) continue;
    if (token == kUnk) {
      unk += count;
      continue;
    }
    entries.emplace_back(token, count);
  }
  std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  std::size_t kept = 0;
  for (const auto &[token, count] : entries) {
    bool fits = !max_size.has_value() || kept < *max_size;
    if (fits && count >= min_count) {
      vocab.Add(token, count);
      ++kept;
    } else {
      unk += count;
    }
  }
  auto marker_count = [&](std::string_view marker) -> uint64_t {
    auto it = counts.counts().find(std::string(marker));
    return it == counts.counts().end() ? 0 : it->second;
  };
  vocab.SetCount(Vocabulary::kBosId, marker_count(kBos));
  vocab.SetCount(Vocabulary::kEosId, marker_count(kEos));
  vocab.SetCount(Vocabulary::kUnkId, unk);
  return vocab;
}

Vocabulary BuildVocab(std::span<const TokenSequence> corpus,
                      std::optional<std::size_t> max_size,
                      uint64_t min_count) {
  TokenCounts counts;
  for (const auto &seq : corpus) counts.Add(seq);
  return BuildVocab(counts, max_size, min_count);
}

}  // namespace lmcr
