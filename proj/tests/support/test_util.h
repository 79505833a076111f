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

#ifndef LMCR_TESTS_SUPPORT_TEST_UTIL_H_
#define LMCR_TESTS_SUPPORT_TEST_UTIL_H_

#include <filesystem>
#include <functional>
#include <ostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lmcr/dataset.h"
#include "lmcr/status.h"
#include "lmcr/text.h"

namespace lmcr {

inline void PrintTo(ErrorCode code, std::ostream *os) { *os << ErrorCodeName(code); }

}  // namespace lmcr

namespace lmcr::testing {

// A fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::string File(const std::string &name) const { return (path_ / name).string(); }
  // Writes `content` to `name` and returns the full path.
  std::string Write(const std::string &name, const std::string &content) const;

 private:
  std::filesystem::path path_;
};

std::string Slurp(const std::string &path);

// The code of the lmcr::Error thrown by `fn`, or nothing.
std::optional<ErrorCode> CodeOf(const std::function<void()> &fn);

// Random material for property tests over a small fixed word list.
class RandomText {
 public:
  explicit RandomText(uint32_t seed) : rng_(seed) {}

  std::mt19937 &rng() { return rng_; }
  int Uniform(int lo, int hi);
  std::string Word();
  std::vector<std::string> Words(int lo, int hi);
  std::string Sentence(int lo, int hi);
  std::vector<TokenSequence> Corpus(int sentences);
  // Two or three candidates, optional text around the pronoun, a pronoun
  // that is sometimes possessive, and a random gold answer.
  SchemaQuestion Question(const std::string &id);

 private:
  std::mt19937 rng_;
};

std::vector<std::vector<std::string>> Interiors(const std::vector<TokenSequence> &corpus);

}  // namespace lmcr::testing

#endif  // LMCR_TESTS_SUPPORT_TEST_UTIL_H_
