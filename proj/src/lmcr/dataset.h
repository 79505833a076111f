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

#ifndef LMCR_DATASET_H_
#define LMCR_DATASET_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmcr/text.h"

namespace lmcr {

// Half-open token index range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const TokenSpan &, const TokenSpan &) = default;
};

// One pronoun-resolution question. `text` and `candidate_texts` keep the
// surface form; `tokens` and `candidates` are their tokenizations.
struct SchemaQuestion {
  std::string id;
  std::string text;
  TokenSequence tokens;
  TokenSpan pronoun;
  std::vector<std::string> candidate_texts;
  std::vector<std::vector<std::string>> candidates;
  std::optional<std::size_t> gold;
  std::optional<std::size_t> special_word;

  friend bool operator==(const SchemaQuestion &,
                         const SchemaQuestion &) = default;
};

struct QuestionSet {
  std::string name;
  std::vector<SchemaQuestion> questions;

  friend bool operator==(const QuestionSet &, const QuestionSet &) = default;
};

// Human-readable invariant violations; empty when the question is valid.
std::vector<std::string> Validate(const SchemaQuestion &q);

// Tokenizes `text` and the candidates and validates the result. Throws
// kSchemaError naming the question id on any violation.
SchemaQuestion MakeQuestion(std::string id, std::string text,
                            TokenSpan pronoun,
                            std::vector<std::string> candidate_texts,
                            std::optional<std::size_t> gold,
                            std::optional<std::size_t> special_word,
                            const TokenizePolicy &policy);

// Builds a question from the three fragments around the pronoun, joined by
// single spaces so the pronoun span can be computed fragment by fragment.
SchemaQuestion MakeQuestionFromFragments(
    std::string id, std::string_view before, std::string_view pronoun,
    std::string_view after, std::vector<std::string> candidate_texts,
    std::optional<std::size_t> gold, const TokenizePolicy &policy);

// Element names of the XML question format. Defaults follow the public
// WSCollection/PDP files.
struct XmlLayout {
  std::string schema = "schema";
  std::string text = "text";
  std::string before = "txt1";
  std::string pronoun = "pron";
  std::string after = "txt2";
  std::string answers = "answers";
  std::string answer = "answer";
  std::string correct = "correctAnswer";
  std::string id_attribute = "id";
  // Optional element holding the special word; empty disables it.
  std::string special_word;
};

// Schemas without an id attribute get "<name>-<1-based index>".
QuestionSet ImportXml(std::string_view document, const XmlLayout &layout,
                      const TokenizePolicy &policy, std::string name);
QuestionSet ImportXmlFile(const std::string &path, const XmlLayout &layout,
                          const TokenizePolicy &policy);

QuestionSet ParseJsonl(std::string_view content, std::string name,
                       const TokenizePolicy &policy);
QuestionSet ImportJsonl(const std::string &path, const TokenizePolicy &policy);
std::string ToJsonl(const QuestionSet &set);
void ExportJsonl(const QuestionSet &set, const std::string &path);

// Dispatches on the file extension (.xml, otherwise JSON lines).
QuestionSet LoadQuestionSet(const std::string &path,
                            const TokenizePolicy &policy,
                            const XmlLayout &layout = {});

// e.g. PDP-122 = PDP-60 followed by the 62 development questions.
QuestionSet Concat(const QuestionSet &a, const QuestionSet &b,
                   std::string name);

// Throws kDuplicateId / kEmptyDataset.
void CheckQuestionSet(const QuestionSet &set);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view content);
std::string FileStem(const std::string &path);

}  // namespace lmcr

#endif  // LMCR_DATASET_H_
