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

#include "lmcr/dataset.h"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json.hpp"
#include "lmcr/status.h"

namespace lmcr {
namespace {

using boost::property_tree::ptree;
using ordered_json = nlohmann::ordered_json;

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void FailSchema(const std::string &id, const std::string &what) {
  Fail(ErrorCode::kSchemaError, "question '" + id + "': " + what);
}

void CollectSchemas(const ptree &node, const std::string &name,
                    std::vector<const ptree *> *out) {
  for (const auto &[key, child] : node) {
    if (key == name) {
      out->push_back(&child);
    } else if (key != "<xmlattr>" && key != "<xmlcomment>") {
      CollectSchemas(child, name, out);
    }
  }
}

std::optional<std::size_t> AnswerIndex(const std::string &id,
                                       const std::string &raw,
                                       std::size_t num_answers) {
  std::string letter = Trim(raw);
  while (!letter.empty() && letter.back() == '.') letter.pop_back();
  letter = Trim(letter);
  if (letter.size() != 1 ||
      !std::isalpha(static_cast<unsigned char>(letter[0]))) {
    FailSchema(id, "unrecognized correct answer '" + raw + "'");
  }
  std::size_t index =
      static_cast<std::size_t>(std::toupper(letter[0]) - 'A');
  if (index >= num_answers) {
    FailSchema(id, "correct answer '" + letter + "' has no matching answer");
  }
  return index;
}

std::optional<std::size_t> FindSpecialWord(const std::string &id,
                                           const TokenSequence &tokens,
                                           const TokenSpan &pronoun,
                                           const std::string &word,
                                           const TokenizePolicy &policy) {
  auto words = TokenizeWords(word, policy);
  if (words.size() != 1) FailSchema(id, "special word must be one token");
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    if (i >= pronoun.start && i < pronoun.end) continue;
    if (tokens[i] == words[0]) return i;
  }
  FailSchema(id, "special word '" + word + "' not found in sentence");
}

}  // namespace

std::vector<std::string> Validate(const SchemaQuestion &q) {
  std::vector<std::string> diags;
  const std::size_t n = q.tokens.size();
  if (n < 3) diags.emplace_back("sentence has no words");
  if (!(q.pronoun.start > 0 && q.pronoun.start < q.pronoun.end &&
        q.pronoun.end <= n - 1)) {
    diags.emplace_back("pronoun span must be non-empty and strictly interior");
  }
  if (q.candidates.size() < 2) diags.emplace_back("needs ≥2 candidates");
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    if (q.candidates[i].empty()) {
      diags.push_back("candidate " + std::to_string(i) + " is empty");
    }
  }
  if (q.candidate_texts.size() != q.candidates.size()) {
    diags.emplace_back("candidate texts and tokens differ in number");
  }
  if (q.gold && *q.gold >= q.candidates.size()) {
    diags.emplace_back("gold_index out of range");
  }
  if (q.special_word && (*q.special_word == 0 || *q.special_word >= n - 1)) {
    diags.emplace_back("special_word_index out of range");
  }
  return diags;
}

SchemaQuestion MakeQuestion(std::string id, std::string text,
                            TokenSpan pronoun,
                            std::vector<std::string> candidate_texts,
                            std::optional<std::size_t> gold,
                            std::optional<std::size_t> special_word,
                            const TokenizePolicy &policy) {
  SchemaQuestion q;
  q.id = std::move(id);
  try {
    q.tokens = Tokenize(text, policy);
    for (const auto &c : candidate_texts) {
      q.candidates.push_back(TokenizeWords(c, policy));
    }
  } catch (const Error &e) {
    FailSchema(q.id, e.what());
  }
  q.text = std::move(text);
  q.pronoun = pronoun;
  q.candidate_texts = std::move(candidate_texts);
  q.gold = gold;
  q.special_word = special_word;
  auto diags = Validate(q);
  if (!diags.empty()) {
    std::string joined;
    for (const auto &d : diags) joined += (joined.empty() ? "" : "; ") + d;
    FailSchema(q.id, joined);
  }
  return q;
}

SchemaQuestion MakeQuestionFromFragments(
    std::string id, std::string_view before, std::string_view pronoun,
    std::string_view after, std::vector<std::string> candidate_texts,
    std::optional<std::size_t> gold, const TokenizePolicy &policy) {
  std::size_t before_len = 0, pronoun_len = 0;
  try {
    before_len = TokenizeWords(before, policy).size();
    pronoun_len = TokenizeWords(pronoun, policy).size();
  } catch (const Error &e) {
    FailSchema(id, e.what());
  }
  if (pronoun_len == 0) FailSchema(id, "empty pronoun");
  std::string text;
  for (std::string_view part : {before, pronoun, after}) {
    std::string trimmed = Trim(part);
    if (trimmed.empty()) continue;
    if (!text.empty()) text.push_back(' ');
    text += trimmed;
  }
  TokenSpan span{1 + before_len, 1 + before_len + pronoun_len};
  return MakeQuestion(std::move(id), std::move(text), span,
                      std::move(candidate_texts), gold, std::nullopt, policy);
}

void CheckQuestionSet(const QuestionSet &set) {
  if (set.questions.empty()) {
    Fail(ErrorCode::kEmptyDataset, "question set '" + set.name + "' is empty");
  }
  std::set<std::string_view> seen;
  for (const auto &q : set.questions) {
    if (!seen.insert(q.id).second) {
      Fail(ErrorCode::kDuplicateId, "duplicate question id '" + q.id + "'");
    }
  }
}

QuestionSet ImportXml(std::string_view document, const XmlLayout &layout,
                      const TokenizePolicy &policy, std::string name) {
  ptree root;
  try {
    std::istringstream in{std::string(document)};
    boost::property_tree::read_xml(
        in, root, boost::property_tree::xml_parser::trim_whitespace);
  } catch (const boost::property_tree::xml_parser_error &e) {
    Fail(ErrorCode::kParseError, "XML line " + std::to_string(e.line()) +
                                     ": " + e.message());
  }
  std::vector<const ptree *> schemas;
  CollectSchemas(root, layout.schema, &schemas);

  QuestionSet set{std::move(name), {}};
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    const ptree &schema = *schemas[i];
    std::string id = schema.get<std::string>(
        "<xmlattr>." + layout.id_attribute,
        set.name + "-" + std::to_string(i + 1));
    auto text = schema.get_child_optional(layout.text);
    if (!text) FailSchema(id, "missing <" + layout.text + ">");
    auto pron = text->get_optional<std::string>(layout.pronoun);
    if (!pron) FailSchema(id, "missing <" + layout.pronoun + ">");
    std::string before = text->get<std::string>(layout.before, "");
    std::string after = text->get<std::string>(layout.after, "");

    std::vector<std::string> answers;
    if (auto node = schema.get_child_optional(layout.answers)) {
      for (const auto &[key, child] : *node) {
        if (key == layout.answer) answers.push_back(Trim(child.data()));
      }
    }
    if (answers.empty()) FailSchema(id, "empty answers list");

    std::optional<std::size_t> gold;
    if (auto correct = schema.get_optional<std::string>(layout.correct)) {
      gold = AnswerIndex(id, *correct, answers.size());
    }
    SchemaQuestion q = MakeQuestionFromFragments(
        id, before, *pron, after, std::move(answers), gold, policy);
    if (!layout.special_word.empty()) {
      if (auto word = schema.get_optional<std::string>(layout.special_word)) {
        q.special_word = FindSpecialWord(q.id, q.tokens, q.pronoun, *word,
                                         policy);
      }
    }
    set.questions.push_back(std::move(q));
  }
  CheckQuestionSet(set);
  return set;
}

QuestionSet ImportXmlFile(const std::string &path, const XmlLayout &layout,
                          const TokenizePolicy &policy) {
  return ImportXml(ReadFile(path), layout, policy, FileStem(path));
}

QuestionSet ParseJsonl(std::string_view content, std::string name,
                       const TokenizePolicy &policy) {
  QuestionSet set{std::move(name), {}};
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (Trim(line).empty()) continue;
    auto where = "line " + std::to_string(line_no) + ": ";
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      Fail(ErrorCode::kParseError, where + e.what());
    }
    try {
      std::string id = obj.at("id").get<std::string>();
      std::string text = obj.at("text").get<std::string>();
      const auto &span = obj.at("pronoun");
      if (!span.is_array() || span.size() != 2) {
        Fail(ErrorCode::kParseError, where + "pronoun must be [start, end]");
      }
      TokenSpan pronoun{span[0].get<std::size_t>(), span[1].get<std::size_t>()};
      auto candidates = obj.at("candidates").get<std::vector<std::string>>();
      std::optional<std::size_t> gold, special;
      if (obj.contains("gold") && !obj["gold"].is_null()) {
        gold = obj["gold"].get<std::size_t>();
      }
      if (obj.contains("special_word") && !obj["special_word"].is_null()) {
        special = obj["special_word"].get<std::size_t>();
      }
      set.questions.push_back(MakeQuestion(std::move(id), std::move(text),
                                           pronoun, std::move(candidates),
                                           gold, special, policy));
    } catch (const nlohmann::json::exception &e) {
      Fail(ErrorCode::kParseError, where + e.what());
    }
  }
  CheckQuestionSet(set);
  return set;
}

QuestionSet ImportJsonl(const std::string &path, const TokenizePolicy &policy) {
  return ParseJsonl(ReadFile(path), FileStem(path), policy);
}

std::string ToJsonl(const QuestionSet &set) {
  std::string out;
  for (const auto &q : set.questions) {
    ordered_json obj;
    obj["id"] = q.id;
    obj["text"] = q.text;
    obj["pronoun"] = {q.pronoun.start, q.pronoun.end};
    obj["candidates"] = q.candidate_texts;
    obj["gold"] = q.gold ? ordered_json(*q.gold) : ordered_json(nullptr);
    obj["special_word"] =
        q.special_word ? ordered_json(*q.special_word) : ordered_json(nullptr);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void ExportJsonl(const QuestionSet &set, const std::string &path) {
  WriteFile(path, ToJsonl(set));
}

QuestionSet LoadQuestionSet(const std::string &path,
                            const TokenizePolicy &policy,
                            const XmlLayout &layout) {
  if (std::filesystem::path(path).extension() == ".xml") {
    return ImportXmlFile(path, layout, policy);
  }
  return ImportJsonl(path, policy);
}

QuestionSet Concat(const QuestionSet &a, const QuestionSet &b,
                   std::string name) {
  QuestionSet out{std::move(name), a.questions};
  out.questions.insert(out.questions.end(), b.questions.begin(),
                       b.questions.end());
  CheckQuestionSet(out);
  return out;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) Fail(ErrorCode::kIoError, "write failed: " + path);
}

std::string FileStem(const std::string &path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace lmcr
