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

#include <gtest/gtest.h>

#include "lmcr/status.h"
#include "support/test_util.h"

namespace lmcr {
namespace {

using Tokens = std::vector<std::string>;
using testing::CodeOf;

TEST(TokenizeTest, WrapsInMarkers) {
  EXPECT_EQ(Tokenize("The cat sat.").tokens(),
            (Tokens{"<s>", "the", "cat", "sat", ".", "</s>"}));
}

TEST(TokenizeTest, DetachesPunctuation) {
  EXPECT_EQ(TokenizeWords("Hello, world! (yes) \"no\"; a:b?"),
            (Tokens{"hello", ",", "world", "!", "(", "yes", ")", "\"", "no", "\"", ";",
                    "a", ":", "b", "?"}));
}

TEST(TokenizeTest, KeepsInnerApostrophes) {
  EXPECT_EQ(TokenizeWords("the dog's bone isn't 'here'"),
            (Tokens{"the", "dog's", "bone", "isn't", "'", "here", "'"}));
  EXPECT_EQ(TokenizeWords("dogs' bones"), (Tokens{"dogs", "'", "bones"}));
}

TEST(TokenizeTest, PolicyCanKeepCaseAndPunctuation) {
  TokenizePolicy raw{false, false};
  EXPECT_EQ(TokenizeWords("The Cat, sat.", raw), (Tokens{"The", "Cat,", "sat."}));
}

TEST(TokenizeTest, LowercasesOnlyAscii) {
  EXPECT_EQ(TokenizeWords("CAFÉ"), (Tokens{"caf\xc3\x89"}));
}

TEST(TokenizeTest, EmptyTextFails) {
  EXPECT_EQ(CodeOf([] { Tokenize("   \t\n"); }), ErrorCode::kEmptyText);
  EXPECT_TRUE(TokenizeWords("").empty());
}

TEST(TokenizeTest, RejectsReservedMarkersAndBadUtf8) {
  EXPECT_EQ(CodeOf([] { Tokenize("a <s> b", TokenizePolicy{true, false}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { Tokenize("bad \xff byte"); }), ErrorCode::kInvalidArgument);
}

TEST(Utf8Test, Validation) {
  EXPECT_TRUE(IsValidUtf8("plain"));
  EXPECT_TRUE(IsValidUtf8("\xc3\xa9\xe2\x82\xac\xf0\x9f\x98\x80"));
  EXPECT_FALSE(IsValidUtf8("\xc3"));
  EXPECT_FALSE(IsValidUtf8("\xe2\x82"));
  EXPECT_FALSE(IsValidUtf8("\xc0\xaf"));          // overlong
  EXPECT_FALSE(IsValidUtf8("\xed\xa0\x80"));      // surrogate
  EXPECT_FALSE(IsValidUtf8("\xf4\x90\x80\x80"));  // beyond U+10FFFF
  EXPECT_FALSE(IsValidUtf8("\x80"));
}

TEST(TokenSequenceTest, FromTokensValidatesMarkers) {
  auto seq = TokenSequence::FromTokens({"<s>", "a", "b", "</s>"});
  EXPECT_EQ(seq.Join(), "a b");
  EXPECT_EQ(seq.size(), 4u);
  EXPECT_EQ(CodeOf([] { TokenSequence::FromTokens({"a", "</s>"}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { TokenSequence::FromTokens({"<s>", "</s>", "</s>"}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { TokenSequence::FromInterior({"a", ""}); }),
            ErrorCode::kInvalidArgument);
}

TEST(TokenSequenceTest, ReverseKeepsMarkers) {
  EXPECT_EQ(Reverse(Tokenize("a b c")).tokens(),
            (Tokens{"<s>", "c", "b", "a", "</s>"}));
  EXPECT_EQ(Reverse(Reverse(Tokenize("x y"))), Tokenize("x y"));
}

TEST(NGramTest, ExtractsInteriorWindows) {
  auto seq = Tokenize("a b a b");
  auto bigrams = ExtractNGrams(seq, 2);
  EXPECT_EQ(bigrams.total(), 3u);
  EXPECT_EQ(bigrams.Count("a b"), 2u);
  EXPECT_EQ(bigrams.Count("b a"), 1u);
  EXPECT_TRUE(ExtractNGrams(seq, 5).empty());
  EXPECT_EQ(ExtractNGrams(seq, 2, true).Count("<s> a"), 1u);
  EXPECT_EQ(CodeOf([&] { ExtractNGrams(seq, 0); }), ErrorCode::kInvalidOrder);
}

TEST(NGramTest, MergeAddsCounts) {
  auto a = ExtractNGrams(Tokenize("x y"), 1);
  a.Merge(ExtractNGrams(Tokenize("y z"), 1));
  EXPECT_EQ(a.total(), 4u);
  EXPECT_EQ(a.Count("y"), 2u);
  EXPECT_EQ(CodeOf([&] { a.Merge(NGramMultiset(2)); }), ErrorCode::kInvalidOrder);
}

TEST(VocabularyTest, ReservedIdsComeFirst) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.Token(Vocabulary::kBosId), "<s>");
  EXPECT_EQ(v.Token(Vocabulary::kEosId), "</s>");
  EXPECT_EQ(v.Token(Vocabulary::kUnkId), "<unk>");
  EXPECT_EQ(v.IdOrUnk("zebra"), Vocabulary::kUnkId);
}

TEST(VocabularyTest, BuildSortsByCountThenText) {
  std::vector<TokenSequence> corpus = {Tokenize("b a c a"), Tokenize("b a d")};
  Vocabulary v = BuildVocab(corpus, std::nullopt, 1);
  ASSERT_EQ(v.size(), 7u);
  EXPECT_EQ(v.Token(3), "a");
  EXPECT_EQ(v.Token(4), "b");
  EXPECT_EQ(v.Token(5), "c");
  EXPECT_EQ(v.Token(6), "d");
  EXPECT_EQ(v.Count(3), 3u);
  EXPECT_EQ(v.Count(Vocabulary::kBosId), 2u);
  EXPECT_EQ(v.Count(Vocabulary::kEosId), 2u);
  EXPECT_EQ(v.Count(Vocabulary::kUnkId), 0u);
}

TEST(VocabularyTest, CutoffsFoldIntoUnknown) {
  std::vector<TokenSequence> corpus = {Tokenize("b a c a"), Tokenize("b a d")};
  Vocabulary capped = BuildVocab(corpus, 2, 1);
  EXPECT_EQ(capped.size(), 5u);
  EXPECT_EQ(capped.Count(Vocabulary::kUnkId), 2u);
  Vocabulary frequent = BuildVocab(corpus, std::nullopt, 2);
  EXPECT_EQ(frequent.size(), 5u);
  EXPECT_FALSE(frequent.Find("c").has_value());
  EXPECT_EQ(CodeOf([] { BuildVocab(std::vector<TokenSequence>{}, std::nullopt, 1); }),
            ErrorCode::kEmptyCorpus);
}

}  // namespace
}  // namespace lmcr
