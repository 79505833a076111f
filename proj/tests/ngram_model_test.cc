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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support/oracle.h"
#include "support/synthetic.h"
#include "support/test_util.h"

namespace lmcr {
namespace {

using testing::CodeOf;

std::vector<TokenSequence> Corpus(std::initializer_list<const char *> lines) {
  std::vector<TokenSequence> out;
  for (const char *line : lines) out.push_back(Tokenize(line));
  return out;
}

TrainOptions Options(int order, Smoothing smoothing) {
  TrainOptions o;
  o.order = order;
  o.smoothing = std::move(smoothing);
  return o;
}

double Sum(const std::vector<double> &v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

TEST(NGramCountsTest, WindowsStopAtSequenceStart) {
  NGramCounts counts(3);
  std::vector<Symbol> seq = {0, 5, 6, 1};
  counts.AddSequence(seq);
  EXPECT_EQ(counts.total(), 3u);
  EXPECT_EQ(counts.Count(std::vector<Symbol>{0, 5}), 1u);
  EXPECT_EQ(counts.Count(std::vector<Symbol>{0, 5, 6}), 1u);
  EXPECT_EQ(counts.ContextCount(std::vector<Symbol>{}), 3u);
  EXPECT_EQ(counts.ContextCount(std::vector<Symbol>{0}), 1u);
  EXPECT_EQ(counts.ContextCount(std::vector<Symbol>{0, 5}), 1u);
}

TEST(NGramCountsTest, MergeIsAssociative) {
  NGramCounts a(2), b(2), all(2);
  std::vector<Symbol> s1 = {0, 3, 4, 1}, s2 = {0, 4, 1};
  a.AddSequence(s1);
  b.AddSequence(s2);
  all.AddSequence(s1);
  all.AddSequence(s2);
  a.Merge(b);
  EXPECT_EQ(a, all);
}

TEST(SmoothingTest, ParseAndFormat) {
  EXPECT_EQ(ParseSmoothing("laplace:0.1"), Smoothing::Laplace(0.1));
  EXPECT_EQ(ParseSmoothing("laplace:0.1").ToString(), "laplace:0.1");
  EXPECT_EQ(ParseSmoothing("jm"), Smoothing::JelinekMercer());
  EXPECT_EQ(ParseSmoothing("jm:0.2,0.3,0.5").lambdas,
            (std::vector<double>{0.2, 0.3, 0.5}));
  EXPECT_EQ(CodeOf([] { ParseSmoothing("kneser"); }), ErrorCode::kConfigError);
  EXPECT_EQ(CodeOf([] { ParseSmoothing("laplace:0"); }), ErrorCode::kConfigError);
  EXPECT_EQ(CodeOf([] { ParseSmoothing("jm:0.5,0.6"); }), ErrorCode::kConfigError);
}

TEST(WordModelTest, BigramMaximumLikelihood) {
  auto corpus = Corpus({"the cat sat .", "the dog sat ."});
  auto model = TrainWordNGram(corpus, Options(2, Smoothing::Laplace(1e-12)));
  auto lp = model->CondLogProbs(Tokenize("the cat sat ."));
  ASSERT_EQ(lp.size(), 5u);
  EXPECT_NEAR(std::exp(lp[1]), 0.5, 1e-9);
  EXPECT_NEAR(Sum(lp), std::log(0.5), 1e-9);
}

TEST(WordModelTest, SingleSentenceBigram) {
  auto model = TrainWordNGram(Corpus({"a"}), Options(2, Smoothing::Laplace(1e-12)));
  EXPECT_NEAR(model->CondLogProbs(Tokenize("a"))[0], 0.0, 1e-9);
}

TEST(WordModelTest, UnigramLaplaceUnseenWord) {
  auto corpus = Corpus({"the cat sat .", "the dog sat ."});
  auto model = TrainWordNGram(corpus, Options(1, Smoothing::Laplace(1.0)));
  const double n = 10;  // eight words plus two end markers
  const double v = static_cast<double>(*model->vocab_size());
  EXPECT_EQ(v, 7.0);  // five words, </s>, <unk>
  auto lp = model->CondLogProbs(Tokenize("zebra"));
  EXPECT_NEAR(lp[0], std::log(1.0 / (n + v)), 1e-12);
}

TEST(WordModelTest, LengthContract) {
  auto model = TrainWordNGram(testing::BallCupCorpus(), Options(3, Smoothing::Laplace(0.1)));
  TokenSequence seq = Tokenize("a b c d e");
  EXPECT_EQ(seq.size(), 7u);
  EXPECT_EQ(model->CondLogProbs(seq).size(), 6u);
}

TEST(WordModelTest, BallCupFullScoreUnderMle) {
  auto model = TrainWordNGram(testing::BallCupCorpus(),
                              Options(3, Smoothing::Laplace(1e-12)));
  // P(the|<s>) = 1, P(ball|<s> the) = 1/2, every later conditional is 1.
  auto lp = model->CondLogProbs(Tokenize("the ball is big ."));
  EXPECT_NEAR(lp[1], std::log(0.5), 1e-9);
  EXPECT_NEAR(Sum(lp), std::log(0.5), 1e-9);
}

TEST(WordModelTest, UnigramCounts) {
  auto model = TrainWordNGram(Corpus({"the cat sat .", "the dog sat ."}),
                              Options(2, Smoothing::JelinekMercer()));
  EXPECT_EQ(model->UnigramCount("the"), 2u);
  EXPECT_EQ(model->UnigramCount("zebra"), 0u);
  EXPECT_EQ(model->UnigramCount("<s>"), 2u);
}

TEST(WordModelTest, VocabLimitFoldsIntoUnk) {
  TrainOptions o = Options(2, Smoothing::JelinekMercer());
  o.min_count = 2;
  auto model = TrainWordNGram(Corpus({"the cat sat .", "the dog sat ."}), o);
  EXPECT_EQ(model->UnigramCount("cat"), 2u);  // aggregate <unk>
  EXPECT_FALSE(model->vocab().Find("cat").has_value());
}

TEST(WordModelTest, Errors) {
  std::vector<TokenSequence> empty;
  EXPECT_EQ(CodeOf([&] { TrainWordNGram(empty, {}); }), ErrorCode::kEmptyCorpus);
  EXPECT_EQ(CodeOf([&] { TrainCharNGram(empty, {}); }), ErrorCode::kEmptyCorpus);
  auto corpus = Corpus({"a b"});
  EXPECT_EQ(CodeOf([&] { TrainWordNGram(corpus, Options(0, Smoothing::JelinekMercer())); }),
            ErrorCode::kInvalidOrder);
  EXPECT_EQ(CodeOf([&] {
              TrainWordNGram(corpus, Options(2, Smoothing::JelinekMercer({1.0})));
            }),
            ErrorCode::kConfigError);
}

TEST(CharModelTest, HandCounts) {
  auto model = TrainCharNGram(Corpus({"ab"}), Options(2, Smoothing::Laplace(1e-12)));
  std::vector<Symbol> hist = {CharNGramModel::kBoundary, model->CharSymbol('a')};
  EXPECT_NEAR(model->estimator().Prob(hist, model->CharSymbol('b')), 1.0, 1e-9);
  std::vector<Symbol> start = {CharNGramModel::kBoundary};
  double word = model->WordLogProb(start, "ab");
  auto p = [&](std::vector<Symbol> h, Symbol w) {
    return std::log(model->estimator().Prob(h, w));
  };
  Symbol a = model->CharSymbol('a'), b = model->CharSymbol('b');
  double expected = p({0}, a) + p({0, a}, b) + p({0, a, b}, CharNGramModel::kBoundary);
  EXPECT_DOUBLE_EQ(word, expected);
  EXPECT_EQ(model->CondLogProbs(Tokenize("ab")).size(), 2u);
}

TEST(CharModelTest, UnknownBytesMapToOneSymbol) {
  auto model = TrainCharNGram(Corpus({"ab"}), Options(2, Smoothing::JelinekMercer()));
  EXPECT_EQ(model->CharSymbol('z'), CharNGramModel::kUnknownChar);
  EXPECT_EQ(*model->vocab_size(), 5u);
}

// Exact agreement with the string-keyed counting oracle.
struct OracleCase {
  int order;
  bool laplace;
};

class OracleEquivalenceTest : public ::testing::TestWithParam<OracleCase> {};

TEST_P(OracleEquivalenceTest, WordModel) {
  const auto [order, laplace] = GetParam();
  testing::RandomText rnd(17 + order);
  std::vector<std::vector<TokenSequence>> corpora = {testing::BallCupCorpus(),
                                                     rnd.Corpus(40)};
  for (const auto &corpus : corpora) {
    Smoothing s = laplace ? Smoothing::Laplace(0.1) : Smoothing::JelinekMercer();
    auto model = TrainWordNGram(corpus, Options(order, s));
    testing::WordOracle oracle(testing::Interiors(corpus), order);
    for (int i = 0; i < 30; ++i) {
      TokenSequence seq = i < static_cast<int>(corpus.size())
                              ? corpus[i]
                              : Tokenize(rnd.Sentence(1, 8));
      auto got = model->CondLogProbs(seq);
      auto interior = std::vector<std::string>(seq.interior().begin(), seq.interior().end());
      auto want = oracle.CondLogProbs(interior, laplace, 0.1);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t t = 0; t < got.size(); ++t) {
        EXPECT_LE(std::abs(got[t] - want[t]), 1e-12) << seq.Join() << " @" << t;
      }
    }
  }
}

TEST_P(OracleEquivalenceTest, CharModel) {
  const auto [order, laplace] = GetParam();
  testing::RandomText rnd(31 + order);
  std::vector<std::vector<TokenSequence>> corpora = {testing::BallCupCorpus(),
                                                     rnd.Corpus(25)};
  for (const auto &corpus : corpora) {
    Smoothing s = laplace ? Smoothing::Laplace(0.1) : Smoothing::JelinekMercer();
    auto model = TrainCharNGram(corpus, Options(order, s));
    testing::CharOracle oracle(testing::Interiors(corpus), order);
    for (int i = 0; i < 20; ++i) {
      TokenSequence seq = Tokenize(i == 0 ? "the ball is big ." : rnd.Sentence(1, 6));
      auto got = model->CondLogProbs(seq);
      auto interior = std::vector<std::string>(seq.interior().begin(), seq.interior().end());
      auto want = oracle.CondLogProbs(interior, laplace, 0.1);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t t = 0; t < got.size(); ++t) {
        EXPECT_LE(std::abs(got[t] - want[t]), 1e-12) << seq.Join() << " @" << t;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(OrdersAndSmoothing, OracleEquivalenceTest,
                         ::testing::Values(OracleCase{1, true}, OracleCase{2, true},
                                           OracleCase{3, true}, OracleCase{1, false},
                                           OracleCase{2, false}, OracleCase{3, false}),
                         [](const auto &info) {
                           return std::string(info.param.laplace ? "Laplace" : "JM") +
                                  std::to_string(info.param.order);
                         });

TEST(NormalizationTest, DistributionsSumToOne) {
  testing::RandomText rnd(5);
  auto corpus = rnd.Corpus(60);
  for (int order = 1; order <= 4; ++order) {
    for (bool laplace : {true, false}) {
      Smoothing s = laplace ? Smoothing::Laplace(0.3) : Smoothing::JelinekMercer();
      std::vector<std::unique_ptr<NGramModel>> models;
      models.push_back(TrainWordNGram(corpus, Options(order, s)));
      models.push_back(TrainCharNGram(corpus, Options(order, s)));
      for (const auto &model : models) {
        auto symbols = model->PredictedSymbols();
        for (int i = 0; i < 25; ++i) {
          std::vector<Symbol> history = {0};
          int len = rnd.Uniform(0, 4);
          for (int k = 0; k < len; ++k) {
            history.push_back(symbols[rnd.Uniform(0, static_cast<int>(symbols.size()) - 1)]);
          }
          EXPECT_NEAR(Sum(model->Distribution(history)), 1.0, 1e-9);
        }
      }
    }
  }
}

TEST(SerializationTest, RoundTripIsBitExact) {
  testing::RandomText rnd(9);
  auto corpus = rnd.Corpus(30);
  testing::TempDir dir;
  std::vector<std::unique_ptr<NGramModel>> models;
  models.push_back(TrainWordNGram(corpus, Options(3, Smoothing::Laplace(0.1))));
  TrainOptions backward = Options(2, Smoothing::JelinekMercer({0.25, 0.75}));
  backward.direction = Direction::kBackward;
  models.push_back(TrainCharNGram(corpus, backward));
  for (const auto &model : models) {
    std::string path = dir.File("m.bin");
    model->Save(path);
    auto loaded = NGramModel::Load(path);
    EXPECT_EQ(loaded->kind(), model->kind());
    EXPECT_EQ(loaded->direction(), model->direction());
    EXPECT_EQ(loaded->smoothing(), model->smoothing());
    EXPECT_EQ(loaded->DumpText(), model->DumpText());
    for (int i = 0; i < 100; ++i) {
      TokenSequence seq = Tokenize(rnd.Sentence(1, 8));
      EXPECT_EQ(loaded->CondLogProbs(seq), model->CondLogProbs(seq));
    }
  }
}

TEST(SerializationTest, RejectsDamagedFiles) {
  auto model = TrainWordNGram(testing::BallCupCorpus(), Options(2, Smoothing::Laplace(1)));
  std::string bytes = model->Serialize();
  EXPECT_EQ(CodeOf([&] { NGramModel::Deserialize("XXXX" + bytes.substr(4)); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf([&] { NGramModel::Deserialize(bytes.substr(0, bytes.size() / 2)); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf([&] { NGramModel::Deserialize(""); }), ErrorCode::kFormatError);
  EXPECT_FALSE(CodeOf([&] { NGramModel::Deserialize(bytes); }).has_value());
}

TEST(BackwardModelTest, EqualsForwardModelOnReversedText) {
  auto corpus = testing::BallCupCorpus();
  std::vector<TokenSequence> reversed;
  for (const auto &s : corpus) reversed.push_back(Reverse(s));
  TrainOptions o = Options(3, Smoothing::Laplace(0.1));
  auto forward_on_reversed = TrainWordNGram(reversed, o);
  o.direction = Direction::kBackward;
  auto backward = TrainWordNGram(corpus, o);
  EXPECT_EQ(backward->direction(), Direction::kBackward);
  TokenSequence seq = Reverse(Tokenize("the cup is big ."));
  EXPECT_EQ(backward->CondLogProbs(seq), forward_on_reversed->CondLogProbs(seq));
}

TEST(InterpolationTest, EmImprovesHeldoutLikelihood) {
  testing::RandomText rnd(77);
  auto corpus = rnd.Corpus(200);
  auto heldout = rnd.Corpus(40);
  TrainOptions o = Options(3, Smoothing::JelinekMercer());
  auto uniform = TrainWordNGram(corpus, o);
  o.heldout = heldout;
  auto tuned = TrainWordNGram(corpus, o);
  const auto &lambdas = tuned->smoothing().lambdas;
  ASSERT_EQ(lambdas.size(), 3u);
  EXPECT_NEAR(Sum(lambdas), 1.0, 1e-12);
  double ll_uniform = 0, ll_tuned = 0;
  for (const auto &s : heldout) {
    ll_uniform += Sum(uniform->CondLogProbs(s));
    ll_tuned += Sum(tuned->CondLogProbs(s));
  }
  EXPECT_GE(ll_tuned, ll_uniform - 1e-9);
}

TEST(ThreadingTest, ShardedTrainingMatchesSingleThread) {
  testing::RandomText rnd(3);
  auto corpus = rnd.Corpus(500);
  TrainOptions o = Options(3, Smoothing::Laplace(0.5));
  auto single = TrainWordNGram(corpus, o);
  o.threads = 4;
  auto sharded = TrainWordNGram(corpus, o);
  EXPECT_EQ(single->Serialize(), sharded->Serialize());
}

TEST(CorpusTest, ParsesOneSentencePerLine) {
  auto corpus = ParseCorpus("The cat.\n\n  \nA dog!\n", TokenizePolicy{});
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[1].Join(), "a dog !");
}

}  // namespace
}  // namespace lmcr
