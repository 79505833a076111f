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

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "lmcr/dataset.h"
#include "support/synthetic.h"
#include "support/test_util.h"

namespace lmcr {
namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string Quote(const std::string &s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q.push_back(c);
    }
  }
  return q + "'";
}

class CliTest : public ::testing::Test {
 protected:
  RunResult Run(const std::vector<std::string> &args) {
    std::string cmd = Quote(LMCR_CLI_PATH);
    for (const auto &a : args) cmd += " " + Quote(a);
    std::string out = dir_.File("stdout.txt"), err = dir_.File("stderr.txt");
    cmd += " >" + Quote(out) + " 2>" + Quote(err);
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testing::Slurp(out);
    r.err = testing::Slurp(err);
    return r;
  }

  // Writes the forward suite's corpus and questions, trains a model and
  // returns its path.
  std::string PrepareSuite() {
    testing::SyntheticSuite suite = testing::ForwardSuite();
    std::string corpus;
    for (const auto &s : suite.corpus) corpus += s.Join() + "\n";
    dir_.Write("corpus.txt", corpus);
    ExportJsonl(suite.questions, dir_.File("suite.jsonl"));
    RunResult r = Run({"train", "--corpus", dir_.File("corpus.txt"), "--out",
                       dir_.File("fw.bin"), "--order", "3", "--smoothing", "jm"});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return dir_.File("fw.bin");
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, HelpAndVersion) {
  RunResult r = Run({"--help"});
  EXPECT_EQ(r.exit_code, 0);
  for (const char *sub : {"train", "resolve", "eval", "analyze", "rank-corpus", "import",
                          "serve-stub"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
  EXPECT_EQ(Run({"--version"}).exit_code, 0);
}

TEST_F(CliTest, ErrorsAreOneMachineReadableLine) {
  RunResult missing = Run({"train", "--corpus", dir_.File("none.txt"), "--out", dir_.File("m")});
  EXPECT_EQ(missing.exit_code, 14);
  EXPECT_EQ(missing.err.rfind("error: IoError: ", 0), 0u) << missing.err;
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);

  RunResult unknown = Run({"eval", "--bogus"});
  EXPECT_EQ(unknown.exit_code, 11);
  EXPECT_EQ(unknown.err.rfind("error: ConfigError: ", 0), 0u);

  dir_.Write("c.txt", "a b\n");
  RunResult smoothing = Run({"train", "--corpus", dir_.File("c.txt"), "--out", dir_.File("m"),
                             "--smoothing", "witten-bell"});
  EXPECT_EQ(smoothing.exit_code, 11);

  dir_.Write("empty.jsonl", "");
  RunResult empty = Run({"eval", "--questions", dir_.File("empty.jsonl"), "--scorers",
                         "uniform:10"});
  EXPECT_EQ(empty.exit_code, 13);
  EXPECT_EQ(empty.err.rfind("error: EmptyDataset: ", 0), 0u);
}

TEST_F(CliTest, TrainThenResolveFragments) {
  dir_.Write("toy.txt", "the ball is big .\nthe cup is small .\n");
  ASSERT_EQ(Run({"train", "--corpus", dir_.File("toy.txt"), "--out", dir_.File("toy.bin"),
                 "--smoothing", "laplace:0.1"})
                .exit_code,
            0);
  RunResult r = Run({"resolve", "--scorers", "ngram:" + dir_.File("toy.bin"), "--pronoun", "it",
                     "--after", "is big .", "--candidates", "the ball,the cup", "--gold", "0",
                     "--mode", "partial", "--out", dir_.File("r.json")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("1.0000"), std::string::npos) << r.out;
  EXPECT_NE(testing::Slurp(dir_.File("r.json")).find("\"decision\": 0"), std::string::npos);
}

TEST_F(CliTest, EvalIsDeterministicAndSolvesSuite) {
  std::string model = PrepareSuite();
  std::vector<std::string> args = {"eval", "--questions", dir_.File("suite.jsonl"), "--scorers",
                                   "ngram:" + model, "--threads", "3"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", dir_.File("a.tsv")});
  b.insert(b.end(), {"--out", dir_.File("b.tsv")});
  RunResult ra = Run(a), rb = Run(b);
  ASSERT_EQ(ra.exit_code, 0) << ra.err;
  ASSERT_EQ(rb.exit_code, 0) << rb.err;
  EXPECT_EQ(ra.out, rb.out);
  EXPECT_EQ(testing::Slurp(dir_.File("a.tsv")), testing::Slurp(dir_.File("b.tsv")));
  std::string tsv = testing::Slurp(dir_.File("a.tsv"));
  EXPECT_NE(tsv.find("#summary\tpartial\t12\t12\t1\n"), std::string::npos) << tsv;
}

TEST_F(CliTest, ImportRoundTripGivesSameReport) {
  std::string model = PrepareSuite();
  std::string xml =
      "<collection>"
      "<schema><text><txt1>the cat stood next to the dog because</txt1><pron>it</pron>"
      "<txt2>was sleepy .</txt2></text><answers><answer>the cat</answer>"
      "<answer>the dog</answer></answers><correctAnswer>A</correctAnswer></schema>"
      "<schema><text><txt1>the cat stood next to the dog because</txt1><pron>it</pron>"
      "<txt2>was loud .</txt2></text><answers><answer>the cat</answer>"
      "<answer>the dog</answer></answers><correctAnswer>B</correctAnswer></schema>"
      "</collection>";
  dir_.Write("pets.xml", xml);
  RunResult imp = Run({"import", "--input", dir_.File("pets.xml"), "--out", dir_.File("pets.jsonl")});
  ASSERT_EQ(imp.exit_code, 0) << imp.err;
  RunResult direct = Run({"eval", "--questions", dir_.File("pets.xml"), "--scorers",
                          "ngram:" + model, "--out", dir_.File("x.json")});
  RunResult via = Run({"eval", "--questions", dir_.File("pets.jsonl"), "--scorers",
                       "ngram:" + model, "--out", dir_.File("j.json")});
  ASSERT_EQ(direct.exit_code, 0) << direct.err;
  ASSERT_EQ(via.exit_code, 0) << via.err;
  EXPECT_EQ(direct.out, via.out);
  EXPECT_EQ(testing::Slurp(dir_.File("x.json")), testing::Slurp(dir_.File("j.json")));
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  std::string model = PrepareSuite();
  dir_.Write("run.toml", "[eval]\nquestions = \"" + dir_.File("suite.jsonl") +
                             "\"\nscorers = \"ngram:" + model + "\"\nmodes = \"full\"\n");
  RunResult from_file = Run({"--config", dir_.File("run.toml"), "eval"});
  ASSERT_EQ(from_file.exit_code, 0) << from_file.err;
  EXPECT_NE(from_file.out.find("full"), std::string::npos);
  EXPECT_EQ(from_file.out.find("partial"), std::string::npos) << from_file.out;
  RunResult override = Run({"--config", dir_.File("run.toml"), "eval", "--modes", "partial"});
  ASSERT_EQ(override.exit_code, 0) << override.err;
  EXPECT_NE(override.out.find("partial"), std::string::npos);
}

TEST_F(CliTest, AnalyzeWritesTallyAndHeatmap) {
  std::string model = PrepareSuite();
  RunResult r = Run({"analyze", "--questions", dir_.File("suite.jsonl"), "--scorer",
                     "ngram:" + model, "--out", dir_.File("tally.tsv"), "--html",
                     dir_.File("h.html"), "--quiet"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(testing::Slurp(dir_.File("tally.tsv")),
            "mode\tresolution_accuracy\tretrieved\tanswered\nforward-partial\t1\t12\t12\n");
  EXPECT_NE(testing::Slurp(dir_.File("h.html")).find("<html>"), std::string::npos);
}

TEST_F(CliTest, RankKeepsTenOfTenThousand) {
  testing::RandomText rnd(21);
  std::string docs;
  for (int i = 0; i < 10000; ++i) docs += rnd.Sentence(3, 12) + "\n";
  dir_.Write("docs.txt", docs);
  ExportJsonl(testing::ForwardSuite().questions, dir_.File("q.jsonl"));
  RunResult r = Run({"rank-corpus", "--questions", dir_.File("q.jsonl"), "--corpus",
                     dir_.File("docs.txt"), "--fraction", "0.001", "--out", dir_.File("rank.tsv"),
                     "--extract", dir_.File("kept.txt"), "--histogram", dir_.File("h.csv")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::string kept = testing::Slurp(dir_.File("kept.txt"));
  EXPECT_EQ(std::count(kept.begin(), kept.end(), '\n'), 10);
  std::string rank = testing::Slurp(dir_.File("rank.tsv"));
  EXPECT_EQ(std::count(rank.begin(), rank.end(), '\n'), 11);  // header + 10

  dir_.Write("leak.txt", "the cat stood next to the dog because it was sleepy .\nunrelated\n");
  RunResult leak = Run({"rank-corpus", "--questions", dir_.File("q.jsonl"), "--corpus",
                        dir_.File("leak.txt"), "--contamination", "0.5"});
  ASSERT_EQ(leak.exit_code, 0) << leak.err;
  EXPECT_NE(leak.out.find("flagged\t1"), std::string::npos) << leak.out;
}

TEST_F(CliTest, ServeStubAnswersRemoteEval) {
  std::string port_file = dir_.File("port");
  pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    std::string log = dir_.File("serve.log");
    FILE *f = std::freopen(log.c_str(), "w", stdout);
    (void)f;
    execl(LMCR_CLI_PATH, LMCR_CLI_PATH, "serve-stub", "--port", "0", "--stub-vocab-size", "50",
          "--port-file", port_file.c_str(), static_cast<char *>(nullptr));
    _exit(127);
  }
  std::string port;
  for (int i = 0; i < 200 && port.empty(); ++i) {
    std::ifstream in(port_file);
    std::string line;
    if (std::getline(in, line) && !line.empty()) {
      port = line;
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
  }
  ASSERT_FALSE(port.empty());
  ExportJsonl(testing::ForwardSuite().questions, dir_.File("q.jsonl"));
  RunResult r = Run({"eval", "--questions", dir_.File("q.jsonl"), "--scorers",
                     "remote:http://127.0.0.1:" + port, "--modes", "full,partial"});
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("partial"), std::string::npos);

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);

  RunResult down = Run({"eval", "--questions", dir_.File("q.jsonl"), "--scorers",
                        "remote:http://127.0.0.1:" + port, "--retries", "0"});
  EXPECT_EQ(down.exit_code, 9);
  EXPECT_NE(down.err.find("http://127.0.0.1:" + port), std::string::npos) << down.err;
}

}  // namespace
}  // namespace lmcr
