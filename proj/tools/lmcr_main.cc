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

// lmcr command-line tool: trains n-gram models, resolves and evaluates
// pronoun-resolution questions, runs ratio analysis and ranks corpora.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lmcr/lmcr.h"

namespace {

// Thrown after a failed library call; carries the status for the exit code.
struct Failure {
  lmcr_status status;
  std::string message;
};

void Check(lmcr_status status) {
  if (status != LMCR_OK) throw Failure{status, lmcr_last_error()};
}

template <typename T, void (*Free)(T *)>
struct Handle {
  T *ptr = nullptr;
  Handle() = default;
  Handle(const Handle &) = delete;
  Handle &operator=(const Handle &) = delete;
  ~Handle() { Free(ptr); }
  T **out() { return &ptr; }
  T *get() const { return ptr; }
};

using QuestionSet = Handle<lmcr_question_set, lmcr_question_set_free>;
using Model = Handle<lmcr_model, lmcr_model_free>;
using Scorer = Handle<lmcr_scorer, lmcr_scorer_free>;
using Report = Handle<lmcr_report, lmcr_report_free>;
using Server = Handle<lmcr_server, lmcr_server_free>;

std::string Section(const Report &report, const char *name) {
  const char *text = nullptr;
  Check(lmcr_report_text(report.get(), name, &text));
  return text;
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Failure{LMCR_IO_ERROR, "cannot write " + path};
}

bool EndsWith(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct RemoteFlags {
  double timeout = 10.0;
  std::string auth_token;
  size_t batch_size = 64;
  int retries = 2;
  int max_in_flight = 4;

  void Register(CLI::App *app) {
    app->add_option("--timeout", timeout, "Remote scorer timeout in seconds")
        ->check(CLI::PositiveNumber);
    app->add_option("--auth-token", auth_token, "Bearer token for remote scorers");
    app->add_option("--batch-size", batch_size, "Sequences per remote request")
        ->check(CLI::PositiveNumber);
    app->add_option("--retries", retries, "Extra attempts per remote request")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--max-in-flight", max_in_flight, "Concurrent remote requests")
        ->check(CLI::PositiveNumber);
  }

  lmcr_scorer_options Options(bool backward) const {
    lmcr_scorer_options o;
    lmcr_scorer_options_init(&o);
    o.backward = backward ? 1 : 0;
    o.timeout_seconds = timeout;
    o.auth_token = auth_token.empty() ? nullptr : auth_token.c_str();
    o.batch_size = batch_size;
    o.retries = retries;
    o.max_in_flight = max_in_flight;
    return o;
  }
};

void LoadQuestions(const std::vector<std::string> &paths, const std::string &name,
                   QuestionSet *set) {
  if (paths.empty()) throw Failure{LMCR_CONFIG_ERROR, "no question files given"};
  Check(lmcr_question_set_load(paths[0].c_str(), nullptr, set->out()));
  for (size_t i = 1; i < paths.size(); ++i) {
    QuestionSet next, joined;
    Check(lmcr_question_set_load(paths[i].c_str(), nullptr, next.out()));
    const char *first_name = nullptr;
    Check(lmcr_question_set_name(set->get(), &first_name));
    std::string joined_name = name.empty() ? std::string(first_name) + "+" : name;
    Check(lmcr_question_set_concat(set->get(), next.get(), joined_name.c_str(),
                                   joined.out()));
    std::swap(set->ptr, joined.ptr);
  }
}

std::atomic<bool> stop_requested{false};

void OnSignal(int) { stop_requested = true; }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Pronoun resolution with language models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file mirroring the command-line flags");
  app.set_version_flag("--version", std::string(lmcr_version()));

  // train
  auto *train = app.add_subcommand("train", "Train a word or character n-gram model");
  std::string train_corpus, train_out, train_smoothing = "jm", train_heldout,
                                       train_name, train_dump;
  int train_order = 3, train_em = 20, train_threads = 1;
  bool train_backward = false, train_char = false;
  size_t train_max_vocab = 0;
  uint64_t train_min_count = 1;
  train->add_option("--corpus", train_corpus, "One sentence per line")->required();
  train->add_option("--out", train_out, "Model file to write")->required();
  train->add_option("--order", train_order, "N-gram order")->check(CLI::PositiveNumber);
  train->add_option("--smoothing", train_smoothing,
                    "laplace:<alpha>, jm or jm:<l1>,<l2>,...");
  train->add_flag("--backward", train_backward, "Train on reversed sentences");
  train->add_flag("--char", train_char, "Character-level model");
  train->add_option("--max-vocab", train_max_vocab, "Keep the most frequent words");
  train->add_option("--min-count", train_min_count, "Minimum word count");
  train->add_option("--heldout", train_heldout, "Held-out text for interpolation weights");
  train->add_option("--em-iterations", train_em, "EM iterations for the weights");
  train->add_option("--threads", train_threads, "Counting threads")
      ->check(CLI::PositiveNumber);
  train->add_option("--name", train_name, "Model name");
  train->add_option("--dump", train_dump, "Also write a text listing of the counts");

  // resolve
  auto *resolve = app.add_subcommand("resolve", "Resolve questions in one scoring mode");
  std::vector<std::string> resolve_questions;
  std::string resolve_scorers, resolve_mode = "partial", resolve_combine = "mean",
                               resolve_counts, resolve_out, resolve_before,
                               resolve_pronoun, resolve_after, resolve_candidates;
  int resolve_gold = -1, resolve_threads = 1;
  RemoteFlags resolve_remote;
  resolve->add_option("--questions", resolve_questions, "Question files (XML or JSONL)");
  resolve->add_option("--before", resolve_before, "Text before the pronoun");
  resolve->add_option("--pronoun", resolve_pronoun, "The pronoun");
  resolve->add_option("--after", resolve_after, "Text after the pronoun");
  resolve->add_option("--candidates", resolve_candidates, "Comma-separated candidates");
  resolve->add_option("--gold", resolve_gold, "Index of the correct candidate");
  resolve->add_option("--scorers", resolve_scorers, "Scorer specs")->required();
  resolve->add_option("--mode", resolve_mode, "full, full_normalized or partial");
  resolve->add_option("--combine", resolve_combine, "mean or vote");
  resolve->add_option("--counts", resolve_counts, "Word model giving unigram counts");
  resolve->add_option("--threads", resolve_threads, "Question-level threads")
      ->check(CLI::PositiveNumber);
  resolve->add_option("--out", resolve_out, "Machine output (.json or TSV)");
  resolve_remote.Register(resolve);

  // eval
  auto *eval = app.add_subcommand("eval", "Evaluate a question set in several modes");
  std::vector<std::string> eval_questions;
  std::string eval_name, eval_scorers, eval_modes = "full,full_normalized,partial",
                         eval_combine = "mean", eval_counts, eval_out;
  int eval_threads = 1;
  RemoteFlags eval_remote;
  eval->add_option("--questions", eval_questions, "Question files, concatenated")
      ->required();
  eval->add_option("--name", eval_name, "Name of the concatenated set");
  eval->add_option("--scorers", eval_scorers, "Scorer specs")->required();
  eval->add_option("--modes", eval_modes, "Comma-separated scoring modes");
  eval->add_option("--combine", eval_combine, "mean or vote");
  eval->add_option("--counts", eval_counts, "Word model giving unigram counts");
  eval->add_option("--threads", eval_threads, "Question-level threads")
      ->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "Machine output (.json or TSV)");
  eval_remote.Register(eval);

  // analyze
  auto *analyze = app.add_subcommand("analyze", "Per-position probability ratios");
  std::vector<std::string> analyze_questions;
  std::string analyze_scorer, analyze_mode = "partial", analyze_out, analyze_html,
                              analyze_ratios;
  size_t analyze_top_k = 2;
  bool analyze_backward = false, analyze_quiet = false;
  int analyze_threads = 1;
  RemoteFlags analyze_remote;
  analyze->add_option("--questions", analyze_questions, "Question files")->required();
  analyze->add_option("--scorer", analyze_scorer, "A single scorer spec")->required();
  analyze->add_option("--mode", analyze_mode, "full or partial");
  analyze->add_option("--top-k", analyze_top_k, "Keywords retrieved per question")
      ->check(CLI::PositiveNumber);
  analyze->add_flag("--backward", analyze_backward, "The scorer is backward");
  analyze->add_option("--threads", analyze_threads, "Question-level threads")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--out", analyze_out, "Keyword tally TSV");
  analyze->add_option("--html", analyze_html, "Heatmap HTML file");
  analyze->add_option("--ratios", analyze_ratios, "Per-position log-ratio TSV");
  analyze->add_flag("--quiet", analyze_quiet, "Omit the terminal heatmaps");
  analyze_remote.Register(analyze);

  // rank-corpus
  auto *rank = app.add_subcommand("rank-corpus", "Rank documents by question similarity");
  std::vector<std::string> rank_questions;
  std::string rank_corpus, rank_out, rank_histogram, rank_extract, rank_vocab;
  double rank_fraction = 0.001, rank_max_oov = -1.0;
  std::optional<double> rank_contamination;
  bool rank_per_question = false;
  int rank_buckets = 100, rank_threads = 1;
  rank->add_option("--questions", rank_questions, "Question files")->required();
  rank->add_option("--corpus", rank_corpus, "One document per line, plain or gzip")
      ->required();
  rank->add_option("--fraction", rank_fraction, "Share of documents to keep");
  rank->add_flag("--per-question", rank_per_question,
                 "Score against the best single question");
  rank->add_option("--max-oov", rank_max_oov, "Drop documents above this OOV share");
  rank->add_option("--vocab-model", rank_vocab, "Word model defining the vocabulary");
  rank->add_option("--buckets", rank_buckets, "Histogram buckets")
      ->check(CLI::PositiveNumber);
  rank->add_option("--threads", rank_threads, "Scoring threads")
      ->check(CLI::PositiveNumber);
  rank->add_option("--out", rank_out, "Ranking TSV");
  rank->add_option("--histogram", rank_histogram, "Score histogram CSV");
  rank->add_option("--extract", rank_extract, "Kept documents, one per line");
  rank->add_option("--contamination", rank_contamination,
                   "Report documents reaching this similarity to a question");

  // import
  auto *import = app.add_subcommand("import", "Convert question files to JSON lines");
  std::vector<std::string> import_inputs;
  std::string import_out, import_name;
  std::string layout_schema, layout_text, layout_before, layout_pronoun, layout_after,
      layout_answers, layout_answer, layout_correct, layout_id, layout_special;
  import->add_option("--input", import_inputs, "XML or JSONL files, concatenated")
      ->required();
  import->add_option("--out", import_out, "JSONL file to write")->required();
  import->add_option("--name", import_name, "Name of the concatenated set");
  import->add_option("--xml-schema", layout_schema, "Question element");
  import->add_option("--xml-text", layout_text, "Text element");
  import->add_option("--xml-before", layout_before, "Text before the pronoun");
  import->add_option("--xml-pronoun", layout_pronoun, "Pronoun element");
  import->add_option("--xml-after", layout_after, "Text after the pronoun");
  import->add_option("--xml-answers", layout_answers, "Candidate list element");
  import->add_option("--xml-answer", layout_answer, "Candidate element");
  import->add_option("--xml-correct", layout_correct, "Correct answer element");
  import->add_option("--xml-id", layout_id, "Question id attribute");
  import->add_option("--xml-special-word", layout_special, "Special word element");

  // serve-stub
  auto *serve = app.add_subcommand("serve-stub", "Serve a scorer over HTTP");
  std::string serve_host = "127.0.0.1", serve_direction = "forward", serve_model,
              serve_auth, serve_port_file;
  int serve_port = 8080;
  uint64_t serve_vocab = 10000;
  size_t serve_max_batch = 1024;
  serve->add_option("--host", serve_host, "Address to bind");
  serve->add_option("--port", serve_port, "Port, 0 picks a free one")
      ->check(CLI::Range(0, 65535));
  serve->add_option("--direction", serve_direction, "forward or backward");
  serve->add_option("--stub-vocab-size", serve_vocab,
                    "Uniform scorer vocabulary size")
      ->check(CLI::PositiveNumber);
  serve->add_option("--model", serve_model, "Serve this n-gram model instead");
  serve->add_option("--max-batch", serve_max_batch, "Largest accepted batch")
      ->check(CLI::PositiveNumber);
  serve->add_option("--auth-token", serve_auth, "Require this bearer token");
  serve->add_option("--port-file", serve_port_file, "Write the bound port here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::string msg = e.what();
    for (char &c : msg) {
      if (c == '\n') c = ' ';
    }
    std::fprintf(stderr, "error: ConfigError: %s\n", msg.c_str());
    return LMCR_CONFIG_ERROR;
  }

  try {
    if (*train) {
      lmcr_train_options o;
      lmcr_train_options_init(&o);
      o.order = train_order;
      o.smoothing = train_smoothing.c_str();
      o.backward = train_backward;
      o.char_level = train_char;
      o.max_vocab = train_max_vocab;
      o.min_count = train_min_count;
      o.heldout_path = train_heldout.empty() ? nullptr : train_heldout.c_str();
      o.em_iterations = train_em;
      o.threads = train_threads;
      o.name = train_name.empty() ? nullptr : train_name.c_str();
      Model model;
      Check(lmcr_model_train(train_corpus.c_str(), &o, model.out()));
      Check(lmcr_model_save(model.get(), train_out.c_str()));
      if (!train_dump.empty()) {
        const char *dump = nullptr;
        Check(lmcr_model_dump_text(model.get(), &dump));
        WriteText(train_dump, dump);
      }
      uint64_t vocab = 0;
      Check(lmcr_model_vocab_size(model.get(), &vocab));
      std::printf("wrote %s (order %d, %s, vocabulary %llu)\n", train_out.c_str(),
                  train_order, train_smoothing.c_str(),
                  static_cast<unsigned long long>(vocab));
    } else if (*resolve || *eval) {
      const bool is_eval = eval->parsed();
      QuestionSet set;
      if (is_eval) {
        LoadQuestions(eval_questions, eval_name, &set);
      } else if (!resolve_questions.empty()) {
        LoadQuestions(resolve_questions, "", &set);
      } else {
        if (resolve_pronoun.empty() || resolve_candidates.empty()) {
          throw Failure{LMCR_CONFIG_ERROR,
                        "give --questions or --pronoun with --candidates"};
        }
        Check(lmcr_question_set_from_fragments(
            resolve_before.c_str(), resolve_pronoun.c_str(), resolve_after.c_str(),
            resolve_candidates.c_str(), resolve_gold, set.out()));
      }
      const RemoteFlags &remote = is_eval ? eval_remote : resolve_remote;
      lmcr_scorer_options so = remote.Options(false);
      Scorer scorer;
      Check(lmcr_scorer_open((is_eval ? eval_scorers : resolve_scorers).c_str(), &so,
                             scorer.out()));
      const std::string &counts = is_eval ? eval_counts : resolve_counts;
      if (!counts.empty()) Check(lmcr_scorer_set_counts(scorer.get(), counts.c_str()));
      lmcr_eval_options eo;
      lmcr_eval_options_init(&eo);
      eo.modes = is_eval ? eval_modes.c_str() : resolve_mode.c_str();
      eo.combine = is_eval ? eval_combine.c_str() : resolve_combine.c_str();
      eo.threads = is_eval ? eval_threads : resolve_threads;
      Report report;
      Check(lmcr_evaluate(scorer.get(), set.get(), &eo, report.out()));
      std::fputs(Section(report, "table").c_str(), stdout);
      const std::string &out = is_eval ? eval_out : resolve_out;
      if (!out.empty()) {
        WriteText(out, Section(report, EndsWith(out, ".json") ? "json" : "tsv"));
      }
    } else if (*analyze) {
      QuestionSet set;
      LoadQuestions(analyze_questions, "", &set);
      lmcr_scorer_options so = analyze_remote.Options(analyze_backward);
      Scorer scorer;
      Check(lmcr_scorer_open(analyze_scorer.c_str(), &so, scorer.out()));
      lmcr_analyze_options ao;
      lmcr_analyze_options_init(&ao);
      ao.mode = analyze_mode.c_str();
      ao.top_k = analyze_top_k;
      ao.threads = analyze_threads;
      Report report;
      Check(lmcr_analyze(scorer.get(), set.get(), &ao, report.out()));
      if (analyze_quiet) {
        std::fputs(Section(report, "tally").c_str(), stdout);
      } else {
        std::fputs(Section(report, "text").c_str(), stdout);
      }
      if (!analyze_out.empty()) WriteText(analyze_out, Section(report, "tally"));
      if (!analyze_html.empty()) WriteText(analyze_html, Section(report, "html"));
      if (!analyze_ratios.empty()) WriteText(analyze_ratios, Section(report, "ratios"));
    } else if (*rank) {
      QuestionSet set;
      LoadQuestions(rank_questions, "", &set);
      Report report;
      if (rank_contamination) {
        Check(lmcr_contamination(set.get(), rank_corpus.c_str(), *rank_contamination,
                                 report.out()));
        std::fputs(Section(report, "summary").c_str(), stdout);
        const std::string hits = Section(report, "hits");
        if (rank_out.empty()) {
          std::fputs(hits.c_str(), stdout);
        } else {
          WriteText(rank_out, hits);
        }
      } else {
        lmcr_rank_options ro;
        lmcr_rank_options_init(&ro);
        ro.top_fraction = rank_fraction;
        ro.per_question = rank_per_question;
        ro.max_oov_fraction = rank_max_oov;
        ro.vocab_model_path = rank_vocab.empty() ? nullptr : rank_vocab.c_str();
        ro.histogram_buckets = rank_buckets;
        ro.threads = rank_threads;
        Check(lmcr_rank_corpus(set.get(), rank_corpus.c_str(), &ro, report.out()));
        std::fputs(Section(report, "summary").c_str(), stdout);
        if (!rank_out.empty()) WriteText(rank_out, Section(report, "ranking"));
        if (!rank_histogram.empty()) {
          WriteText(rank_histogram, Section(report, "histogram"));
        }
        if (!rank_extract.empty()) WriteText(rank_extract, Section(report, "corpus"));
      }
    } else if (*import) {
      lmcr_xml_layout layout{};
      auto field = [](const std::string &s) { return s.empty() ? nullptr : s.c_str(); };
      layout.schema = field(layout_schema);
      layout.text = field(layout_text);
      layout.before = field(layout_before);
      layout.pronoun = field(layout_pronoun);
      layout.after = field(layout_after);
      layout.answers = field(layout_answers);
      layout.answer = field(layout_answer);
      layout.correct = field(layout_correct);
      layout.id_attribute = field(layout_id);
      layout.special_word = field(layout_special);
      QuestionSet set;
      Check(lmcr_question_set_load(import_inputs[0].c_str(), &layout, set.out()));
      for (size_t i = 1; i < import_inputs.size(); ++i) {
        QuestionSet next, joined;
        Check(lmcr_question_set_load(import_inputs[i].c_str(), &layout, next.out()));
        const char *first = nullptr;
        Check(lmcr_question_set_name(set.get(), &first));
        std::string name = import_name.empty() ? std::string(first) + "+" : import_name;
        Check(lmcr_question_set_concat(set.get(), next.get(), name.c_str(),
                                       joined.out()));
        std::swap(set.ptr, joined.ptr);
      }
      Check(lmcr_question_set_to_jsonl(set.get(), import_out.c_str()));
      size_t n = 0;
      Check(lmcr_question_set_size(set.get(), &n));
      std::printf("wrote %zu questions to %s\n", n, import_out.c_str());
    } else if (*serve) {
      std::string spec = serve_model.empty() ? "uniform:" + std::to_string(serve_vocab)
                                             : "ngram:" + serve_model;
      if (serve_direction != "forward" && serve_direction != "backward") {
        throw Failure{LMCR_CONFIG_ERROR, "direction must be forward or backward"};
      }
      lmcr_scorer_options so;
      lmcr_scorer_options_init(&so);
      so.backward = serve_direction == "backward";
      Scorer scorer;
      Check(lmcr_scorer_open(spec.c_str(), &so, scorer.out()));
      lmcr_server_options sv;
      lmcr_server_options_init(&sv);
      sv.host = serve_host.c_str();
      sv.port = serve_port;
      sv.max_batch = serve_max_batch;
      sv.auth_token = serve_auth.empty() ? nullptr : serve_auth.c_str();
      Server server;
      Check(lmcr_server_start(scorer.get(), &sv, server.out()));
      int port = 0;
      Check(lmcr_server_port(server.get(), &port));
      if (!serve_port_file.empty()) WriteText(serve_port_file, std::to_string(port) + "\n");
      std::printf("listening on http://%s:%d (%s)\n", serve_host.c_str(), port,
                  spec.c_str());
      std::fflush(stdout);
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      while (!stop_requested) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      Check(lmcr_server_stop(server.get()));
    }
  } catch (const Failure &f) {
    std::string msg = f.message;
    for (char &c : msg) {
      if (c == '\n') c = ' ';
    }
    std::fprintf(stderr, "error: %s: %s\n", lmcr_status_name(f.status), msg.c_str());
    return static_cast<int>(f.status);
  }
  return 0;
}
