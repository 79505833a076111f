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

#include "lmcr/lmcr.h"

#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "lmcr/corpus_rank.h"
#include "lmcr/dataset.h"
#include "lmcr/evaluation.h"
#include "lmcr/ngram_model.h"
#include "lmcr/score_server.h"
#include "lmcr/scorer_spec.h"
#include "lmcr/status.h"

struct lmcr_question_set {
  lmcr::QuestionSet set;
};

struct lmcr_model {
  std::shared_ptr<lmcr::NGramModel> model;
  std::string dump;
};

struct lmcr_scorer {
  lmcr::ScorerSet set;
};

struct lmcr_report {
  std::map<std::string, std::string> sections;
  std::map<std::string, double> numbers;
};

struct lmcr_server {
  std::unique_ptr<lmcr::ScoreServer> server;
};

namespace {

thread_local std::string last_error;

lmcr_status Record(lmcr_status status, const std::string &message) {
  last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
lmcr_status Guard(Fn fn) {
  try {
    fn();
    last_error.clear();
    return LMCR_OK;
  } catch (const lmcr::Error &e) {
    return Record(static_cast<lmcr_status>(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return Record(LMCR_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception &e) {
    return Record(LMCR_INTERNAL_ERROR, e.what());
  }
}

void Require(bool ok, const char *what) {
  if (!ok) lmcr::Fail(lmcr::ErrorCode::kInvalidArgument, what);
}

std::vector<std::string> SplitList(std::string_view list) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

void CopyOut(const std::vector<double> &values, double *out, std::size_t capacity,
             std::size_t *len) {
  *len = values.size();
  if (values.size() > capacity) {
    lmcr::Fail(lmcr::ErrorCode::kInvalidArgument,
               "output buffer holds " + std::to_string(capacity) + " values, " +
                   std::to_string(values.size()) + " needed");
  }
  std::copy(values.begin(), values.end(), out);
}

}  // namespace

extern "C" {

const char *lmcr_version(void) { return "1.0.0"; }

const char *lmcr_status_name(lmcr_status status) {
  if (status == LMCR_OK) return "Ok";
  if (status >= LMCR_INVALID_ARGUMENT && status <= LMCR_IO_ERROR) {
    return lmcr::ErrorCodeName(static_cast<lmcr::ErrorCode>(status)).data();
  }
  return "InternalError";
}

const char *lmcr_last_error(void) { return last_error.c_str(); }

lmcr_status lmcr_question_set_load(const char *path, const lmcr_xml_layout *layout,
                                   lmcr_question_set **out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    lmcr::XmlLayout xml;
    if (layout != nullptr) {
      auto set = [](std::string *field, const char *value) {
        if (value != nullptr) *field = value;
      };
      set(&xml.schema, layout->schema);
      set(&xml.text, layout->text);
      set(&xml.before, layout->before);
      set(&xml.pronoun, layout->pronoun);
      set(&xml.after, layout->after);
      set(&xml.answers, layout->answers);
      set(&xml.answer, layout->answer);
      set(&xml.correct, layout->correct);
      set(&xml.id_attribute, layout->id_attribute);
      set(&xml.special_word, layout->special_word);
    }
    auto set = std::make_unique<lmcr_question_set>();
    set->set = lmcr::LoadQuestionSet(path, lmcr::TokenizePolicy{}, xml);
    *out = set.release();
  });
}

lmcr_status lmcr_question_set_from_fragments(const char *before, const char *pronoun,
                                             const char *after, const char *candidates,
                                             int gold, lmcr_question_set **out) {
  return Guard([&] {
    Require(before && pronoun && after && candidates && out, "null argument");
    std::optional<std::size_t> g;
    if (gold >= 0) g = static_cast<std::size_t>(gold);
    auto set = std::make_unique<lmcr_question_set>();
    set->set.name = "inline";
    set->set.questions.push_back(lmcr::MakeQuestionFromFragments(
        "q1", before, pronoun, after, SplitList(candidates), g, lmcr::TokenizePolicy{}));
    *out = set.release();
  });
}

lmcr_status lmcr_question_set_concat(const lmcr_question_set *a,
                                     const lmcr_question_set *b, const char *name,
                                     lmcr_question_set **out) {
  return Guard([&] {
    Require(a && b && name && out, "null argument");
    auto set = std::make_unique<lmcr_question_set>();
    set->set = lmcr::Concat(a->set, b->set, name);
    *out = set.release();
  });
}

lmcr_status lmcr_question_set_size(const lmcr_question_set *set, size_t *out) {
  return Guard([&] {
    Require(set && out, "null argument");
    *out = set->set.questions.size();
  });
}

lmcr_status lmcr_question_set_name(const lmcr_question_set *set, const char **out) {
  return Guard([&] {
    Require(set && out, "null argument");
    *out = set->set.name.c_str();
  });
}

lmcr_status lmcr_question_set_to_jsonl(const lmcr_question_set *set,
                                       const char *path) {
  return Guard([&] {
    Require(set && path, "null argument");
    lmcr::ExportJsonl(set->set, path);
  });
}

void lmcr_question_set_free(lmcr_question_set *set) { delete set; }

void lmcr_train_options_init(lmcr_train_options *options) {
  if (options == nullptr) return;
  *options = lmcr_train_options{};
  options->order = 3;
  options->smoothing = "jm";
  options->min_count = 1;
  options->em_iterations = 20;
  options->threads = 1;
}

lmcr_status lmcr_model_train(const char *corpus_path,
                             const lmcr_train_options *options, lmcr_model **out) {
  return Guard([&] {
    Require(corpus_path && options && out, "null argument");
    lmcr::TrainOptions train;
    train.order = options->order;
    train.smoothing = lmcr::ParseSmoothing(options->smoothing ? options->smoothing : "jm");
    train.direction =
        options->backward ? lmcr::Direction::kBackward : lmcr::Direction::kForward;
    if (options->max_vocab > 0) train.max_vocab = options->max_vocab;
    train.min_count = options->min_count;
    train.em_iterations = options->em_iterations;
    train.threads = options->threads;
    train.name = options->name ? options->name : lmcr::FileStem(corpus_path);
    auto corpus = lmcr::ReadCorpus(corpus_path, lmcr::TokenizePolicy{});
    std::vector<lmcr::TokenSequence> heldout;
    if (options->heldout_path != nullptr) {
      heldout = lmcr::ReadCorpus(options->heldout_path, lmcr::TokenizePolicy{});
      train.heldout = heldout;
    }
    auto model = std::make_unique<lmcr_model>();
    if (options->char_level) {
      model->model = lmcr::TrainCharNGram(corpus, train);
    } else {
      model->model = lmcr::TrainWordNGram(corpus, train);
    }
    *out = model.release();
  });
}

lmcr_status lmcr_model_load(const char *path, lmcr_model **out) {
  return Guard([&] {
    Require(path && out, "null argument");
    auto model = std::make_unique<lmcr_model>();
    model->model = lmcr::NGramModel::Load(path);
    *out = model.release();
  });
}

lmcr_status lmcr_model_save(const lmcr_model *model, const char *path) {
  return Guard([&] {
    Require(model && path, "null argument");
    model->model->Save(path);
  });
}

lmcr_status lmcr_model_dump_text(const lmcr_model *model, const char **out) {
  return Guard([&] {
    Require(model && out, "null argument");
    auto *m = const_cast<lmcr_model *>(model);
    if (m->dump.empty()) m->dump = model->model->DumpText();
    *out = m->dump.c_str();
  });
}

lmcr_status lmcr_model_vocab_size(const lmcr_model *model, uint64_t *out) {
  return Guard([&] {
    Require(model && out, "null argument");
    *out = model->model->vocab_size().value_or(0);
  });
}

lmcr_status lmcr_model_cond_logprobs(const lmcr_model *model, const char *sentence,
                                     double *out, size_t capacity, size_t *len) {
  return Guard([&] {
    Require(model && sentence && len && (out || capacity == 0), "null argument");
    auto seq = lmcr::Tokenize(sentence, lmcr::TokenizePolicy{});
    CopyOut(model->model->CondLogProbs(seq), out, capacity, len);
  });
}

void lmcr_model_free(lmcr_model *model) { delete model; }

void lmcr_scorer_options_init(lmcr_scorer_options *options) {
  if (options == nullptr) return;
  lmcr::ScorerSpecOptions defaults;
  *options = lmcr_scorer_options{};
  options->timeout_seconds = defaults.remote_timeout_seconds;
  options->batch_size = defaults.remote_batch_size;
  options->retries = defaults.remote_retries;
  options->max_in_flight = defaults.remote_max_in_flight;
}

lmcr_status lmcr_scorer_open(const char *specs, const lmcr_scorer_options *options,
                             lmcr_scorer **out) {
  return Guard([&] {
    Require(specs && out, "null argument");
    lmcr_scorer_options defaults;
    lmcr_scorer_options_init(&defaults);
    if (options == nullptr) options = &defaults;
    lmcr::ScorerSpecOptions spec;
    spec.direction =
        options->backward ? lmcr::Direction::kBackward : lmcr::Direction::kForward;
    spec.remote_timeout_seconds = options->timeout_seconds;
    if (options->auth_token != nullptr) spec.auth_token = options->auth_token;
    spec.remote_batch_size = options->batch_size;
    spec.remote_retries = options->retries;
    spec.remote_max_in_flight = options->max_in_flight;
    auto scorer = std::make_unique<lmcr_scorer>();
    scorer->set = lmcr::LoadScorers(specs, spec);
    *out = scorer.release();
  });
}

lmcr_status lmcr_scorer_set_counts(lmcr_scorer *scorer, const char *model_path) {
  return Guard([&] {
    Require(scorer && model_path, "null argument");
    scorer->set.counts = lmcr::LoadCounts(model_path);
  });
}

lmcr_status lmcr_scorer_size(const lmcr_scorer *scorer, size_t *out) {
  return Guard([&] {
    Require(scorer && out, "null argument");
    *out = scorer->set.scorers.size();
  });
}

lmcr_status lmcr_scorer_cond_logprobs(const lmcr_scorer *scorer, size_t member,
                                      const char *sentence, double *out,
                                      size_t capacity, size_t *len) {
  return Guard([&] {
    Require(scorer && sentence && len && (out || capacity == 0), "null argument");
    Require(member < scorer->set.scorers.size(), "no such ensemble member");
    auto seq = lmcr::Tokenize(sentence, lmcr::TokenizePolicy{});
    CopyOut(scorer->set.scorers[member]->CondLogProbs(seq), out, capacity, len);
  });
}

void lmcr_scorer_free(lmcr_scorer *scorer) { delete scorer; }

lmcr_status lmcr_report_text(const lmcr_report *report, const char *section,
                             const char **out) {
  return Guard([&] {
    Require(report && section && out, "null argument");
    auto it = report->sections.find(section);
    if (it == report->sections.end()) {
      lmcr::Fail(lmcr::ErrorCode::kInvalidArgument,
                 std::string("report has no section '") + section + "'");
    }
    *out = it->second.c_str();
  });
}

lmcr_status lmcr_report_number(const lmcr_report *report, const char *key,
                               double *out, int *present) {
  return Guard([&] {
    Require(report && key && out && present, "null argument");
    auto it = report->numbers.find(key);
    *present = it != report->numbers.end();
    *out = *present ? it->second : 0.0;
  });
}

void lmcr_report_free(lmcr_report *report) { delete report; }

void lmcr_eval_options_init(lmcr_eval_options *options) {
  if (options == nullptr) return;
  options->modes = "full,full_normalized,partial";
  options->combine = "mean";
  options->threads = 1;
}

lmcr_status lmcr_evaluate(const lmcr_scorer *scorer, const lmcr_question_set *set,
                          const lmcr_eval_options *options, lmcr_report **out) {
  return Guard([&] {
    Require(scorer && set && out, "null argument");
    lmcr_eval_options defaults;
    lmcr_eval_options_init(&defaults);
    if (options == nullptr) options = &defaults;
    lmcr::EvalOptions eval;
    eval.modes.clear();
    for (const auto &m : SplitList(options->modes ? options->modes : defaults.modes)) {
      eval.modes.push_back(lmcr::ParseScoreMode(m));
    }
    eval.combine = lmcr::ParseCombine(options->combine ? options->combine : "mean");
    eval.counts = scorer->set.counts.get();
    eval.threads = options->threads;
    auto pointers = scorer->set.Pointers();
    lmcr::EvalReport result = lmcr::Evaluate(set->set, pointers, eval);
    auto report = std::make_unique<lmcr_report>();
    report->sections["table"] = lmcr::RenderEvalTable(result);
    report->sections["json"] = lmcr::EvalJson(result);
    report->sections["tsv"] = lmcr::EvalTsv(result);
    report->numbers["questions"] = static_cast<double>(result.records.size());
    for (const auto &s : result.summaries) {
      std::string mode(lmcr::ScoreModeName(s.mode));
      report->numbers["correct." + mode] = static_cast<double>(s.correct);
      report->numbers["total." + mode] = static_cast<double>(s.total);
      if (s.accuracy) report->numbers["accuracy." + mode] = *s.accuracy;
    }
    if (result.correction) {
      report->numbers["wrong_full"] = static_cast<double>(result.correction->wrong_full);
      report->numbers["corrected"] = static_cast<double>(result.correction->corrected);
    }
    *out = report.release();
  });
}

void lmcr_analyze_options_init(lmcr_analyze_options *options) {
  if (options == nullptr) return;
  options->mode = "partial";
  options->top_k = 2;
  options->threads = 1;
}

lmcr_status lmcr_analyze(const lmcr_scorer *scorer, const lmcr_question_set *set,
                         const lmcr_analyze_options *options, lmcr_report **out) {
  return Guard([&] {
    Require(scorer && set && out, "null argument");
    if (scorer->set.scorers.size() != 1) {
      lmcr::Fail(lmcr::ErrorCode::kConfigError, "analysis takes exactly one scorer");
    }
    lmcr_analyze_options defaults;
    lmcr_analyze_options_init(&defaults);
    if (options == nullptr) options = &defaults;
    lmcr::AnalyzeOptions analyze;
    analyze.mode = lmcr::ParseScoreMode(options->mode ? options->mode : "partial");
    analyze.top_k = options->top_k;
    analyze.threads = options->threads;
    lmcr::AnalysisReport result =
        lmcr::Analyze(set->set, *scorer->set.scorers.front(), analyze);
    auto report = std::make_unique<lmcr_report>();
    report->sections["text"] = lmcr::RenderAnalysisText(result);
    report->sections["html"] = lmcr::RenderAnalysisHtml(result);
    report->sections["tally"] = lmcr::KeywordTallyTsv(result);
    report->sections["ratios"] = lmcr::RatioTsv(result);
    report->numbers["annotated"] = static_cast<double>(result.tally.annotated);
    report->numbers["answered"] = static_cast<double>(result.tally.answered);
    report->numbers["retrieved"] = static_cast<double>(result.tally.retrieved);
    if (result.tally.accuracy) report->numbers["accuracy"] = *result.tally.accuracy;
    *out = report.release();
  });
}

void lmcr_rank_options_init(lmcr_rank_options *options) {
  if (options == nullptr) return;
  lmcr::RankOptions defaults;
  *options = lmcr_rank_options{};
  options->top_fraction = defaults.top_fraction;
  options->max_oov_fraction = -1.0;
  options->histogram_buckets = defaults.histogram_buckets;
  options->threads = 1;
}

lmcr_status lmcr_rank_corpus(const lmcr_question_set *set, const char *corpus_path,
                             const lmcr_rank_options *options, lmcr_report **out) {
  return Guard([&] {
    Require(set && corpus_path && out, "null argument");
    lmcr_rank_options defaults;
    lmcr_rank_options_init(&defaults);
    if (options == nullptr) options = &defaults;
    lmcr::RankOptions rank;
    rank.top_fraction = options->top_fraction;
    rank.query_mode = options->per_question ? lmcr::QueryMode::kPerQuestionMax
                                            : lmcr::QueryMode::kAggregate;
    rank.histogram_buckets = options->histogram_buckets;
    rank.threads = options->threads;
    std::shared_ptr<lmcr::NGramModel> vocab_model;
    if (options->max_oov_fraction >= 0.0) {
      if (options->vocab_model_path == nullptr) {
        lmcr::Fail(lmcr::ErrorCode::kConfigError, "OOV filter needs a vocabulary model");
      }
      vocab_model = lmcr::NGramModel::Load(options->vocab_model_path);
      auto *word = dynamic_cast<lmcr::WordNGramModel *>(vocab_model.get());
      if (word == nullptr) {
        lmcr::Fail(lmcr::ErrorCode::kConfigError, "OOV filter needs a word model");
      }
      rank.known_words = &word->vocab();
      rank.max_oov_fraction = options->max_oov_fraction;
    }
    lmcr::RankResult result = lmcr::RankCorpusFile(corpus_path, set->set, rank);
    auto report = std::make_unique<lmcr_report>();
    report->sections["summary"] =
        "documents\t" + std::to_string(result.total_docs) + "\nkept\t" +
        std::to_string(result.kept.size()) + "\ndropped_low_quality\t" +
        std::to_string(result.dropped_low_quality) + "\n";
    report->sections["ranking"] = lmcr::RankingTsv(result);
    report->sections["histogram"] = lmcr::HistogramCsv(result.histogram);
    report->sections["corpus"] = lmcr::ExtractedCorpus(result);
    report->numbers["documents"] = static_cast<double>(result.total_docs);
    report->numbers["kept"] = static_cast<double>(result.kept.size());
    report->numbers["dropped"] = static_cast<double>(result.dropped_low_quality);
    *out = report.release();
  });
}

lmcr_status lmcr_contamination(const lmcr_question_set *set, const char *corpus_path,
                               double threshold, lmcr_report **out) {
  return Guard([&] {
    Require(set && corpus_path && out, "null argument");
    auto docs = lmcr::ReadDocuments(corpus_path);
    auto hits =
        lmcr::ContaminationReport(docs, set->set, threshold, lmcr::TokenizePolicy{});
    auto report = std::make_unique<lmcr_report>();
    report->sections["summary"] = "documents\t" + std::to_string(docs.size()) +
                                  "\nflagged\t" + std::to_string(hits.size()) + "\n";
    report->sections["hits"] = lmcr::ContaminationTsv(hits);
    report->numbers["documents"] = static_cast<double>(docs.size());
    report->numbers["flagged"] = static_cast<double>(hits.size());
    *out = report.release();
  });
}

void lmcr_server_options_init(lmcr_server_options *options) {
  if (options == nullptr) return;
  lmcr::ServerOptions defaults;
  *options = lmcr_server_options{};
  options->host = "127.0.0.1";
  options->max_batch = defaults.max_batch;
}

lmcr_status lmcr_server_start(const lmcr_scorer *scorer,
                              const lmcr_server_options *options,
                              lmcr_server **out) {
  return Guard([&] {
    Require(scorer && out, "null argument");
    Require(!scorer->set.scorers.empty(), "empty scorer");
    lmcr_server_options defaults;
    lmcr_server_options_init(&defaults);
    if (options == nullptr) options = &defaults;
    lmcr::ServerOptions server_options;
    if (options->host != nullptr) server_options.host = options->host;
    server_options.port = options->port;
    server_options.max_batch = options->max_batch;
    if (options->auth_token != nullptr) server_options.auth_token = options->auth_token;
    if (options->name != nullptr) server_options.name = options->name;
    auto server = std::make_unique<lmcr_server>();
    server->server = std::make_unique<lmcr::ScoreServer>(scorer->set.scorers.front(),
                                                         server_options);
    server->server->Start();
    *out = server.release();
  });
}

lmcr_status lmcr_server_port(const lmcr_server *server, int *out) {
  return Guard([&] {
    Require(server && out, "null argument");
    *out = server->server->port();
  });
}

lmcr_status lmcr_server_wait(lmcr_server *server) {
  return Guard([&] {
    Require(server != nullptr, "null argument");
    server->server->Wait();
  });
}

lmcr_status lmcr_server_stop(lmcr_server *server) {
  return Guard([&] {
    Require(server != nullptr, "null argument");
    server->server->Stop();
  });
}

void lmcr_server_free(lmcr_server *server) { delete server; }

}  // extern "C"
