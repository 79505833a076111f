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

// C interface of the lmcr pronoun-resolution toolkit.
//
// Every call returns an lmcr_status; on failure lmcr_last_error() describes
// the problem for the calling thread. Handles are opaque and owned by the
// caller, who releases them with the matching *_free function. Strings
// returned through out-parameters stay valid until their owning handle is
// freed.

#ifndef LMCR_LMCR_H_
#define LMCR_LMCR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LMCR_API __declspec(dllexport)
#else
#define LMCR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lmcr_status {
  LMCR_OK = 0,
  LMCR_INVALID_ARGUMENT = 1,
  LMCR_EMPTY_TEXT = 2,
  LMCR_INVALID_ORDER = 3,
  LMCR_EMPTY_CORPUS = 4,
  LMCR_PARSE_ERROR = 5,
  LMCR_SCHEMA_ERROR = 6,
  LMCR_DUPLICATE_ID = 7,
  LMCR_FORMAT_ERROR = 8,
  LMCR_UNAVAILABLE = 9,
  LMCR_PROTOCOL_ERROR = 10,
  LMCR_CONFIG_ERROR = 11,
  LMCR_EMPTY_SUFFIX = 12,
  LMCR_EMPTY_DATASET = 13,
  LMCR_IO_ERROR = 14,
  LMCR_INTERNAL_ERROR = 99
} lmcr_status;

LMCR_API const char *lmcr_version(void);
// "InvalidArgument", "EmptyText", ...
LMCR_API const char *lmcr_status_name(lmcr_status status);
// Message of the last failed call on this thread; empty after success.
LMCR_API const char *lmcr_last_error(void);

// ---------------------------------------------------------------------------
// Question sets

typedef struct lmcr_question_set lmcr_question_set;

// Element names for XML import; NULL fields keep the defaults
// (schema, text, txt1, pron, txt2, answers, answer, correctAnswer, id).
typedef struct lmcr_xml_layout {
  const char *schema;
  const char *text;
  const char *before;
  const char *pronoun;
  const char *after;
  const char *answers;
  const char *answer;
  const char *correct;
  const char *id_attribute;
  const char *special_word;
} lmcr_xml_layout;

// .xml files use `layout` (may be NULL); anything else is read as JSON lines.
LMCR_API lmcr_status lmcr_question_set_load(const char *path,
                                            const lmcr_xml_layout *layout,
                                            lmcr_question_set **out);
// A single question given as the text around the pronoun. `candidates` is
// comma-separated; `gold` < 0 means unknown.
LMCR_API lmcr_status lmcr_question_set_from_fragments(
    const char *before, const char *pronoun, const char *after,
    const char *candidates, int gold, lmcr_question_set **out);
LMCR_API lmcr_status lmcr_question_set_concat(const lmcr_question_set *a,
                                              const lmcr_question_set *b,
                                              const char *name,
                                              lmcr_question_set **out);
LMCR_API lmcr_status lmcr_question_set_size(const lmcr_question_set *set,
                                            size_t *out);
LMCR_API lmcr_status lmcr_question_set_name(const lmcr_question_set *set,
                                            const char **out);
// JSON lines, one question per line.
LMCR_API lmcr_status lmcr_question_set_to_jsonl(const lmcr_question_set *set,
                                                const char *path);
LMCR_API void lmcr_question_set_free(lmcr_question_set *set);

// ---------------------------------------------------------------------------
// N-gram models

typedef struct lmcr_model lmcr_model;

typedef struct lmcr_train_options {
  int order;
  // "laplace:<alpha>", "jm" or "jm:<l1>,<l2>,...".
  const char *smoothing;
  int backward;
  int char_level;
  // 0 keeps every word.
  size_t max_vocab;
  uint64_t min_count;
  // Optional held-out corpus for tuning interpolation weights.
  const char *heldout_path;
  int em_iterations;
  int threads;
  const char *name;
} lmcr_train_options;

LMCR_API void lmcr_train_options_init(lmcr_train_options *options);
// One sentence per non-empty line.
LMCR_API lmcr_status lmcr_model_train(const char *corpus_path,
                                      const lmcr_train_options *options,
                                      lmcr_model **out);
LMCR_API lmcr_status lmcr_model_load(const char *path, lmcr_model **out);
LMCR_API lmcr_status lmcr_model_save(const lmcr_model *model, const char *path);
// "order<TAB>n-gram<TAB>count" listing.
LMCR_API lmcr_status lmcr_model_dump_text(const lmcr_model *model,
                                          const char **out);
LMCR_API lmcr_status lmcr_model_vocab_size(const lmcr_model *model,
                                           uint64_t *out);
// Tokenizes `sentence` and writes log P(w_t | w_<t) for every position after
// <s> into `out`. `*len` receives the count; fails if `capacity` is short.
LMCR_API lmcr_status lmcr_model_cond_logprobs(const lmcr_model *model,
                                              const char *sentence, double *out,
                                              size_t capacity, size_t *len);
LMCR_API void lmcr_model_free(lmcr_model *model);

// ---------------------------------------------------------------------------
// Scorer ensembles

typedef struct lmcr_scorer lmcr_scorer;

typedef struct lmcr_scorer_options {
  int backward;
  double timeout_seconds;
  const char *auth_token;
  size_t batch_size;
  int retries;
  int max_in_flight;
} lmcr_scorer_options;

LMCR_API void lmcr_scorer_options_init(lmcr_scorer_options *options);
// Comma-separated specs: "ngram:<path>", "remote:http://host:port",
// "uniform:<V>".
LMCR_API lmcr_status lmcr_scorer_open(const char *specs,
                                      const lmcr_scorer_options *options,
                                      lmcr_scorer **out);
// Unigram counts for full-normalized scoring from a word model file.
LMCR_API lmcr_status lmcr_scorer_set_counts(lmcr_scorer *scorer,
                                            const char *model_path);
LMCR_API lmcr_status lmcr_scorer_size(const lmcr_scorer *scorer, size_t *out);
LMCR_API lmcr_status lmcr_scorer_cond_logprobs(const lmcr_scorer *scorer,
                                               size_t member,
                                               const char *sentence,
                                               double *out, size_t capacity,
                                               size_t *len);
LMCR_API void lmcr_scorer_free(lmcr_scorer *scorer);

// ---------------------------------------------------------------------------
// Reports

// Rendered results. Sections depend on the producing call:
//   eval / resolve: "table", "json", "tsv"
//   analyze:        "text", "html", "tally", "ratios"
//   rank:           "summary", "ranking", "histogram", "corpus"
//   contamination:  "summary", "hits"
typedef struct lmcr_report lmcr_report;

LMCR_API lmcr_status lmcr_report_text(const lmcr_report *report,
                                      const char *section, const char **out);
// Named numbers, e.g. "accuracy.partial", "correct.full", "kept".
// `*present` is 0 when the value does not exist (such as accuracy without
// gold answers).
LMCR_API lmcr_status lmcr_report_number(const lmcr_report *report,
                                        const char *key, double *out,
                                        int *present);
LMCR_API void lmcr_report_free(lmcr_report *report);

typedef struct lmcr_eval_options {
  // Comma-separated subset of "full,full_normalized,partial".
  const char *modes;
  // "mean" or "vote".
  const char *combine;
  int threads;
} lmcr_eval_options;

LMCR_API void lmcr_eval_options_init(lmcr_eval_options *options);
LMCR_API lmcr_status lmcr_evaluate(const lmcr_scorer *scorer,
                                   const lmcr_question_set *set,
                                   const lmcr_eval_options *options,
                                   lmcr_report **out);

typedef struct lmcr_analyze_options {
  // "full" or "partial".
  const char *mode;
  size_t top_k;
  int threads;
} lmcr_analyze_options;

LMCR_API void lmcr_analyze_options_init(lmcr_analyze_options *options);
// Uses the single member of `scorer`; its direction selects forward or
// backward analysis.
LMCR_API lmcr_status lmcr_analyze(const lmcr_scorer *scorer,
                                  const lmcr_question_set *set,
                                  const lmcr_analyze_options *options,
                                  lmcr_report **out);

typedef struct lmcr_rank_options {
  double top_fraction;
  int per_question;
  // Negative disables the filter; needs `vocab_model_path`.
  double max_oov_fraction;
  const char *vocab_model_path;
  int histogram_buckets;
  int threads;
} lmcr_rank_options;

LMCR_API void lmcr_rank_options_init(lmcr_rank_options *options);
// One document per non-blank line of a plain or gzip file.
LMCR_API lmcr_status lmcr_rank_corpus(const lmcr_question_set *set,
                                      const char *corpus_path,
                                      const lmcr_rank_options *options,
                                      lmcr_report **out);
LMCR_API lmcr_status lmcr_contamination(const lmcr_question_set *set,
                                        const char *corpus_path,
                                        double threshold, lmcr_report **out);

// ---------------------------------------------------------------------------
// Scoring server

typedef struct lmcr_server lmcr_server;

typedef struct lmcr_server_options {
  const char *host;
  // 0 picks a free port.
  int port;
  size_t max_batch;
  const char *auth_token;
  const char *name;
} lmcr_server_options;

LMCR_API void lmcr_server_options_init(lmcr_server_options *options);
// Serves member 0 of `scorer`, which must outlive the server.
LMCR_API lmcr_status lmcr_server_start(const lmcr_scorer *scorer,
                                       const lmcr_server_options *options,
                                       lmcr_server **out);
LMCR_API lmcr_status lmcr_server_port(const lmcr_server *server, int *out);
// Blocks until lmcr_server_stop() is called from another thread.
LMCR_API lmcr_status lmcr_server_wait(lmcr_server *server);
LMCR_API lmcr_status lmcr_server_stop(lmcr_server *server);
LMCR_API void lmcr_server_free(lmcr_server *server);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // LMCR_LMCR_H_
