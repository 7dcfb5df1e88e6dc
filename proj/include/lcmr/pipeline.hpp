// Copyright 2026 The LCMR Authors
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

// End-to-end commands. Each one communicates only through files, so the
// CLI, the Python module and tests drive the same code.
//
// A prepared corpus directory holds:
//   interactions.txt  "count item item ..." per dense user
//   items.bow         "n idx:1 ..." per dense item
//   vocab.txt         one word per line with its document frequency
//   user_ids.txt, item_ids.txt  raw id per dense id
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcmr/baselines.hpp"
#include "lcmr/config.hpp"
#include "lcmr/corpus.hpp"
#include "lcmr/eval.hpp"
#include "lcmr/model.hpp"
#include "lcmr/split.hpp"
#include "lcmr/synthetic.hpp"
#include "lcmr/train.hpp"

namespace lcmr {

struct CorpusStats {
  std::int64_t users = 0;
  std::int64_t items = 0;
  std::int64_t feedback = 0;
  // Word occurrences over all items, counting repeats.
  std::int64_t words = 0;
  std::int64_t vocabulary = 0;
  double density_pct = 0.0;
  double avg_words_per_item = 0.0;
};

// `word_occurrences` < 0 counts each distinct item word once.
CorpusStats corpus_stats(const InteractionSet& interactions,
                         const ItemCorpus& corpus,
                         std::int64_t word_occurrences = -1);
// Table layout: one "name value" row per statistic.
void print_stats(const CorpusStats& stats, std::ostream& out);

struct PrepareOptions {
  std::filesystem::path interactions;
  InteractionFormat interactions_format = InteractionFormat::kCiteulikeUsers;
  std::filesystem::path text;
  TextFormat text_format = TextFormat::kRawTokens;
  // Required for bow-counts input when words should be named; optional
  // otherwise.
  std::filesystem::path vocab;
  std::int32_t vocab_size = 8000;
  // Empty uses the bundled English list.
  std::filesystem::path stopwords;
  std::filesystem::path out_dir;
};

CorpusStats cmd_prepare(const PrepareOptions& options, std::ostream& log);

struct PreparedCorpus {
  InteractionSet interactions;
  ItemCorpus corpus;
  Vocabulary vocab;
  IdMaps ids;
};

PreparedCorpus load_prepared(const std::filesystem::path& dir);
// Item text only (items.bow and vocab.txt).
ItemCorpus load_item_text(const std::filesystem::path& dir);
void write_prepared(const PreparedCorpus& data,
                    const std::filesystem::path& dir);

// Planted-structure corpus written in prepared layout.
CorpusStats cmd_synth(const PlantedOptions& options,
                      const std::filesystem::path& out_dir, std::ostream& log);

struct SplitCommand {
  std::filesystem::path corpus_dir;
  std::uint64_t seed = 0;
  std::int32_t min_interactions = 3;
  // Defaults to <corpus_dir>/split.txt.
  std::filesystem::path out;
};

LooSplit cmd_split(const SplitCommand& options, std::ostream& log);

// Builds an untrained model for a config over the given split and corpus.
std::unique_ptr<Recommender> make_model(const RunConfig& cfg,
                                        const LooSplit& split,
                                        const ItemCorpus* corpus);

struct TrainOutcome {
  FitResult fit;
  std::filesystem::path out_dir;
};

// Writes best.ckpt, history.csv and config.txt (the resolved config).
TrainOutcome cmd_train(RunConfig cfg, std::ostream& log);

// Any checkpoint kind: lcmr, mlp or itempop.
struct LoadedModel {
  ModelHeader header;
  std::unique_ptr<ScoringModel> model;
  // Null for itempop.
  Recommender* recommender = nullptr;
};

LoadedModel load_model(const std::filesystem::path& checkpoint);

struct EvaluateCommand {
  std::filesystem::path checkpoint;
  std::filesystem::path split;
  // Falls back to the checkpoint's corpus_dir entry.
  std::filesystem::path corpus_dir;
  std::int32_t k = 10;
  EvalTarget target = EvalTarget::kTest;
  std::int32_t threads = 1;
  // Defaults to <checkpoint dir>/report-<target>.txt.
  std::filesystem::path report;
};

EvalReport cmd_evaluate(const EvaluateCommand& options, std::ostream& log);

// Popularity checkpoint from a split's train part.
void cmd_itempop(const std::filesystem::path& split_path,
                 const std::filesystem::path& out, std::ostream& log);

struct AblationRow {
  std::string label;
  Variant variant = Variant::kFull;
  double hr = 0.0;
  double ndcg = 0.0;
  // (full - this) / full * 100; zero for the full model.
  double hr_drop_pct = 0.0;
  double ndcg_drop_pct = 0.0;
};

// Trains full, no_local and no_central with identical seeds and split, then
// reports test metrics of each best checkpoint.
std::vector<AblationRow> cmd_ablate(RunConfig cfg, std::ostream& log);
void print_ablation(const std::vector<AblationRow>& rows, std::int32_t k,
                    std::ostream& out);

struct RecommendCommand {
  std::filesystem::path checkpoint;
  std::filesystem::path split;
  std::filesystem::path corpus_dir;
  UserId user = 0;
  std::int32_t n = 10;
};

// Items outside the user's train list, best first (ties by item id).
std::vector<std::pair<ItemId, double>> cmd_recommend(
    const RecommendCommand& options);

}  // namespace lcmr
