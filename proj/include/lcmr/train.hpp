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

// Mini-batch BCE training with Adam and validation-based model selection.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "lcmr/model.hpp"
#include "lcmr/ndgrad.hpp"
#include "lcmr/split.hpp"

namespace lcmr {

struct EpochRecord {
  std::int32_t epoch = 0;  // 1-based
  double loss = 0.0;
  // NaN on epochs without a validation pass.
  double val_hr = 0.0;
  double val_ndcg = 0.0;
  double seconds = 0.0;
};

struct TrainConfig {
  std::int32_t epochs = 50;
  std::int32_t batch_size = 128;
  std::int32_t neg_ratio = 1;
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::int32_t eval_every = 1;
  std::int32_t k = 10;
  // Worker threads for validation scoring.
  std::int32_t threads = 1;
  // Where best.ckpt (and optional epoch-<k>.ckpt) go; empty writes nothing.
  std::filesystem::path out_dir;
  bool save_epoch_checkpoints = false;
  // When false the seconds column is written as 0 so history files from
  // repeated runs compare byte for byte.
  bool record_seconds = true;
  // Merged into every checkpoint header this run writes.
  ModelHeader extra_header;
  // Called after each epoch's record is complete.
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::int32_t best_epoch = 0;

  const EpochRecord& best() const;
};

// Batch loss is the mean BCE over the batch; the return value is the
// example-weighted mean over the epoch.
double train_epoch(Recommender& model, const LooSplit& split,
                   const InteractionSet& observed, const ItemCorpus* corpus,
                   const TrainConfig& cfg, std::int64_t epoch_idx);

// Loss of one batch without updating anything.
double batch_loss(const Recommender& model,
                  std::span<const TrainExample> batch,
                  const ItemCorpus* corpus);

struct FitResult {
  std::unique_ptr<Recommender> best;
  TrainHistory history;
};

FitResult fit(Recommender& model, const LooSplit& split,
              const ItemCorpus* corpus, const TrainConfig& cfg);

// Header model fields plus seed and the selected epoch.
ModelHeader checkpoint_header(const Recommender& model, std::uint64_t seed,
                              const EpochRecord* best,
                              const ModelHeader& extra = {});
void save_model(const Recommender& model, const std::filesystem::path& path,
                std::uint64_t seed, const EpochRecord* best = nullptr,
                const ModelHeader& extra = {});

// CSV: "epoch,loss,val_hr10,val_ndcg10,seconds".
void log_history(const TrainHistory& history, const std::filesystem::path& path);
TrainHistory read_history(const std::filesystem::path& path);

}  // namespace lcmr
