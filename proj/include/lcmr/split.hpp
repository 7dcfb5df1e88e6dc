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

// Leave-one-out splits and negative sampling.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "lcmr/corpus.hpp"

namespace lcmr {

struct HeldOut {
  UserId user = 0;
  ItemId item = 0;
  bool operator==(const HeldOut&) const = default;
};

// Per eligible user: one test item, one validation item, and a fixed list of
// evaluation negatives shared by both (and by every model ranked on this
// split). Users below the eligibility threshold keep everything in train.
struct LooSplit {
  InteractionSet train;
  std::vector<HeldOut> val;    // ordered by user
  std::vector<HeldOut> test;   // aligned with val
  std::vector<std::vector<ItemId>> candidates;  // aligned with test
  std::vector<UserId> excluded;
  std::uint64_t seed = 0;
  std::int32_t min_interactions = 3;

  std::int32_t num_users() const { return train.num_users(); }
  std::int32_t num_items() const { return train.num_items(); }
  // train + val + test.
  InteractionSet observed() const;

  bool operator==(const LooSplit&) const = default;
};

struct SplitOptions {
  std::uint64_t seed = 0;
  std::int32_t min_interactions = 3;
  std::int32_t num_negatives = 99;
};

LooSplit loo_split(const InteractionSet& interactions,
                   const SplitOptions& options);

// k distinct items the user never interacted with (in `observed`) and that
// differ from `heldout`.
std::vector<ItemId> sample_eval_candidates(const InteractionSet& observed,
                                           UserId user, ItemId heldout,
                                           std::int32_t k,
                                           std::mt19937_64& rng);

struct TrainExample {
  UserId user = 0;
  ItemId item = 0;
  std::int8_t label = 0;
  bool operator==(const TrainExample&) const = default;
};

// Every train positive plus `ratio` negatives per positive drawn uniformly
// from items absent from the user's observed list; shuffled. A pure function
// of (split, ratio, seed, epoch).
std::vector<TrainExample> make_epoch_examples(const LooSplit& split,
                                              const InteractionSet& observed,
                                              std::int32_t ratio,
                                              std::uint64_t seed,
                                              std::int64_t epoch);

// Negatives only, in positive order, before shuffling.
std::vector<TrainExample> sample_train_negatives(const InteractionSet& train,
                                                 const InteractionSet& observed,
                                                 std::int32_t ratio,
                                                 std::mt19937_64& rng);

// Sub-stream generator: deterministic from (seed, stream, index).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index = 0);

void write_split(const LooSplit& split, const std::filesystem::path& path);
LooSplit read_split(const std::filesystem::path& path);

}  // namespace lcmr
