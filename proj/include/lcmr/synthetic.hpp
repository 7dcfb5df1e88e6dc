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

// Planted-structure datasets: users and items belong to latent groups and
// item text comes from group-specific word pools.
#pragma once

#include <cstdint>
#include <vector>

#include "lcmr/corpus.hpp"

namespace lcmr {

struct PlantedOptions {
  std::int32_t num_users = 200;
  std::int32_t num_items = 400;
  std::int32_t num_groups = 2;
  // Weight multiplier for items of the user's own group.
  double affinity = 10.0;
  // Zipf exponent of item popularity inside a group; 0 is uniform.
  double popularity_skew = 1.0;
  std::int32_t min_interactions = 10;
  std::int32_t max_interactions = 30;
  std::int32_t words_per_group = 30;
  std::int32_t shared_words = 20;
  std::int32_t min_words = 3;
  std::int32_t max_words = 8;
  // Probability that a word is drawn from the shared pool.
  double word_noise = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedDataset {
  InteractionSet interactions;
  ItemCorpus corpus;
  Vocabulary vocab;
  std::vector<std::int32_t> user_group;
  std::vector<std::int32_t> item_group;
};

PlantedDataset make_planted(const PlantedOptions& options);

}  // namespace lcmr
