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
#include "lcmr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lcmr/error.hpp"
#include "lcmr/split.hpp"

namespace lcmr {

void PlantedOptions::validate() const {
  if (num_users < 1 || num_items < 1 || num_groups < 1) {
    fail(ErrorKind::kConfig, "planted data needs users, items and groups");
  }
  if (num_groups > num_items) {
    fail(ErrorKind::kConfig, "more groups than items");
  }
  if (!(affinity > 0.0) || popularity_skew < 0.0) {
    fail(ErrorKind::kConfig, "affinity must be > 0 and skew >= 0");
  }
  if (min_interactions < 1 || max_interactions < min_interactions ||
      max_interactions > num_items) {
    fail(ErrorKind::kConfig, "bad interaction count range");
  }
  if (words_per_group < 1 || shared_words < 0 || min_words < 0 ||
      max_words < min_words) {
    fail(ErrorKind::kConfig, "bad word pool settings");
  }
  if (word_noise < 0.0 || word_noise > 1.0 ||
      (shared_words == 0 && word_noise > 0.0)) {
    fail(ErrorKind::kConfig, "word_noise needs a shared pool in [0, 1]");
  }
}

PlantedDataset make_planted(const PlantedOptions& o) {
  o.validate();
  PlantedDataset data;
  std::mt19937_64 rng = make_rng(o.seed, 100);

  data.item_group.resize(o.num_items);
  std::vector<double> popularity(o.num_items);
  std::vector<std::int32_t> rank_in_group(o.num_groups, 0);
  for (ItemId i = 0; i < o.num_items; ++i) {
    const std::int32_t g = i % o.num_groups;
    data.item_group[i] = g;
    const std::int32_t r = ++rank_in_group[g];
    popularity[i] = std::pow(static_cast<double>(r), -o.popularity_skew);
  }

  std::uniform_int_distribution<std::int32_t> pick_group(0, o.num_groups - 1);
  std::uniform_int_distribution<std::int32_t> pick_count(o.min_interactions,
                                                         o.max_interactions);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<ItemId>> lists(o.num_users);
  std::vector<std::pair<double, ItemId>> keys(o.num_items);
  data.user_group.resize(o.num_users);
  for (UserId u = 0; u < o.num_users; ++u) {
    const std::int32_t g = pick_group(rng);
    data.user_group[u] = g;
    const std::int32_t count = pick_count(rng);
    // Weighted sampling without replacement: the top `count` of
    // log(U) / w are distributed as successive weighted draws.
    for (ItemId i = 0; i < o.num_items; ++i) {
      const double w =
          popularity[i] * (data.item_group[i] == g ? o.affinity : 1.0);
      double x = unit(rng);
      while (x <= 0.0) x = unit(rng);
      keys[i] = {std::log(x) / w, i};
    }
    std::partial_sort(keys.begin(), keys.begin() + count, keys.end(),
                      [](const auto& a, const auto& b) {
                        return a.first > b.first ||
                               (a.first == b.first && a.second < b.second);
                      });
    for (std::int32_t k = 0; k < count; ++k) lists[u].push_back(keys[k].second);
  }
  data.interactions = InteractionSet(o.num_items, std::move(lists));

  const std::int32_t vocab_size = o.num_groups * o.words_per_group + o.shared_words;
  std::vector<std::string> words;
  for (std::int32_t g = 0; g < o.num_groups; ++g) {
    for (std::int32_t w = 0; w < o.words_per_group; ++w) {
      words.push_back("g" + std::to_string(g) + "w" + std::to_string(w));
    }
  }
  for (std::int32_t w = 0; w < o.shared_words; ++w) {
    words.push_back("common" + std::to_string(w));
  }
  std::uniform_int_distribution<std::int32_t> pick_words(o.min_words,
                                                         o.max_words);
  std::uniform_int_distribution<std::int32_t> group_word(0,
                                                         o.words_per_group - 1);
  std::vector<std::vector<WordId>> docs(o.num_items);
  std::vector<std::int32_t> doc_freq(vocab_size, 0);
  for (ItemId i = 0; i < o.num_items; ++i) {
    const std::int32_t n = pick_words(rng);
    for (std::int32_t k = 0; k < n; ++k) {
      if (o.shared_words > 0 && unit(rng) < o.word_noise) {
        std::uniform_int_distribution<std::int32_t> shared(0,
                                                           o.shared_words - 1);
        docs[i].push_back(o.num_groups * o.words_per_group + shared(rng));
      } else {
        docs[i].push_back(data.item_group[i] * o.words_per_group +
                          group_word(rng));
      }
    }
    std::sort(docs[i].begin(), docs[i].end());
    docs[i].erase(std::unique(docs[i].begin(), docs[i].end()), docs[i].end());
    for (WordId w : docs[i]) ++doc_freq[w];
  }
  data.corpus = ItemCorpus(vocab_size, std::move(docs));
  data.vocab = Vocabulary(std::move(words), std::move(doc_freq));
  return data;
}

}  // namespace lcmr
