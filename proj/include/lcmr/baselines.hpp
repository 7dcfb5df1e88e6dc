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

// Reference recommenders ranked under the same protocol as LCMR.
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "lcmr/corpus.hpp"
#include "lcmr/model.hpp"

namespace lcmr {

// Number of distinct train users per item.
struct PopularityTable {
  std::vector<std::int64_t> counts;

  std::int32_t num_items() const {
    return static_cast<std::int32_t>(counts.size());
  }
};

PopularityTable itempop_scores(const InteractionSet& train);

// Non-personalized: every user sees the same ordering.
class ItemPopModel : public ScoringModel {
 public:
  ItemPopModel(PopularityTable table, std::int32_t num_users);

  const PopularityTable& table() const { return table_; }
  std::int32_t num_users() const override { return num_users_; }
  std::int32_t num_items() const override { return table_.num_items(); }
  bool uses_text() const override { return false; }
  std::unique_ptr<ItemScorer> make_scorer(
      const ItemCorpus* corpus) const override;

  ModelHeader header() const;
  // The checkpoint stores counts as a float64 "popularity" parameter.
  Parameter as_parameter() const;
  static ItemPopModel from_parameter(const Parameter& p,
                                     std::int32_t num_users);

 private:
  PopularityTable table_;
  std::int32_t num_users_;
};

struct MlpConfig {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::int32_t user_dim = 100;
  std::int32_t item_dim = 100;
  // Hidden layer widths; empty reduces to sigmoid(h . x_ui).
  std::vector<std::int32_t> hidden = {100, 50};
  double init_sigma = 0.01;

  std::int32_t joint_dim() const { return user_dim + item_dim; }
  // Pyramid d -> d/2 -> d/4 over a joint dimension d.
  static std::vector<std::int32_t> default_hidden(std::int32_t joint_dim);
  void validate() const;
};

// Feed-forward interaction function on x_ui: ReLU hidden layers and a
// logistic output.
class MlpModel : public Recommender {
 public:
  MlpModel(const MlpConfig& config, std::mt19937_64& rng);
  explicit MlpModel(const MlpConfig& config);

  const MlpConfig& config() const { return config_; }
  std::int32_t num_users() const override { return config_.num_users; }
  std::int32_t num_items() const override { return config_.num_items; }
  bool uses_text() const override { return false; }

  Var forward(Tape& tape, UserId user, ItemId item,
              std::span<const WordId> words) override;
  Var forward(Tape& tape, UserId user, ItemId item,
              std::span<const WordId> words) const override;

  std::vector<Parameter*> parameters() override;
  std::vector<const Parameter*> parameters() const override;
  ModelHeader header() const override;
  std::unique_ptr<Recommender> clone() const override;

  Parameter& user_embeddings() { return user_emb_; }
  Parameter& item_embeddings() { return item_emb_; }
  Parameter& output_weights() { return output_; }
  Parameter& layer_weight(std::size_t k) { return weights_.at(k); }
  Parameter& layer_bias(std::size_t k) { return biases_.at(k); }

 private:
  template <class Self>
  static Var build(Self& self, Tape& tape, UserId user, ItemId item);
  void allocate(std::mt19937_64* rng);

  MlpConfig config_;
  Parameter user_emb_;
  Parameter item_emb_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
  Parameter output_;
};

MlpConfig mlp_config_from_header(const ModelHeader& header);

}  // namespace lcmr
