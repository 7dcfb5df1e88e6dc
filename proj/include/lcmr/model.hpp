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
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcmr/corpus.hpp"
#include "lcmr/ndgrad.hpp"

namespace lcmr {

// Scores item lists for one user at a time. Not thread-safe; make one per
// thread.
class ItemScorer {
 public:
  virtual ~ItemScorer() = default;
  virtual void score(UserId user, std::span<const ItemId> items,
                     std::span<double> out) = 0;
};

// Anything that can rank items: trained networks and popularity alike.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;
  virtual std::int32_t num_users() const = 0;
  virtual std::int32_t num_items() const = 0;
  virtual bool uses_text() const = 0;
  // `corpus` may be null when uses_text() is false.
  virtual std::unique_ptr<ItemScorer> make_scorer(
      const ItemCorpus* corpus) const = 0;
};

// Key/value header stored alongside parameters in checkpoints.
using ModelHeader = std::map<std::string, std::string>;

// A trainable network producing r_hat = P(interaction) for (user, item).
class Recommender : public ScoringModel {
 public:
  // Records the forward pass with gradient tracking; returns r_hat (1x1).
  virtual Var forward(Tape& tape, UserId user, ItemId item,
                      std::span<const WordId> words) = 0;
  // Read-only forward pass.
  virtual Var forward(Tape& tape, UserId user, ItemId item,
                      std::span<const WordId> words) const = 0;

  virtual std::vector<Parameter*> parameters() = 0;
  virtual std::vector<const Parameter*> parameters() const = 0;
  virtual ModelHeader header() const = 0;
  virtual std::unique_ptr<Recommender> clone() const = 0;

  std::unique_ptr<ItemScorer> make_scorer(
      const ItemCorpus* corpus) const override;
};

// Scores `items` for `user` by running the read-only forward pass on
// `scratch`. Bit-identical to forward() one item at a time.
void score_items(const Recommender& model, UserId user,
                 std::span<const ItemId> items, const ItemCorpus* corpus,
                 Tape& scratch, std::span<double> out);
std::vector<double> score_items(const Recommender& model, UserId user,
                                std::span<const ItemId> items,
                                const ItemCorpus* corpus);

enum class Variant { kFull, kNoLocal, kNoCentral, kEmbeddingOnly };
Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant v);

struct LcmrConfig {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::int32_t vocab_size = 0;    // D; 0 when no text is used
  std::int32_t user_dim = 100;    // d1
  std::int32_t item_dim = 100;    // d2
  std::int32_t hops = 3;          // L
  std::int32_t memory_size = 100; // N
  double beta = 0.0;              // 0 selects (d1 + d2)^-1/2
  Variant variant = Variant::kFull;
  std::int32_t max_words_per_item = 0;  // 0: no cap
  double init_sigma = 0.01;

  std::int32_t joint_dim() const { return user_dim + item_dim; }
  double effective_beta() const;
  bool uses_central() const {
    return variant == Variant::kFull || variant == Variant::kNoLocal;
  }
  bool uses_local() const {
    return variant == Variant::kFull || variant == Variant::kNoCentral;
  }
  // Sets user_dim = item_dim = d / 2 (d must be even).
  void set_joint_dim(std::int32_t d);
  void validate() const;
};

// Per-hop attention weights and intermediate representations of one pass.
struct ForwardTrace {
  std::vector<double> joint_embedding;                 // x_ui
  std::vector<std::vector<double>> central_attention;  // per hop, N each
  std::vector<std::vector<double>> local_attention;    // per hop, n_i each
  std::vector<double> central_output;                  // z^c (may be empty)
  std::vector<double> local_output;                    // z^l (may be empty)
  std::vector<double> joint_output;                    // z_ui
  bool empty_text = false;
  double prediction = 0.0;
};

// LCMR: joint embedding, multi-hop centralized memory (own K, M per hop),
// multi-hop local memory over the item's words (A, C shared across hops),
// concatenation and a logistic output layer without bias.
class LcmrModel : public Recommender {
 public:
  LcmrModel(const LcmrConfig& config, std::mt19937_64& rng);
  // Zero-initialized; used when loading checkpoints.
  explicit LcmrModel(const LcmrConfig& config);

  const LcmrConfig& config() const { return config_; }

  std::int32_t num_users() const override { return config_.num_users; }
  std::int32_t num_items() const override { return config_.num_items; }
  bool uses_text() const override { return config_.uses_local(); }

  Var forward(Tape& tape, UserId user, ItemId item,
              std::span<const WordId> words) override;
  Var forward(Tape& tape, UserId user, ItemId item,
              std::span<const WordId> words) const override;

  ForwardTrace trace(UserId user, ItemId item,
                     std::span<const WordId> words) const;

  std::vector<Parameter*> parameters() override;
  std::vector<const Parameter*> parameters() const override;
  ModelHeader header() const override;
  std::unique_ptr<Recommender> clone() const override;

  Parameter& user_embeddings() { return user_emb_; }
  Parameter& item_embeddings() { return item_emb_; }
  Parameter& output_weights() { return output_; }
  Parameter& central_keys(std::int32_t hop) { return central_keys_.at(hop); }
  Parameter& central_memory(std::int32_t hop) {
    return central_memory_.at(hop);
  }
  Parameter& word_keys() { return word_keys_; }
  Parameter& word_memory() { return word_memory_; }
  const Parameter& user_embeddings() const { return user_emb_; }
  const Parameter& item_embeddings() const { return item_emb_; }
  const Parameter& output_weights() const { return output_; }
  const Parameter& central_keys(std::int32_t hop) const {
    return central_keys_.at(hop);
  }
  const Parameter& central_memory(std::int32_t hop) const {
    return central_memory_.at(hop);
  }
  const Parameter& word_keys() const { return word_keys_; }
  const Parameter& word_memory() const { return word_memory_; }

  // Building blocks, exposed for tests. The forward() composition is
  // joint_embed -> {centralized_module, local_module} -> concat -> sigmoid.
  template <class Self>
  static Var joint_embed(Self& self, Tape& tape, UserId user, ItemId item);
  template <class Self>
  static Var centralized_module(Self& self, Tape& tape, Var joint,
                                std::vector<Var>* hops = nullptr);
  // Returns an invalid Var for an empty word list (callers use zeros).
  template <class Self>
  static Var local_module(Self& self, Tape& tape, Var joint,
                          std::span<const WordId> words,
                          std::vector<Var>* hops = nullptr);

 private:
  template <class Self>
  static Var build(Self& self, Tape& tape, UserId user, ItemId item,
                   std::span<const WordId> words, ForwardTrace* trace);

  void allocate(std::mt19937_64* rng);

  LcmrConfig config_;
  Parameter user_emb_;   // P: m x d1
  Parameter item_emb_;   // Q: n x d2
  std::vector<Parameter> central_keys_;    // K^c per hop: N x d
  std::vector<Parameter> central_memory_;  // M^c per hop: N x d
  Parameter word_keys_;    // A: D x d
  Parameter word_memory_;  // C: D x d
  Parameter output_;       // h: 2d (full) or d
};

LcmrConfig lcmr_config_from_header(const ModelHeader& header);

}  // namespace lcmr
