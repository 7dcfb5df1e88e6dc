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
#include "lcmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lcmr/error.hpp"

namespace lcmr {

namespace {

class TapeScorer final : public ItemScorer {
 public:
  TapeScorer(const Recommender& model, const ItemCorpus* corpus)
      : model_(model), corpus_(corpus) {}

  void score(UserId user, std::span<const ItemId> items,
             std::span<double> out) override {
    score_items(model_, user, items, corpus_, tape_, out);
  }

 private:
  const Recommender& model_;
  const ItemCorpus* corpus_;
  Tape tape_;
};

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

std::unique_ptr<ItemScorer> Recommender::make_scorer(
    const ItemCorpus* corpus) const {
  if (uses_text()) {
    if (corpus == nullptr) {
      fail(ErrorKind::kConfig, "model variant needs item text but no corpus "
                               "was provided");
    }
    if (corpus->num_items() < num_items()) {
      fail(ErrorKind::kConfig, "item corpus covers " +
                                   std::to_string(corpus->num_items()) +
                                   " items, model has " +
                                   std::to_string(num_items()));
    }
  }
  return std::make_unique<TapeScorer>(*this, corpus);
}

void score_items(const Recommender& model, UserId user,
                 std::span<const ItemId> items, const ItemCorpus* corpus,
                 Tape& scratch, std::span<double> out) {
  if (out.size() != items.size()) {
    fail(ErrorKind::kInvalidArgument, "score_items: output size mismatch");
  }
  if (model.uses_text() && corpus == nullptr) {
    fail(ErrorKind::kConfig, "score_items: model needs item text");
  }
  for (std::size_t k = 0; k < items.size(); ++k) {
    scratch.reset();
    std::span<const WordId> words;
    if (model.uses_text()) words = corpus->words(items[k]);
    out[k] = scratch.scalar(model.forward(scratch, user, items[k], words));
  }
}

std::vector<double> score_items(const Recommender& model, UserId user,
                                std::span<const ItemId> items,
                                const ItemCorpus* corpus) {
  Tape tape;
  std::vector<double> out(items.size());
  score_items(model, user, items, corpus, tape, out);
  return out;
}

// ---------------------------------------------------------------------------
// Config

Variant parse_variant(std::string_view name) {
  if (name == "full") return Variant::kFull;
  if (name == "no_local") return Variant::kNoLocal;
  if (name == "no_central") return Variant::kNoCentral;
  if (name == "embedding_only") return Variant::kEmbeddingOnly;
  fail(ErrorKind::kConfig, "unknown variant '" + std::string(name) +
                               "' (full|no_local|no_central|embedding_only)");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoLocal: return "no_local";
    case Variant::kNoCentral: return "no_central";
    case Variant::kEmbeddingOnly: return "embedding_only";
  }
  return "full";
}

double LcmrConfig::effective_beta() const {
  return beta > 0.0 ? beta : 1.0 / std::sqrt(static_cast<double>(joint_dim()));
}

void LcmrConfig::set_joint_dim(std::int32_t d) {
  if (d < 2 || d % 2 != 0) {
    fail(ErrorKind::kConfig, "joint dimension must be even and >= 2, got " +
                                 std::to_string(d));
  }
  user_dim = item_dim = d / 2;
}

void LcmrConfig::validate() const {
  if (num_users < 1 || num_items < 1) {
    fail(ErrorKind::kConfig, "model needs at least one user and one item");
  }
  if (user_dim < 1 || item_dim < 1) {
    fail(ErrorKind::kConfig, "embedding dimensions must be >= 1");
  }
  if (hops < 1) fail(ErrorKind::kConfig, "hops must be >= 1");
  if (memory_size < 1) fail(ErrorKind::kConfig, "memory_size must be >= 1");
  if (beta < 0.0 || !std::isfinite(beta)) {
    fail(ErrorKind::kConfig, "beta must be > 0 (or 0 for the default)");
  }
  if (!(init_sigma > 0.0)) fail(ErrorKind::kConfig, "init_sigma must be > 0");
  if (max_words_per_item < 0) {
    fail(ErrorKind::kConfig, "max_words_per_item must be >= 0");
  }
  if (uses_local() && vocab_size < 1) {
    fail(ErrorKind::kConfig, std::string("variant ") +
                                 std::string(variant_name(variant)) +
                                 " needs item text (vocabulary size >= 1)");
  }
}

// ---------------------------------------------------------------------------
// LcmrModel

LcmrModel::LcmrModel(const LcmrConfig& config, std::mt19937_64& rng)
    : config_(config) {
  config_.validate();
  allocate(&rng);
}

LcmrModel::LcmrModel(const LcmrConfig& config) : config_(config) {
  config_.validate();
  allocate(nullptr);
}

void LcmrModel::allocate(std::mt19937_64* rng) {
  const auto make = [&](std::string name, std::vector<std::size_t> shape) {
    if (rng != nullptr) {
      return init_gaussian(std::move(name), std::move(shape),
                           config_.init_sigma, *rng);
    }
    return Parameter(std::move(name), std::move(shape));
  };
  const auto d = static_cast<std::size_t>(config_.joint_dim());
  const auto slots = static_cast<std::size_t>(config_.memory_size);
  user_emb_ = make("P", {static_cast<std::size_t>(config_.num_users),
                         static_cast<std::size_t>(config_.user_dim)});
  item_emb_ = make("Q", {static_cast<std::size_t>(config_.num_items),
                         static_cast<std::size_t>(config_.item_dim)});
  if (config_.uses_central()) {
    for (std::int32_t hop = 0; hop < config_.hops; ++hop) {
      central_keys_.push_back(
          make("Kc" + std::to_string(hop + 1), {slots, d}));
      central_memory_.push_back(
          make("Mc" + std::to_string(hop + 1), {slots, d}));
    }
  }
  if (config_.uses_local()) {
    const auto vocab = static_cast<std::size_t>(config_.vocab_size);
    word_keys_ = make("A", {vocab, d});
    word_memory_ = make("C", {vocab, d});
  }
  const std::size_t out_dim = config_.variant == Variant::kFull ? 2 * d : d;
  output_ = make("h", {out_dim});
}

template <class Self>
Var LcmrModel::joint_embed(Self& self, Tape& tape, UserId user, ItemId item) {
  const Var pu = tape.embed_lookup(self.user_emb_, user);
  const Var qi = tape.embed_lookup(self.item_emb_, item);
  return tape.concat(pu, qi);
}

template <class Self>
Var LcmrModel::centralized_module(Self& self, Tape& tape, Var joint,
                                  std::vector<Var>* hops) {
  const double beta = self.config_.effective_beta();
  Var query = joint;
  for (std::int32_t hop = 0; hop < self.config_.hops; ++hop) {
    const Var keys = tape.param(self.central_keys_[hop]);
    const Var memory = tape.param(self.central_memory_[hop]);
    query = tape.attend(query, keys, memory, beta);
    if (hops != nullptr) hops->push_back(query);
  }
  return query;
}

template <class Self>
Var LcmrModel::local_module(Self& self, Tape& tape, Var joint,
                            std::span<const WordId> words,
                            std::vector<Var>* hops) {
  // Set semantics: the memory is the distinct words in ascending order, so
  // any permutation of the input gives bit-identical results.
  std::vector<WordId> sorted;
  if (!std::is_sorted(words.begin(), words.end()) ||
      std::adjacent_find(words.begin(), words.end()) != words.end()) {
    sorted.assign(words.begin(), words.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    words = sorted;
  }
  const auto cap = static_cast<std::size_t>(self.config_.max_words_per_item);
  if (cap > 0 && words.size() > cap) words = words.first(cap);
  if (words.empty()) return Var{};

  const double beta = self.config_.effective_beta();
  const Var keys = tape.gather_rows(self.word_keys_, words);
  const Var memory = tape.gather_rows(self.word_memory_, words);
  Var query = joint;
  for (std::int32_t hop = 0; hop < self.config_.hops; ++hop) {
    query = tape.attend(query, keys, memory, beta);
    if (hops != nullptr) hops->push_back(query);
  }
  return query;
}

template <class Self>
Var LcmrModel::build(Self& self, Tape& tape, UserId user, ItemId item,
                     std::span<const WordId> words, ForwardTrace* trace) {
  const LcmrConfig& cfg = self.config_;
  const Var joint = joint_embed(self, tape, user, item);
  std::vector<Var> central_hops;
  std::vector<Var> local_hops;
  std::vector<Var>* ch = trace != nullptr ? &central_hops : nullptr;
  std::vector<Var>* lh = trace != nullptr ? &local_hops : nullptr;

  Var central;
  Var local;
  if (cfg.uses_central()) central = centralized_module(self, tape, joint, ch);
  bool empty_text = false;
  if (cfg.uses_local()) {
    local = local_module(self, tape, joint, words, lh);
    if (!local.valid()) {
      empty_text = true;
      const std::vector<double> zeros(cfg.joint_dim(), 0.0);
      local = tape.constant(zeros, 1, zeros.size());
    }
  }

  Var z;
  switch (cfg.variant) {
    case Variant::kFull: z = tape.concat(central, local); break;
    case Variant::kNoLocal: z = central; break;
    case Variant::kNoCentral: z = local; break;
    case Variant::kEmbeddingOnly: z = joint; break;
  }
  const Var h = tape.param(self.output_);
  const Var pred = tape.sigmoid_dot(h, z);

  if (trace != nullptr) {
    auto copy = [&](Var v) {
      auto s = tape.value(v);
      return std::vector<double>(s.begin(), s.end());
    };
    trace->joint_embedding = copy(joint);
    for (Var v : central_hops) {
      auto a = tape.attention_weights(v);
      trace->central_attention.emplace_back(a.begin(), a.end());
    }
    for (Var v : local_hops) {
      auto a = tape.attention_weights(v);
      trace->local_attention.emplace_back(a.begin(), a.end());
    }
    if (central.valid()) trace->central_output = copy(central);
    if (local.valid()) trace->local_output = copy(local);
    trace->joint_output = copy(z);
    trace->empty_text = empty_text;
    trace->prediction = tape.scalar(pred);
  }
  return pred;
}

template Var LcmrModel::joint_embed<LcmrModel>(LcmrModel&, Tape&, UserId,
                                               ItemId);
template Var LcmrModel::joint_embed<const LcmrModel>(const LcmrModel&, Tape&,
                                                     UserId, ItemId);
template Var LcmrModel::centralized_module<LcmrModel>(LcmrModel&, Tape&, Var,
                                                      std::vector<Var>*);
template Var LcmrModel::centralized_module<const LcmrModel>(
    const LcmrModel&, Tape&, Var, std::vector<Var>*);
template Var LcmrModel::local_module<LcmrModel>(LcmrModel&, Tape&, Var,
                                                std::span<const WordId>,
                                                std::vector<Var>*);
template Var LcmrModel::local_module<const LcmrModel>(const LcmrModel&, Tape&,
                                                      Var,
                                                      std::span<const WordId>,
                                                      std::vector<Var>*);

Var LcmrModel::forward(Tape& tape, UserId user, ItemId item,
                       std::span<const WordId> words) {
  return build(*this, tape, user, item, words, nullptr);
}

Var LcmrModel::forward(Tape& tape, UserId user, ItemId item,
                       std::span<const WordId> words) const {
  return build(*this, tape, user, item, words, nullptr);
}

ForwardTrace LcmrModel::trace(UserId user, ItemId item,
                              std::span<const WordId> words) const {
  Tape tape;
  ForwardTrace trace;
  build(*this, tape, user, item, words, &trace);
  return trace;
}

std::vector<Parameter*> LcmrModel::parameters() {
  std::vector<Parameter*> out{&user_emb_, &item_emb_};
  for (std::size_t hop = 0; hop < central_keys_.size(); ++hop) {
    out.push_back(&central_keys_[hop]);
    out.push_back(&central_memory_[hop]);
  }
  if (config_.uses_local()) {
    out.push_back(&word_keys_);
    out.push_back(&word_memory_);
  }
  out.push_back(&output_);
  return out;
}

std::vector<const Parameter*> LcmrModel::parameters() const {
  auto mutable_params = const_cast<LcmrModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

ModelHeader LcmrModel::header() const {
  return {
      {"kind", "lcmr"},
      {"variant", std::string(variant_name(config_.variant))},
      {"num_users", std::to_string(config_.num_users)},
      {"num_items", std::to_string(config_.num_items)},
      {"vocab_size", std::to_string(config_.vocab_size)},
      {"d1", std::to_string(config_.user_dim)},
      {"d2", std::to_string(config_.item_dim)},
      {"hops", std::to_string(config_.hops)},
      {"memory_size", std::to_string(config_.memory_size)},
      {"beta", format_double(config_.effective_beta())},
      {"max_words_per_item", std::to_string(config_.max_words_per_item)},
      {"init_sigma", format_double(config_.init_sigma)},
  };
}

std::unique_ptr<Recommender> LcmrModel::clone() const {
  return std::make_unique<LcmrModel>(*this);
}

LcmrConfig lcmr_config_from_header(const ModelHeader& header) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) {
      fail(ErrorKind::kFormat, "checkpoint header lacks '" + key + "'");
    }
    return it->second;
  };
  LcmrConfig cfg;
  try {
    cfg.variant = parse_variant(get("variant"));
    cfg.num_users = std::stoi(get("num_users"));
    cfg.num_items = std::stoi(get("num_items"));
    cfg.vocab_size = std::stoi(get("vocab_size"));
    cfg.user_dim = std::stoi(get("d1"));
    cfg.item_dim = std::stoi(get("d2"));
    cfg.hops = std::stoi(get("hops"));
    cfg.memory_size = std::stoi(get("memory_size"));
    cfg.beta = std::stod(get("beta"));
    cfg.max_words_per_item = std::stoi(get("max_words_per_item"));
    cfg.init_sigma = std::stod(get("init_sigma"));
  } catch (const Error&) {
    throw;
  } catch (const std::logic_error&) {
    fail(ErrorKind::kFormat, "checkpoint header has a malformed number");
  }
  return cfg;
}

}  // namespace lcmr
