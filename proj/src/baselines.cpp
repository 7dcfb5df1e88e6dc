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
#include "lcmr/baselines.hpp"

#include <sstream>

#include "lcmr/error.hpp"

namespace lcmr {

namespace {

class PopularityScorer final : public ItemScorer {
 public:
  explicit PopularityScorer(const PopularityTable& table) : table_(table) {}

  void score(UserId, std::span<const ItemId> items,
             std::span<double> out) override {
    for (std::size_t k = 0; k < items.size(); ++k) {
      out[k] = static_cast<double>(table_.counts.at(items[k]));
    }
  }

 private:
  const PopularityTable& table_;
};

std::string join_widths(const std::vector<std::int32_t>& widths) {
  std::ostringstream out;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    if (k > 0) out << ',';
    out << widths[k];
  }
  return out.str();
}

}  // namespace

PopularityTable itempop_scores(const InteractionSet& train) {
  PopularityTable table;
  table.counts.assign(train.num_items(), 0);
  for (UserId u = 0; u < train.num_users(); ++u) {
    for (ItemId i : train.items(u)) ++table.counts[i];
  }
  return table;
}

ItemPopModel::ItemPopModel(PopularityTable table, std::int32_t num_users)
    : table_(std::move(table)), num_users_(num_users) {}

std::unique_ptr<ItemScorer> ItemPopModel::make_scorer(
    const ItemCorpus*) const {
  return std::make_unique<PopularityScorer>(table_);
}

ModelHeader ItemPopModel::header() const {
  return {{"kind", "itempop"},
          {"num_users", std::to_string(num_users_)},
          {"num_items", std::to_string(table_.num_items())}};
}

Parameter ItemPopModel::as_parameter() const {
  Parameter p("popularity", {table_.counts.size()});
  for (std::size_t i = 0; i < table_.counts.size(); ++i) {
    p.value()[i] = static_cast<double>(table_.counts[i]);
  }
  return p;
}

ItemPopModel ItemPopModel::from_parameter(const Parameter& p,
                                          std::int32_t num_users) {
  PopularityTable table;
  table.counts.reserve(p.size());
  for (double v : p.value()) table.counts.push_back(static_cast<std::int64_t>(v));
  return ItemPopModel(std::move(table), num_users);
}

// ---------------------------------------------------------------------------
// MLP

std::vector<std::int32_t> MlpConfig::default_hidden(std::int32_t joint_dim) {
  return {std::max(1, joint_dim / 2), std::max(1, joint_dim / 4)};
}

void MlpConfig::validate() const {
  if (num_users < 1 || num_items < 1) {
    fail(ErrorKind::kConfig, "MLP needs at least one user and one item");
  }
  if (user_dim < 1 || item_dim < 1) {
    fail(ErrorKind::kConfig, "MLP embedding dimensions must be >= 1");
  }
  for (std::int32_t w : hidden) {
    if (w < 1) fail(ErrorKind::kConfig, "MLP layer widths must be >= 1");
  }
  if (!(init_sigma > 0.0)) fail(ErrorKind::kConfig, "init_sigma must be > 0");
}

MlpModel::MlpModel(const MlpConfig& config, std::mt19937_64& rng)
    : config_(config) {
  config_.validate();
  allocate(&rng);
}

MlpModel::MlpModel(const MlpConfig& config) : config_(config) {
  config_.validate();
  allocate(nullptr);
}

void MlpModel::allocate(std::mt19937_64* rng) {
  const auto make = [&](std::string name, std::vector<std::size_t> shape) {
    if (rng != nullptr) {
      return init_gaussian(std::move(name), std::move(shape),
                           config_.init_sigma, *rng);
    }
    return Parameter(std::move(name), std::move(shape));
  };
  user_emb_ = make("P", {static_cast<std::size_t>(config_.num_users),
                         static_cast<std::size_t>(config_.user_dim)});
  item_emb_ = make("Q", {static_cast<std::size_t>(config_.num_items),
                         static_cast<std::size_t>(config_.item_dim)});
  auto width = static_cast<std::size_t>(config_.joint_dim());
  for (std::size_t k = 0; k < config_.hidden.size(); ++k) {
    const auto out = static_cast<std::size_t>(config_.hidden[k]);
    weights_.push_back(make("W" + std::to_string(k + 1), {out, width}));
    // Biases start at zero.
    biases_.emplace_back("b" + std::to_string(k + 1),
                         std::vector<std::size_t>{out});
    width = out;
  }
  output_ = make("h", {width});
}

template <class Self>
Var MlpModel::build(Self& self, Tape& tape, UserId user, ItemId item) {
  const Var pu = tape.embed_lookup(self.user_emb_, user);
  const Var qi = tape.embed_lookup(self.item_emb_, item);
  Var x = tape.concat(pu, qi);
  for (std::size_t k = 0; k < self.weights_.size(); ++k) {
    const Var w = tape.param(self.weights_[k]);
    const Var b = tape.param(self.biases_[k]);
    x = tape.relu(tape.affine(w, b, x));
  }
  return tape.sigmoid_dot(tape.param(self.output_), x);
}

Var MlpModel::forward(Tape& tape, UserId user, ItemId item,
                      std::span<const WordId>) {
  return build(*this, tape, user, item);
}

Var MlpModel::forward(Tape& tape, UserId user, ItemId item,
                      std::span<const WordId>) const {
  return build(*this, tape, user, item);
}

std::vector<Parameter*> MlpModel::parameters() {
  std::vector<Parameter*> out{&user_emb_, &item_emb_};
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    out.push_back(&weights_[k]);
    out.push_back(&biases_[k]);
  }
  out.push_back(&output_);
  return out;
}

std::vector<const Parameter*> MlpModel::parameters() const {
  auto mutable_params = const_cast<MlpModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

ModelHeader MlpModel::header() const {
  std::ostringstream sigma;
  sigma.precision(17);
  sigma << config_.init_sigma;
  return {{"kind", "mlp"},
          {"num_users", std::to_string(config_.num_users)},
          {"num_items", std::to_string(config_.num_items)},
          {"d1", std::to_string(config_.user_dim)},
          {"d2", std::to_string(config_.item_dim)},
          {"mlp_layers", join_widths(config_.hidden)},
          {"init_sigma", sigma.str()}};
}

std::unique_ptr<Recommender> MlpModel::clone() const {
  return std::make_unique<MlpModel>(*this);
}

MlpConfig mlp_config_from_header(const ModelHeader& header) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) {
      fail(ErrorKind::kFormat, "checkpoint header lacks '" + key + "'");
    }
    return it->second;
  };
  MlpConfig cfg;
  try {
    cfg.num_users = std::stoi(get("num_users"));
    cfg.num_items = std::stoi(get("num_items"));
    cfg.user_dim = std::stoi(get("d1"));
    cfg.item_dim = std::stoi(get("d2"));
    cfg.init_sigma = std::stod(get("init_sigma"));
    cfg.hidden.clear();
    std::istringstream widths(get("mlp_layers"));
    std::string field;
    while (std::getline(widths, field, ',')) {
      if (!field.empty()) cfg.hidden.push_back(std::stoi(field));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::logic_error&) {
    fail(ErrorKind::kFormat, "checkpoint header has a malformed number");
  }
  return cfg;
}

}  // namespace lcmr
