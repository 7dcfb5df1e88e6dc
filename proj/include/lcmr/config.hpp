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

// Flat key=value run configuration shared by train and ablate.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcmr/model.hpp"
#include "lcmr/train.hpp"

namespace lcmr {

struct RunConfig {
  // Prepared corpus directory; may be empty for models without text.
  std::filesystem::path corpus_dir;
  // Defaults to <corpus_dir>/split.txt.
  std::filesystem::path split;
  std::filesystem::path out_dir = "runs/lcmr";
  std::uint64_t seed = 0;

  std::string model = "lcmr";  // lcmr | mlp
  Variant variant = Variant::kFull;
  std::int32_t d = 200;
  std::int32_t hops = 3;
  std::int32_t memory_size = 100;
  double beta = 0.0;
  std::int32_t max_words_per_item = 0;
  double init_sigma = 0.01;
  // Empty selects d/2, d/4.
  std::vector<std::int32_t> mlp_layers;

  std::int32_t epochs = 50;
  std::int32_t batch_size = 128;
  std::int32_t neg_ratio = 1;
  double lr = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int32_t eval_every = 1;
  std::int32_t k = 10;
  std::int32_t threads = 1;
  bool save_epoch_checkpoints = false;
  bool record_seconds = true;

  std::filesystem::path split_path() const;
  TrainConfig train_config() const;
  // Range checks that do not need the data.
  void validate() const;
};

struct ConfigKey {
  std::string_view name;
  std::string_view help;
};

// Every accepted key, in the order used when echoing a config.
std::span<const ConfigKey> config_schema();

// Applies one "key=value" setting; unknown keys and bad values are
// configuration errors naming the key.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

// '#' starts a comment; blank lines are ignored.
RunConfig read_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::string_view text,
                           std::string_view source = "<config>");

std::string format_run_config(const RunConfig& cfg);
void write_run_config(const RunConfig& cfg, const std::filesystem::path& path);

// LCMR_OUTPUT_DIR, when set and non-empty, replaces out_dir.
void apply_environment(RunConfig& cfg);

}  // namespace lcmr
