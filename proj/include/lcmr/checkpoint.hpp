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

// Checkpoint container, version "LCMR1":
//
//   LCMR1\n
//   key=value\n            (model hyperparameters, seed, ...)
//   params=<count>\n
//   param <name> f64 <rank> <dim>...\n<raw little-endian float64 values>\n
//   ...
//   end\n
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lcmr/model.hpp"
#include "lcmr/ndgrad.hpp"

namespace lcmr {

inline constexpr std::string_view kCheckpointMagic = "LCMR1";

struct Checkpoint {
  ModelHeader header;
  std::vector<Parameter> params;

  const Parameter& find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path,
                     const ModelHeader& header,
                     std::span<const Parameter* const> params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies values of same-named parameters; shapes must match exactly.
void restore_parameters(const Checkpoint& ckpt,
                        std::span<Parameter* const> params);

}  // namespace lcmr
