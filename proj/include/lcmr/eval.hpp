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

// Leave-one-out ranking evaluation against sampled negatives.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lcmr/model.hpp"
#include "lcmr/split.hpp"

namespace lcmr {

// 1 + #{negatives scoring above the positive} + #{negatives tying it}: the
// positive loses every tie.
std::int32_t rank_of_positive(double pos_score,
                              std::span<const double> neg_scores);

double hr_at_k(std::span<const std::int32_t> ranks, std::int32_t k = 10);
double ndcg_at_k(std::span<const std::int32_t> ranks, std::int32_t k = 10);
// 1/log2(rank + 1) when rank <= k, else 0.
double ndcg_contribution(std::int32_t rank, std::int32_t k);

struct UserEval {
  UserId user = 0;
  std::int32_t rank = 0;
  bool hit = false;
  double ndcg = 0.0;
};

struct EvalReport {
  std::int32_t k = 10;
  std::vector<UserEval> users;
  double hr = 0.0;
  double ndcg = 0.0;
  std::uint64_t seed = 0;

  std::size_t num_users() const { return users.size(); }
};

enum class EvalTarget { kTest, kValidation };

struct EvalOptions {
  std::int32_t k = 10;
  EvalTarget target = EvalTarget::kTest;
  std::int32_t threads = 1;
};

// Ranks each eligible user's held-out item against the split's fixed
// negatives. Read-only with respect to the model.
EvalReport evaluate(const ScoringModel& model, const LooSplit& split,
                    const ItemCorpus* corpus, const EvalOptions& options = {});

// hr@K=<v> and ndcg@K=<v> (x100), then "user,rank,hit,ndcg" rows.
void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace lcmr
