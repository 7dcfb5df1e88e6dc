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
#include "lcmr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "lcmr/error.hpp"

namespace lcmr {

std::int32_t rank_of_positive(double pos_score,
                              std::span<const double> neg_scores) {
  if (!std::isfinite(pos_score)) {
    fail(ErrorKind::kNumeric, "rank_of_positive: non-finite positive score");
  }
  std::int32_t rank = 1;
  for (double s : neg_scores) {
    if (!std::isfinite(s)) {
      fail(ErrorKind::kNumeric, "rank_of_positive: non-finite negative score");
    }
    if (s >= pos_score) ++rank;
  }
  return rank;
}

double ndcg_contribution(std::int32_t rank, std::int32_t k) {
  if (rank < 1) fail(ErrorKind::kInvalidArgument, "ranks start at 1");
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

double hr_at_k(std::span<const std::int32_t> ranks, std::int32_t k) {
  if (ranks.empty()) fail(ErrorKind::kInvalidArgument, "hr_at_k: no ranks");
  std::size_t hits = 0;
  for (std::int32_t r : ranks) {
    if (r < 1) fail(ErrorKind::kInvalidArgument, "ranks start at 1");
    if (r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double ndcg_at_k(std::span<const std::int32_t> ranks, std::int32_t k) {
  if (ranks.empty()) fail(ErrorKind::kInvalidArgument, "ndcg_at_k: no ranks");
  double total = 0.0;
  for (std::int32_t r : ranks) total += ndcg_contribution(r, k);
  return total / static_cast<double>(ranks.size());
}

EvalReport evaluate(const ScoringModel& model, const LooSplit& split,
                    const ItemCorpus* corpus, const EvalOptions& options) {
  if (options.k < 1) fail(ErrorKind::kInvalidArgument, "K must be >= 1");
  const auto& heldout =
      options.target == EvalTarget::kTest ? split.test : split.val;
  if (heldout.empty()) {
    fail(ErrorKind::kState, "split has no evaluation users");
  }
  if (model.num_users() != split.num_users() ||
      model.num_items() != split.num_items()) {
    fail(ErrorKind::kConfig,
         "model dimensions (" + std::to_string(model.num_users()) + " users, " +
             std::to_string(model.num_items()) +
             " items) do not match the split (" +
             std::to_string(split.num_users()) + " users, " +
             std::to_string(split.num_items()) + " items)");
  }

  EvalReport report;
  report.k = options.k;
  report.seed = split.seed;
  report.users.resize(heldout.size());

  auto run = [&](std::size_t begin, std::size_t end) {
    auto scorer = model.make_scorer(corpus);
    std::vector<ItemId> items;
    std::vector<double> scores;
    for (std::size_t k = begin; k < end; ++k) {
      const HeldOut& h = heldout[k];
      const auto& negatives = split.candidates[k];
      items.assign(1, h.item);
      items.insert(items.end(), negatives.begin(), negatives.end());
      scores.resize(items.size());
      scorer->score(h.user, items, scores);
      UserEval& out = report.users[k];
      out.user = h.user;
      out.rank = rank_of_positive(scores[0],
                                  std::span<const double>(scores).subspan(1));
      out.hit = out.rank <= options.k;
      out.ndcg = ndcg_contribution(out.rank, options.k);
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(1, options.threads)), 1,
      heldout.size());
  if (threads == 1) {
    run(0, heldout.size());
  } else {
    // Validate scorer construction (e.g. missing corpus) before fanning out.
    model.make_scorer(corpus);
    std::vector<std::jthread> pool;
    const std::size_t chunk = (heldout.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(heldout.size(), begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
  }

  double hits = 0.0;
  double gain = 0.0;
  for (const UserEval& u : report.users) {
    hits += u.hit ? 1.0 : 0.0;
    gain += u.ndcg;
  }
  report.hr = hits / static_cast<double>(report.users.size());
  report.ndcg = gain / static_cast<double>(report.users.size());
  return report;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", report.hr * 100.0);
  out << "hr@" << report.k << '=' << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.4f", report.ndcg * 100.0);
  out << "ndcg@" << report.k << '=' << buf << '\n';
  out << "user,rank,hit,ndcg\n";
  for (const UserEval& u : report.users) {
    std::snprintf(buf, sizeof(buf), "%.6f", u.ndcg);
    out << u.user << ',' << u.rank << ',' << (u.hit ? 1 : 0) << ',' << buf
        << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace lcmr
