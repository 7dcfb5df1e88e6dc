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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "lcmr/split.hpp"
#include "test_util.hpp"

using namespace lcmr;
using lcmr::testing::error_kind_of;
using lcmr::testing::read_text;
using lcmr::testing::scratch_dir;

namespace {

std::vector<std::string> captured;
void capture(std::string_view msg) { captured.emplace_back(msg); }

// Users with 2..(2+users) interactions over a 300-item catalogue.
InteractionSet ladder(std::int32_t users, std::int32_t items = 300) {
  std::vector<std::vector<ItemId>> lists;
  for (std::int32_t u = 0; u < users; ++u) {
    std::vector<ItemId> row;
    for (std::int32_t k = 0; k < 2 + u; ++k) row.push_back((u * 7 + k * 13) % items);
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    lists.push_back(row);
  }
  return InteractionSet(items, lists);
}

}  // namespace

TEST_CASE("three items become one test, one val, one train") {
  const InteractionSet s(200, {{3, 50, 120}});
  const LooSplit split = loo_split(s, SplitOptions{.seed = 4});
  REQUIRE(split.test.size() == 1);
  REQUIRE(split.val.size() == 1);
  CHECK(split.train.items(0).size() == 1);
  std::set<ItemId> all = {split.test[0].item, split.val[0].item, split.train.items(0)[0]};
  CHECK(all == std::set<ItemId>{3, 50, 120});
  CHECK(split.candidates[0].size() == 99);
  CHECK(split.excluded.empty());
}

TEST_CASE("users below the threshold stay in train") {
  const InteractionSet s(200, {{1, 2}, {4, 5, 6}});
  const LooSplit split = loo_split(s, SplitOptions{});
  CHECK(split.excluded == std::vector<UserId>{0});
  CHECK(split.train.items(0).size() == 2);
  REQUIRE(split.test.size() == 1);
  CHECK(split.test[0].user == 1);

  const LooSplit strict = loo_split(s, SplitOptions{.min_interactions = 4});
  CHECK(strict.test.empty());
  CHECK(strict.excluded.size() == 2);
}

TEST_CASE("split partitions every user's interactions") {
  const InteractionSet s = ladder(40);
  const LooSplit split = loo_split(s, SplitOptions{.seed = 8});
  std::map<UserId, std::pair<ItemId, ItemId>> held;
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    CHECK(split.val[k].user == split.test[k].user);
    held[split.test[k].user] = {split.val[k].item, split.test[k].item};
  }
  for (UserId u = 0; u < s.num_users(); ++u) {
    std::multiset<ItemId> rebuilt(split.train.items(u).begin(), split.train.items(u).end());
    if (auto it = held.find(u); it != held.end()) {
      CHECK(it->second.first != it->second.second);
      CHECK_FALSE(split.train.contains(u, it->second.first));
      CHECK_FALSE(split.train.contains(u, it->second.second));
      rebuilt.insert(it->second.first);
      rebuilt.insert(it->second.second);
    }
    CHECK(std::vector<ItemId>(rebuilt.begin(), rebuilt.end()) ==
          std::vector<ItemId>(s.items(u).begin(), s.items(u).end()));
  }
  CHECK(split.observed() == s);
}

TEST_CASE("eval candidates are pure negatives") {
  const InteractionSet s = ladder(60);
  const LooSplit split = loo_split(s, SplitOptions{.seed = 2});
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    const UserId u = split.test[k].user;
    const auto& cands = split.candidates[k];
    REQUIRE(cands.size() == 99);
    CHECK(std::set<ItemId>(cands.begin(), cands.end()).size() == 99);
    for (ItemId i : cands) {
      CHECK_FALSE(s.contains(u, i));
      CHECK(i != split.test[k].item);
      CHECK(i != split.val[k].item);
    }
  }
}

TEST_CASE("forced candidate set") {
  const InteractionSet observed(100, {{42}});
  std::mt19937_64 rng(1);
  auto cands = sample_eval_candidates(observed, 0, 42, 99, rng);
  std::sort(cands.begin(), cands.end());
  std::vector<ItemId> expect;
  for (ItemId i = 0; i < 100; ++i) {
    if (i != 42) expect.push_back(i);
  }
  CHECK(cands == expect);

  std::mt19937_64 again(1);
  CHECK(error_kind_of([&] { sample_eval_candidates(observed, 0, 42, 100, again); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("candidates are deterministic per seed") {
  const InteractionSet observed(500, {{1, 2, 3}});
  std::mt19937_64 a(77), b(77), c(78);
  const auto x = sample_eval_candidates(observed, 0, 2, 99, a);
  CHECK(x == sample_eval_candidates(observed, 0, 2, 99, b));
  CHECK(x != sample_eval_candidates(observed, 0, 2, 99, c));
}

TEST_CASE("split is a pure function of data and seed") {
  const InteractionSet s = ladder(30);
  CHECK(loo_split(s, SplitOptions{.seed = 5}) == loo_split(s, SplitOptions{.seed = 5}));
  CHECK_FALSE(loo_split(s, SplitOptions{.seed = 5}) == loo_split(s, SplitOptions{.seed = 6}));
}

TEST_CASE("split file round trip and byte stability") {
  const auto dir = scratch_dir("split_rt");
  const InteractionSet s = ladder(25);
  const LooSplit split = loo_split(s, SplitOptions{.seed = 12});
  write_split(split, dir / "a.txt");
  write_split(loo_split(s, SplitOptions{.seed = 12}), dir / "b.txt");
  CHECK(read_text(dir / "a.txt") == read_text(dir / "b.txt"));
  const LooSplit back = read_split(dir / "a.txt");
  CHECK(back == split);
  CHECK(back.seed == 12);

  lcmr::testing::write_text(dir / "bad.txt", "not a split\n");
  CHECK(error_kind_of([&] { read_split(dir / "bad.txt"); }) == ErrorKind::kParse);
}

TEST_CASE("epoch examples follow the count law") {
  const InteractionSet s = ladder(30);
  const LooSplit split = loo_split(s, SplitOptions{.seed = 3});
  const InteractionSet observed = split.observed();
  for (std::int32_t ratio : {1, 3}) {
    const auto ex = make_epoch_examples(split, observed, ratio, 3, 0);
    const std::size_t pos = split.train.num_interactions();
    CHECK(ex.size() == pos * (1 + ratio));
    std::size_t positives = 0;
    for (const TrainExample& e : ex) {
      if (e.label == 1) {
        ++positives;
        CHECK(split.train.contains(e.user, e.item));
      } else {
        CHECK_FALSE(observed.contains(e.user, e.item));
      }
    }
    CHECK(positives == pos);
  }
}

TEST_CASE("negatives are resampled per epoch and reproducible") {
  const InteractionSet s = ladder(20);
  const LooSplit split = loo_split(s, SplitOptions{.seed = 3});
  const InteractionSet observed = split.observed();
  const auto e0 = make_epoch_examples(split, observed, 1, 9, 0);
  CHECK(e0 == make_epoch_examples(split, observed, 1, 9, 0));
  CHECK_FALSE(e0 == make_epoch_examples(split, observed, 1, 9, 1));
  CHECK_FALSE(e0 == make_epoch_examples(split, observed, 1, 10, 0));
}

TEST_CASE("negative sampling is uniform over unobserved items") {
  // 5 positives over a 50-item catalogue, 20000 negatives each.
  const InteractionSet train(50, {{0, 10, 20, 30, 40}});
  std::mt19937_64 rng(2024);
  const auto neg = sample_train_negatives(train, train, 20000, rng);
  REQUIRE(neg.size() == 100000);
  std::vector<double> counts(50, 0.0);
  for (const TrainExample& e : neg) {
    CHECK(e.label == 0);
    counts[e.item] += 1.0;
  }
  const double expected = 100000.0 / 45.0;
  const double sigma = std::sqrt(expected * (1.0 - 1.0 / 45.0));
  double chi2 = 0.0;
  for (ItemId i = 0; i < 50; ++i) {
    if (train.contains(0, i)) {
      CHECK(counts[i] == 0.0);
      continue;
    }
    CHECK(std::abs(counts[i] - expected) <= 3.0 * sigma);
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // 44 degrees of freedom; 99.9th percentile is about 78.7.
  CHECK(chi2 < 78.7);
}

TEST_CASE("saturated users are skipped with a warning") {
  const InteractionSet train(3, {{0, 1, 2}, {0}});
  captured.clear();
  const WarningSink prev = set_warning_sink(&capture);
  std::mt19937_64 rng(1);
  const auto neg = sample_train_negatives(train, train, 1, rng);
  set_warning_sink(prev);
  CHECK(neg.size() == 1);
  CHECK(neg[0].user == 1);
  CHECK_FALSE(captured.empty());
  CHECK(error_kind_of([&] { sample_train_negatives(train, train, 0, rng); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("make_rng streams are independent") {
  auto a = make_rng(1, 2, 3);
  auto b = make_rng(1, 2, 3);
  auto c = make_rng(1, 2, 4);
  auto d = make_rng(1, 3, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}
