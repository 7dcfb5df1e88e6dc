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
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "lcmr/eval.hpp"
#include "lcmr/model.hpp"
#include "lcmr/split.hpp"
#include "test_util.hpp"

using namespace lcmr;
using lcmr::testing::error_kind_of;
using lcmr::testing::read_text;
using lcmr::testing::scratch_dir;

namespace {

using ScoreFn = std::function<double(UserId, ItemId)>;

class FnModel : public ScoringModel {
 public:
  FnModel(std::int32_t users, std::int32_t items, ScoreFn fn)
      : users_(users), items_(items), fn_(std::move(fn)) {}
  std::int32_t num_users() const override { return users_; }
  std::int32_t num_items() const override { return items_; }
  bool uses_text() const override { return false; }
  std::unique_ptr<ItemScorer> make_scorer(const ItemCorpus*) const override {
    struct S : ItemScorer {
      const ScoreFn* fn;
      void score(UserId u, std::span<const ItemId> items, std::span<double> out) override {
        for (std::size_t k = 0; k < items.size(); ++k) out[k] = (*fn)(u, items[k]);
      }
    };
    auto s = std::make_unique<S>();
    s->fn = &fn_;
    return s;
  }

 private:
  std::int32_t users_;
  std::int32_t items_;
  ScoreFn fn_;
};

LooSplit make_split(std::int32_t users = 50, std::int32_t items = 300) {
  std::vector<std::vector<ItemId>> lists;
  for (std::int32_t u = 0; u < users; ++u) {
    std::vector<ItemId> row;
    for (std::int32_t k = 0; k < 3 + u % 5; ++k) row.push_back((u * 11 + k * 17) % items);
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    lists.push_back(row);
  }
  return loo_split(InteractionSet(items, lists), SplitOptions{.seed = 3});
}

// Pseudo-random but deterministic per (user, item).
double hash_score(UserId u, ItemId i) {
  std::uint64_t x = static_cast<std::uint64_t>(u) * 1000003u + static_cast<std::uint64_t>(i);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return static_cast<double>(x % 1000) / 1000.0;
}

}  // namespace

TEST_CASE("rank of the positive") {
  std::vector<double> low(99, 0.5);
  CHECK(rank_of_positive(0.9, low) == 1);
  std::vector<double> same(99, 0.3);
  CHECK(rank_of_positive(0.3, same) == 100);
  const std::vector<double> mixed = {0.1, 0.5, 0.5, 0.7};
  CHECK(rank_of_positive(0.5, mixed) == 4);
  const std::vector<double> bad = {0.1, std::nan("")};
  CHECK(error_kind_of([&] { rank_of_positive(0.5, bad); }) == ErrorKind::kNumeric);
  CHECK(error_kind_of([&] { rank_of_positive(INFINITY, mixed); }) == ErrorKind::kNumeric);
}

TEST_CASE("rank agrees with a stable descending sort") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> coarse(0, 20);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> neg(99);
    for (double& s : neg) s = coarse(rng) / 20.0;
    const double pos = coarse(rng) / 20.0;
    // Negatives first so the positive lands after equal negatives.
    std::vector<std::pair<double, int>> all;
    for (double s : neg) all.push_back({s, 0});
    all.push_back({pos, 1});
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto it = std::find_if(all.begin(), all.end(), [](const auto& p) { return p.second == 1; });
    CHECK(rank_of_positive(pos, neg) == static_cast<int>(it - all.begin()) + 1);
  }
}

TEST_CASE("hit ratio") {
  const std::vector<std::int32_t> r = {1, 5, 11};
  CHECK(hr_at_k(r, 10) == doctest::Approx(2.0 / 3.0));
  const std::vector<std::int32_t> ones(7, 1);
  CHECK(hr_at_k(ones, 10) == 1.0);
  CHECK(error_kind_of([] { hr_at_k({}, 10); }) == ErrorKind::kInvalidArgument);
  const std::vector<std::int32_t> zero = {0};
  CHECK(error_kind_of([&] { hr_at_k(zero, 10); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("hit ratio of uniform random ranks") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int32_t> u(1, 100);
  std::vector<std::int32_t> ranks(10000);
  for (auto& r : ranks) r = u(rng);
  // Monte-Carlo expectation 10/100.
  CHECK(std::abs(hr_at_k(ranks, 10) - 0.10) <= 0.01);
}

TEST_CASE("ndcg") {
  CHECK(ndcg_contribution(1, 10) == 1.0);
  CHECK(ndcg_contribution(2, 10) == doctest::Approx(0.63093).epsilon(1e-5));
  CHECK(ndcg_contribution(11, 10) == 0.0);
  const std::vector<std::int32_t> r = {1, 2, 11};
  CHECK(ndcg_at_k(r, 10) == doctest::Approx((1.0 + 1.0 / std::log2(3.0)) / 3.0));
  CHECK(error_kind_of([] { ndcg_at_k({}, 10); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("constant scores never hit") {
  const LooSplit split = make_split();
  const FnModel constant(split.num_users(), split.num_items(), [](UserId, ItemId) { return 0.5; });
  const EvalReport r = evaluate(constant, split, nullptr);
  CHECK(r.hr == 0.0);
  CHECK(r.ndcg == 0.0);
  for (const UserEval& u : r.users) CHECK(u.rank == 100);
}

TEST_CASE("oracle scores always hit at rank one") {
  const LooSplit split = make_split();
  std::vector<ItemId> target(split.num_users(), -1);
  for (const HeldOut& h : split.test) target[h.user] = h.item;
  const FnModel oracle(split.num_users(), split.num_items(),
                       [&](UserId u, ItemId i) { return i == target[u] ? 1.0 : 0.0; });
  const EvalReport r = evaluate(oracle, split, nullptr);
  CHECK(r.hr == 1.0);
  CHECK(r.ndcg == 1.0);
}

TEST_CASE("metric properties on a pseudo-random model") {
  const LooSplit split = make_split(80);
  const FnModel model(split.num_users(), split.num_items(), hash_score);
  const FnModel warped(split.num_users(), split.num_items(), [](UserId u, ItemId i) {
    return std::exp(3.0 * hash_score(u, i)) - 7.0;
  });
  for (std::int32_t k : {1, 5, 10, 50}) {
    const EvalReport a = evaluate(model, split, nullptr, {.k = k});
    const EvalReport b = evaluate(warped, split, nullptr, {.k = k});
    CHECK(a.hr == b.hr);
    CHECK(a.ndcg == b.ndcg);
    CHECK(a.ndcg <= a.hr);
    for (std::size_t n = 0; n < a.users.size(); ++n) CHECK(a.users[n].rank == b.users[n].rank);
  }
  CHECK(evaluate(model, split, nullptr, {.k = 100}).hr == 1.0);
}

TEST_CASE("threaded evaluation matches serial") {
  const LooSplit split = make_split(90);
  const FnModel model(split.num_users(), split.num_items(), hash_score);
  const EvalReport serial = evaluate(model, split, nullptr);
  const EvalReport threaded = evaluate(model, split, nullptr, {.threads = 4});
  CHECK(serial.hr == threaded.hr);
  CHECK(serial.ndcg == threaded.ndcg);
  const EvalReport val = evaluate(model, split, nullptr, {.target = EvalTarget::kValidation});
  CHECK(val.users.size() == split.val.size());
}

TEST_CASE("evaluation does not modify parameters") {
  const LooSplit split = make_split(30);
  LcmrConfig cfg;
  cfg.num_users = split.num_users();
  cfg.num_items = split.num_items();
  cfg.set_joint_dim(8);
  cfg.hops = 2;
  cfg.memory_size = 4;
  cfg.variant = Variant::kNoLocal;
  std::mt19937_64 rng(1);
  LcmrModel m(cfg, rng);
  auto checksum = [&] {
    double s = 0.0;
    for (const Parameter* p : std::as_const(m).parameters()) {
      for (double x : p->value()) s += x;
      for (double x : p->grad()) s += x;
    }
    return s;
  };
  const double before = checksum();
  evaluate(m, split, nullptr, {.threads = 2});
  CHECK(checksum() == before);
}

TEST_CASE("evaluation errors") {
  const LooSplit split = make_split(10);
  const FnModel wrong(split.num_users() + 1, split.num_items(), hash_score);
  CHECK(error_kind_of([&] { evaluate(wrong, split, nullptr); }) == ErrorKind::kConfig);
  LooSplit empty = split;
  empty.test.clear();
  empty.val.clear();
  empty.candidates.clear();
  const FnModel model(split.num_users(), split.num_items(), hash_score);
  CHECK(error_kind_of([&] { evaluate(model, empty, nullptr); }) == ErrorKind::kState);

  LcmrConfig cfg;
  cfg.num_users = split.num_users();
  cfg.num_items = split.num_items();
  cfg.vocab_size = 3;
  cfg.set_joint_dim(4);
  cfg.hops = 1;
  cfg.memory_size = 1;
  LcmrModel full(cfg);
  CHECK(error_kind_of([&] { evaluate(full, split, nullptr); }) == ErrorKind::kConfig);
}

TEST_CASE("report file layout") {
  const auto dir = scratch_dir("eval_report");
  EvalReport r;
  r.k = 10;
  r.users = {{0, 1, true, 1.0}, {3, 12, false, 0.0}};
  r.hr = 0.5;
  r.ndcg = 0.5;
  write_report(r, dir / "report.txt");
  const std::string text = read_text(dir / "report.txt");
  CHECK(text.rfind("hr@10=50.0000\nndcg@10=50.0000\n", 0) == 0);
  CHECK(text.find("user,rank,hit,ndcg\n") != std::string::npos);
  CHECK(text.find("\n3,12,0,0") != std::string::npos);
}
