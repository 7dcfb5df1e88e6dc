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
#include "lcmr/split.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>

#include "lcmr/error.hpp"

namespace lcmr {

namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kCandidateStream = 2;
constexpr std::uint64_t kEpochStream = 3;

// Items not in `seen` (sorted), excluding `also_skip`.
std::vector<ItemId> complement(std::span<const ItemId> seen,
                               std::int32_t num_items, ItemId also_skip) {
  std::vector<ItemId> out;
  out.reserve(num_items - seen.size());
  std::size_t k = 0;
  for (ItemId i = 0; i < num_items; ++i) {
    while (k < seen.size() && seen[k] < i) ++k;
    if (k < seen.size() && seen[k] == i) continue;
    if (i == also_skip) continue;
    out.push_back(i);
  }
  return out;
}

bool sorted_contains(std::span<const ItemId> list, ItemId i) {
  return std::binary_search(list.begin(), list.end(), i);
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

InteractionSet LooSplit::observed() const {
  std::vector<std::vector<ItemId>> lists(train.num_users());
  for (UserId u = 0; u < train.num_users(); ++u) {
    auto items = train.items(u);
    lists[u].assign(items.begin(), items.end());
  }
  for (const auto& h : val) lists.at(h.user).push_back(h.item);
  for (const auto& h : test) lists.at(h.user).push_back(h.item);
  return InteractionSet(train.num_items(), std::move(lists));
}

std::vector<ItemId> sample_eval_candidates(const InteractionSet& observed,
                                           UserId user, ItemId heldout,
                                           std::int32_t k,
                                           std::mt19937_64& rng) {
  if (k < 0) fail(ErrorKind::kInvalidArgument, "negative candidate count");
  const auto seen = observed.items(user);
  const std::int32_t n = observed.num_items();
  const std::int64_t available =
      static_cast<std::int64_t>(n) - static_cast<std::int64_t>(seen.size()) -
      (sorted_contains(seen, heldout) || heldout < 0 || heldout >= n ? 0 : 1);
  if (available < k) {
    fail(ErrorKind::kInvalidArgument,
         "user " + std::to_string(user) + " has only " +
             std::to_string(available) + " non-interacted items, need " +
             std::to_string(k));
  }
  std::vector<ItemId> out;
  out.reserve(k);
  if (available <= 4 * static_cast<std::int64_t>(k)) {
    std::vector<ItemId> pool = complement(seen, n, heldout);
    for (std::int32_t j = 0; j < k; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
      std::swap(pool[j], pool[pick(rng)]);
      out.push_back(pool[j]);
    }
    return out;
  }
  std::unordered_set<ItemId> taken;
  std::uniform_int_distribution<ItemId> pick(0, n - 1);
  while (static_cast<std::int32_t>(out.size()) < k) {
    const ItemId i = pick(rng);
    if (i == heldout || sorted_contains(seen, i) || !taken.insert(i).second) {
      continue;
    }
    out.push_back(i);
  }
  return out;
}

LooSplit loo_split(const InteractionSet& interactions,
                   const SplitOptions& options) {
  if (options.min_interactions < 3) {
    fail(ErrorKind::kInvalidArgument,
         "min_interactions must be >= 3 (one train, one val, one test)");
  }
  LooSplit split;
  split.seed = options.seed;
  split.min_interactions = options.min_interactions;
  std::mt19937_64 rng = make_rng(options.seed, kSplitStream);
  std::vector<std::vector<ItemId>> train(interactions.num_users());
  for (UserId u = 0; u < interactions.num_users(); ++u) {
    auto items = interactions.items(u);
    std::vector<ItemId> list(items.begin(), items.end());
    if (static_cast<std::int32_t>(list.size()) < options.min_interactions) {
      split.excluded.push_back(u);
      train[u] = std::move(list);
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick_test(0, list.size() - 1);
    std::swap(list[pick_test(rng)], list.back());
    const ItemId test_item = list.back();
    list.pop_back();
    std::uniform_int_distribution<std::size_t> pick_val(0, list.size() - 1);
    std::swap(list[pick_val(rng)], list.back());
    const ItemId val_item = list.back();
    list.pop_back();
    split.test.push_back({u, test_item});
    split.val.push_back({u, val_item});
    std::mt19937_64 cand_rng =
        make_rng(options.seed, kCandidateStream, static_cast<std::uint64_t>(u));
    split.candidates.push_back(sample_eval_candidates(
        interactions, u, test_item, options.num_negatives, cand_rng));
    train[u] = std::move(list);
  }
  split.train = InteractionSet(interactions.num_items(), std::move(train));
  return split;
}

std::vector<TrainExample> sample_train_negatives(const InteractionSet& train,
                                                 const InteractionSet& observed,
                                                 std::int32_t ratio,
                                                 std::mt19937_64& rng) {
  if (ratio < 1) fail(ErrorKind::kInvalidArgument, "negative ratio must be >= 1");
  const std::int32_t n = train.num_items();
  std::vector<TrainExample> out;
  out.reserve(train.num_interactions() * ratio);
  std::uniform_int_distribution<ItemId> pick(0, n - 1);
  for (UserId u = 0; u < train.num_users(); ++u) {
    const auto seen = observed.items(u);
    const std::size_t available = n - seen.size();
    if (available == 0) {
      warn("user " + std::to_string(u) +
           " interacted with every item; no negatives sampled");
      continue;
    }
    const std::size_t wanted = train.items(u).size() * ratio;
    if (available * 4 < static_cast<std::size_t>(n)) {
      const std::vector<ItemId> pool = complement(seen, n, -1);
      std::uniform_int_distribution<std::size_t> pick_pool(0, pool.size() - 1);
      for (std::size_t k = 0; k < wanted; ++k) {
        out.push_back({u, pool[pick_pool(rng)], 0});
      }
      continue;
    }
    for (std::size_t k = 0; k < wanted; ++k) {
      ItemId i = pick(rng);
      while (sorted_contains(seen, i)) i = pick(rng);
      out.push_back({u, i, 0});
    }
  }
  return out;
}

std::vector<TrainExample> make_epoch_examples(const LooSplit& split,
                                              const InteractionSet& observed,
                                              std::int32_t ratio,
                                              std::uint64_t seed,
                                              std::int64_t epoch) {
  std::mt19937_64 rng =
      make_rng(seed, kEpochStream, static_cast<std::uint64_t>(epoch));
  std::vector<TrainExample> examples =
      sample_train_negatives(split.train, observed, ratio, rng);
  examples.reserve(examples.size() + split.train.num_interactions());
  for (UserId u = 0; u < split.train.num_users(); ++u) {
    for (ItemId i : split.train.items(u)) examples.push_back({u, i, 1});
  }
  std::shuffle(examples.begin(), examples.end(), rng);
  return examples;
}

// ---------------------------------------------------------------------------
// Split file

void write_split(const LooSplit& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "# lcmr leave-one-out split\n"
      << "seed=" << split.seed << '\n'
      << "num_users=" << split.num_users() << '\n'
      << "num_items=" << split.num_items() << '\n'
      << "min_interactions=" << split.min_interactions << '\n'
      << "[train]\n";
  for (UserId u = 0; u < split.train.num_users(); ++u) {
    for (ItemId i : split.train.items(u)) out << u << ' ' << i << '\n';
  }
  out << "[val]\n";
  for (const auto& h : split.val) out << h.user << ' ' << h.item << '\n';
  out << "[test]\n";
  for (const auto& h : split.test) out << h.user << ' ' << h.item << '\n';
  out << "[excluded]\n";
  for (UserId u : split.excluded) out << u << '\n';
  out << "[candidates]\n";
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    out << split.test[k].user;
    for (ItemId i : split.candidates[k]) out << ' ' << i;
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

LooSplit read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  LooSplit split;
  std::int64_t num_users = -1;
  std::int64_t num_items = -1;
  std::string section;
  std::vector<std::vector<ItemId>> train;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& what) {
    fail(ErrorKind::kParse,
         path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      section = line;
      if (section == "[train]") {
        if (num_users < 0 || num_items < 0) bad("header incomplete");
        train.assign(num_users, {});
      }
      continue;
    }
    if (section.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) bad("expected key=value header");
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      try {
        if (key == "seed") {
          split.seed = std::stoull(value);
        } else if (key == "num_users") {
          num_users = std::stoll(value);
        } else if (key == "num_items") {
          num_items = std::stoll(value);
        } else if (key == "min_interactions") {
          split.min_interactions = std::stoi(value);
        } else {
          bad("unknown header key '" + key + "'");
        }
      } catch (const std::logic_error&) {
        bad("bad value for '" + key + "'");
      }
      continue;
    }
    std::istringstream fields(line);
    std::int64_t u = 0;
    if (!(fields >> u) || u < 0 || u >= num_users) bad("bad user id");
    std::vector<ItemId> items;
    std::int64_t i = 0;
    while (fields >> i) {
      if (i < 0 || i >= num_items) bad("item id out of range");
      items.push_back(static_cast<ItemId>(i));
    }
    if (!fields.eof()) bad("bad item id");
    const auto user = static_cast<UserId>(u);
    if (section == "[train]") {
      if (items.size() != 1) bad("expected 'user item'");
      train[user].push_back(items[0]);
    } else if (section == "[val]" || section == "[test]") {
      if (items.size() != 1) bad("expected 'user item'");
      (section == "[val]" ? split.val : split.test).push_back({user, items[0]});
    } else if (section == "[excluded]") {
      if (!items.empty()) bad("expected a single user id");
      split.excluded.push_back(user);
    } else if (section == "[candidates]") {
      const std::size_t k = split.candidates.size();
      if (k >= split.test.size() || split.test[k].user != user) {
        bad("candidate rows must follow the test order");
      }
      split.candidates.push_back(std::move(items));
    } else {
      bad("unknown section " + section);
    }
  }
  if (num_users < 0) fail(ErrorKind::kFormat, path.string() + ": missing header");
  if (split.val.size() != split.test.size() ||
      split.candidates.size() != split.test.size()) {
    fail(ErrorKind::kFormat,
         path.string() + ": val/test/candidates sections disagree in length");
  }
  for (std::size_t k = 0; k < split.val.size(); ++k) {
    if (split.val[k].user != split.test[k].user) {
      fail(ErrorKind::kFormat, path.string() + ": val and test users misaligned");
    }
  }
  split.train =
      InteractionSet(static_cast<std::int32_t>(num_items), std::move(train));
  return split;
}

}  // namespace lcmr
