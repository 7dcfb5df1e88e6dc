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

// Implicit-feedback interactions and item text.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lcmr {

using UserId = std::int32_t;
using ItemId = std::int32_t;
using WordId = std::int32_t;

// Binary user-item matrix stored as sorted per-user item lists. Every user has
// at least one interaction and no (user, item) pair repeats.
class InteractionSet {
 public:
  InteractionSet() = default;
  // Sorts each list; rejects duplicates, empty users and ids >= num_items.
  InteractionSet(std::int32_t num_items,
                 std::vector<std::vector<ItemId>> items_by_user);

  std::int32_t num_users() const {
    return static_cast<std::int32_t>(items_.size());
  }
  std::int32_t num_items() const { return num_items_; }
  std::size_t num_interactions() const { return nnz_; }

  std::span<const ItemId> items(UserId u) const { return items_.at(u); }
  bool contains(UserId u, ItemId i) const;

  bool operator==(const InteractionSet&) const = default;

 private:
  std::int32_t num_items_ = 0;
  std::vector<std::vector<ItemId>> items_;
  std::size_t nnz_ = 0;
};

enum class InteractionFormat { kPairs, kCiteulikeUsers };
InteractionFormat parse_interaction_format(std::string_view name);

// Raw id strings for each dense id, in dense order.
struct IdMaps {
  std::vector<std::string> users;
  std::vector<std::string> items;
};

// `pairs`: "user item" per line (space or tab separated, '#' comments);
// ids are densified by first appearance and repeated pairs are dropped.
// `citeulike-users`: line u is "count item item ..."; item ids are kept.
InteractionSet parse_interactions(const std::filesystem::path& path,
                                  InteractionFormat format,
                                  IdMaps* maps = nullptr);

// Writes dense "user item" pairs; parse_interactions(kPairs) reads it back to
// an identical set when every item id is used.
void write_pairs(const InteractionSet& set, const std::filesystem::path& path);
// Writes "count item item ..." per user; ids survive a citeulike-users read.
void write_user_lists(const InteractionSet& set,
                      const std::filesystem::path& path);
// Same lists over a catalog of `num_items` (>= the current count).
InteractionSet widen_catalog(const InteractionSet& set, std::int32_t num_items);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<std::int32_t> doc_freq);

  std::int32_t size() const { return static_cast<std::int32_t>(words_.size()); }
  const std::string& word(WordId w) const { return words_.at(w); }
  std::optional<WordId> find(std::string_view word) const;
  std::int32_t doc_freq(WordId w) const { return doc_freq_.at(w); }
  std::span<const std::string> words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::int32_t> doc_freq_;
  std::unordered_map<std::string, WordId> index_;
};

// One word per line, optionally "word<TAB>doc_freq".
Vocabulary read_vocabulary(const std::filesystem::path& path);
void write_vocabulary(const Vocabulary& vocab,
                      const std::filesystem::path& path);

// Per-item distinct word indices over a vocabulary of size D.
class ItemCorpus {
 public:
  ItemCorpus() = default;
  ItemCorpus(std::int32_t vocab_size, std::vector<std::vector<WordId>> items);

  std::int32_t vocab_size() const { return vocab_size_; }
  std::int32_t num_items() const {
    return static_cast<std::int32_t>(items_.size());
  }
  std::span<const WordId> words(ItemId i) const { return items_.at(i); }
  bool is_empty(ItemId i) const { return items_.at(i).empty(); }
  std::int32_t num_empty() const { return num_empty_; }
  std::size_t total_words() const { return total_words_; }

  // Copy with items reordered: out[j] = this[order[j]], or an empty item
  // when order[j] is negative.
  ItemCorpus reordered(std::span<const std::int32_t> order) const;

 private:
  std::int32_t vocab_size_ = 0;
  std::vector<std::vector<WordId>> items_;
  std::int32_t num_empty_ = 0;
  std::size_t total_words_ = 0;
};

enum class TextFormat { kBowCounts, kRawTokens };
TextFormat parse_text_format(std::string_view name);

// `bow-counts`: LDA-C lines "count idx:cnt ..." (counts collapsed).
// `raw-tokens`: one item per line of free text, mapped through `vocab`.
// The vocabulary size is taken from `vocab` when given, else `vocab_size`
// (0 infers it from the largest index seen).
ItemCorpus parse_item_text(const std::filesystem::path& path, TextFormat format,
                           const Vocabulary* vocab = nullptr,
                           std::int32_t vocab_size = 0);

void write_bow(const ItemCorpus& corpus, const std::filesystem::path& path);

// Lower-cased alphanumeric runs of length >= 2.
std::vector<std::string> tokenize(std::string_view text);

const std::unordered_set<std::string>& default_stopwords();
std::unordered_set<std::string> read_stopwords(
    const std::filesystem::path& path);

// Ranks non-stopwords by their largest per-document tf-idf, with tf the raw
// count in the document and idf = ln(num_docs / doc_freq). Keeps the top_k
// (ties broken lexicographically).
Vocabulary build_vocab(std::span<const std::vector<std::string>> docs,
                       std::int32_t top_k,
                       const std::unordered_set<std::string>& stopwords);

// Reads raw text (one item per line) into token lists.
std::vector<std::vector<std::string>> read_token_docs(
    const std::filesystem::path& path);

}  // namespace lcmr
