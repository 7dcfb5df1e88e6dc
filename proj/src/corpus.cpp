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
#include "lcmr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lcmr/error.hpp"

namespace lcmr {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

[[noreturn]] void parse_error(const std::filesystem::path& path,
                              std::size_t line, const std::string& what) {
  fail(ErrorKind::kParse,
       path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j]))) {
      ++j;
    }
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool to_int(std::string_view s, std::int64_t& value) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace

// ---------------------------------------------------------------------------
// InteractionSet

InteractionSet::InteractionSet(std::int32_t num_items,
                               std::vector<std::vector<ItemId>> items_by_user)
    : num_items_(num_items), items_(std::move(items_by_user)) {
  if (num_items_ < 0) fail(ErrorKind::kInvalidArgument, "negative item count");
  for (std::size_t u = 0; u < items_.size(); ++u) {
    auto& list = items_[u];
    if (list.empty()) {
      fail(ErrorKind::kInvalidArgument,
           "user " + std::to_string(u) + " has no interactions");
    }
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
      fail(ErrorKind::kInvalidArgument,
           "user " + std::to_string(u) + " has a duplicate item");
    }
    if (list.front() < 0 || list.back() >= num_items_) {
      fail(ErrorKind::kIndex, "user " + std::to_string(u) +
                                  " has an item id outside [0, " +
                                  std::to_string(num_items_) + ")");
    }
    nnz_ += list.size();
  }
}

bool InteractionSet::contains(UserId u, ItemId i) const {
  const auto& list = items_.at(u);
  return std::binary_search(list.begin(), list.end(), i);
}

InteractionFormat parse_interaction_format(std::string_view name) {
  if (name == "pairs") return InteractionFormat::kPairs;
  if (name == "citeulike-users") return InteractionFormat::kCiteulikeUsers;
  fail(ErrorKind::kInvalidArgument,
       "unknown interaction format '" + std::string(name) + "'");
}

InteractionSet parse_interactions(const std::filesystem::path& path,
                                  InteractionFormat format, IdMaps* maps) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<ItemId>> lists;
  IdMaps local;
  std::string line;
  std::size_t line_no = 0;

  if (format == InteractionFormat::kPairs) {
    std::unordered_map<std::string, UserId> user_ids;
    std::unordered_map<std::string, ItemId> item_ids;
    std::size_t duplicates = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto fields = split_ws(strip_comment(line));
      if (fields.empty()) continue;
      if (fields.size() != 2) {
        parse_error(path, line_no, "expected 'user item', got " +
                                       std::to_string(fields.size()) +
                                       " fields");
      }
      auto [uit, new_user] = user_ids.try_emplace(
          std::string(fields[0]), static_cast<UserId>(user_ids.size()));
      if (new_user) {
        local.users.emplace_back(fields[0]);
        lists.emplace_back();
      }
      auto [iit, new_item] = item_ids.try_emplace(
          std::string(fields[1]), static_cast<ItemId>(item_ids.size()));
      if (new_item) local.items.emplace_back(fields[1]);
      auto& list = lists[uit->second];
      if (std::find(list.begin(), list.end(), iit->second) != list.end()) {
        ++duplicates;
        continue;
      }
      list.push_back(iit->second);
    }
    if (duplicates > 0) {
      warn(path.string() + ": dropped " + std::to_string(duplicates) +
           " repeated pairs");
    }
    if (lists.empty()) fail(ErrorKind::kFormat, path.string() + ": no users");
    const auto num_items = static_cast<std::int32_t>(local.items.size());
    if (maps != nullptr) *maps = std::move(local);
    return InteractionSet(num_items, std::move(lists));
  }

  std::int64_t max_item = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    std::int64_t count = 0;
    if (!to_int(fields[0], count) || count < 0) {
      parse_error(path, line_no, "bad count '" + std::string(fields[0]) + "'");
    }
    if (static_cast<std::size_t>(count) != fields.size() - 1) {
      fail(ErrorKind::kFormat,
           path.string() + ":" + std::to_string(line_no) + ": count " +
               std::to_string(count) + " but " +
               std::to_string(fields.size() - 1) + " ids");
    }
    std::vector<ItemId> list;
    list.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      std::int64_t id = 0;
      if (!to_int(fields[k], id) || id < 0 || id > INT32_MAX) {
        parse_error(path, line_no, "bad item id '" + std::string(fields[k]) + "'");
      }
      list.push_back(static_cast<ItemId>(id));
      max_item = std::max(max_item, id);
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    local.users.push_back(std::to_string(lists.size()));
    lists.push_back(std::move(list));
  }
  if (lists.empty()) fail(ErrorKind::kFormat, path.string() + ": no users");
  const auto num_items = static_cast<std::int32_t>(max_item + 1);
  for (std::int32_t i = 0; i < num_items; ++i) {
    local.items.push_back(std::to_string(i));
  }
  if (maps != nullptr) *maps = std::move(local);
  return InteractionSet(num_items, std::move(lists));
}

void write_pairs(const InteractionSet& set, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (UserId u = 0; u < set.num_users(); ++u) {
    for (ItemId i : set.items(u)) out << u << ' ' << i << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

void write_user_lists(const InteractionSet& set,
                      const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (UserId u = 0; u < set.num_users(); ++u) {
    const auto items = set.items(u);
    out << items.size();
    for (ItemId i : items) out << ' ' << i;
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

InteractionSet widen_catalog(const InteractionSet& set, std::int32_t num_items) {
  if (num_items < set.num_items()) {
    fail(ErrorKind::kInvalidArgument, "widen_catalog cannot shrink the catalog");
  }
  std::vector<std::vector<ItemId>> lists;
  lists.reserve(set.num_users());
  for (UserId u = 0; u < set.num_users(); ++u) {
    const auto items = set.items(u);
    lists.emplace_back(items.begin(), items.end());
  }
  return InteractionSet(num_items, std::move(lists));
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> words,
                       std::vector<std::int32_t> doc_freq)
    : words_(std::move(words)), doc_freq_(std::move(doc_freq)) {
  if (doc_freq_.empty()) doc_freq_.assign(words_.size(), 0);
  if (doc_freq_.size() != words_.size()) {
    fail(ErrorKind::kInvalidArgument, "vocabulary: doc_freq size mismatch");
  }
  index_.reserve(words_.size());
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (!index_.emplace(words_[w], static_cast<WordId>(w)).second) {
      fail(ErrorKind::kFormat, "vocabulary: duplicate word '" + words_[w] + "'");
    }
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> words;
  std::vector<std::int32_t> freq;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    std::int64_t df = 0;
    if (fields.size() > 2 || (fields.size() == 2 && !to_int(fields[1], df))) {
      parse_error(path, line_no, "expected 'word' or 'word<TAB>doc_freq'");
    }
    words.emplace_back(fields[0]);
    freq.push_back(static_cast<std::int32_t>(df));
  }
  return Vocabulary(std::move(words), std::move(freq));
}

void write_vocabulary(const Vocabulary& vocab,
                      const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (WordId w = 0; w < vocab.size(); ++w) {
    out << vocab.word(w) << '\t' << vocab.doc_freq(w) << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// ItemCorpus

ItemCorpus::ItemCorpus(std::int32_t vocab_size,
                       std::vector<std::vector<WordId>> items)
    : vocab_size_(vocab_size), items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    auto& words = items_[i];
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    if (!words.empty() && (words.front() < 0 || words.back() >= vocab_size_)) {
      fail(ErrorKind::kFormat, "item " + std::to_string(i) +
                                   " has a word index outside [0, " +
                                   std::to_string(vocab_size_) + ")");
    }
    if (words.empty()) ++num_empty_;
    total_words_ += words.size();
  }
}

ItemCorpus ItemCorpus::reordered(std::span<const std::int32_t> order) const {
  std::vector<std::vector<WordId>> out;
  out.reserve(order.size());
  for (std::int32_t src : order) {
    if (src >= 0 && src < num_items()) {
      out.push_back(items_[src]);
    } else {
      out.emplace_back();
    }
  }
  return ItemCorpus(vocab_size_, std::move(out));
}

TextFormat parse_text_format(std::string_view name) {
  if (name == "bow-counts") return TextFormat::kBowCounts;
  if (name == "raw-tokens") return TextFormat::kRawTokens;
  fail(ErrorKind::kInvalidArgument,
       "unknown text format '" + std::string(name) + "'");
}

ItemCorpus parse_item_text(const std::filesystem::path& path, TextFormat format,
                           const Vocabulary* vocab, std::int32_t vocab_size) {
  if (vocab != nullptr) vocab_size = vocab->size();
  std::vector<std::vector<WordId>> items;

  if (format == TextFormat::kRawTokens) {
    if (vocab == nullptr) {
      fail(ErrorKind::kInvalidArgument, "raw-tokens text requires a vocabulary");
    }
    for (const auto& tokens : read_token_docs(path)) {
      std::vector<WordId> words;
      for (const auto& tok : tokens) {
        if (auto w = vocab->find(tok)) words.push_back(*w);
      }
      items.push_back(std::move(words));
    }
    return ItemCorpus(vocab_size, std::move(items));
  }

  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::int64_t max_word = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    std::int64_t count = 0;
    if (!to_int(fields[0], count) || count < 0) {
      parse_error(path, line_no, "bad term count '" + std::string(fields[0]) + "'");
    }
    if (static_cast<std::size_t>(count) != fields.size() - 1) {
      fail(ErrorKind::kFormat,
           path.string() + ":" + std::to_string(line_no) + ": count " +
               std::to_string(count) + " but " +
               std::to_string(fields.size() - 1) + " terms");
    }
    std::vector<WordId> words;
    words.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto colon = fields[k].find(':');
      std::int64_t index = 0;
      std::int64_t cnt = 0;
      if (colon == std::string_view::npos ||
          !to_int(fields[k].substr(0, colon), index) ||
          !to_int(fields[k].substr(colon + 1), cnt) || index < 0 || cnt < 0) {
        parse_error(path, line_no, "bad term '" + std::string(fields[k]) + "'");
      }
      if (vocab_size > 0 && index >= vocab_size) {
        fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) +
                                     ": word index " + std::to_string(index) +
                                     " >= vocabulary size " +
                                     std::to_string(vocab_size));
      }
      max_word = std::max(max_word, index);
      if (cnt > 0) words.push_back(static_cast<WordId>(index));
    }
    items.push_back(std::move(words));
  }
  if (vocab_size <= 0) vocab_size = static_cast<std::int32_t>(max_word + 1);
  return ItemCorpus(vocab_size, std::move(items));
}

void write_bow(const ItemCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (ItemId i = 0; i < corpus.num_items(); ++i) {
    const auto words = corpus.words(i);
    out << words.size();
    for (WordId w : words) out << ' ' << w << ":1";
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Text and vocabulary construction

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "also",
      "am", "an", "and", "any", "are", "aren", "as", "at", "be", "because",
      "been", "before", "being", "below", "between", "both", "but", "by",
      "can", "could", "couldn", "did", "didn", "do", "does", "doesn",
      "doing", "don", "down", "during", "each", "et", "few", "for", "from",
      "further", "had", "hadn", "has", "hasn", "have", "haven", "having",
      "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
      "however", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
      "just", "ll", "may", "me", "might", "more", "most", "must", "mustn",
      "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
      "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
      "re", "same", "shall", "shan", "she", "should", "shouldn", "so", "some",
      "such", "than", "that", "the", "their", "theirs", "them", "themselves",
      "then", "there", "these", "they", "this", "those", "through", "thus",
      "to", "too", "under", "until", "up", "us", "ve", "very", "via", "was",
      "wasn", "we", "were", "weren", "what", "when", "where", "whether",
      "which", "while", "who", "whom", "why", "will", "with", "within",
      "without", "won", "would", "wouldn", "you", "your", "yours", "yourself",
      "yourselves"};
  return words;
}

std::unordered_set<std::string> read_stopwords(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto field : split_ws(strip_comment(line))) {
      std::string w(field);
      std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
      });
      words.insert(std::move(w));
    }
  }
  return words;
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> docs,
                       std::int32_t top_k,
                       const std::unordered_set<std::string>& stopwords) {
  if (top_k < 1) fail(ErrorKind::kInvalidArgument, "build_vocab: top_k < 1");
  struct Stats {
    std::int32_t doc_freq = 0;
    std::int32_t max_tf = 0;  // idf is per word, so max tf-idf = max_tf * idf
  };
  std::map<std::string, Stats> stats;
  for (const auto& doc : docs) {
    std::unordered_map<std::string_view, std::int32_t> counts;
    for (const auto& tok : doc) {
      if (!stopwords.contains(tok)) ++counts[tok];
    }
    for (const auto& [tok, tf] : counts) {
      Stats& s = stats[std::string(tok)];
      ++s.doc_freq;
      s.max_tf = std::max(s.max_tf, tf);
    }
  }
  if (stats.empty()) {
    warn("build_vocab: no non-stopword tokens; vocabulary is empty");
    return Vocabulary();
  }
  if (stats.size() < static_cast<std::size_t>(top_k)) {
    warn("build_vocab: only " + std::to_string(stats.size()) +
         " distinct words, fewer than top_k=" + std::to_string(top_k));
  }
  const double num_docs = static_cast<double>(docs.size());
  struct Ranked {
    const std::string* word;
    double score;
    std::int32_t doc_freq;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(stats.size());
  for (const auto& [word, s] : stats) {
    const double idf = std::log(num_docs / s.doc_freq);
    ranked.push_back({&word, s.max_tf * idf, s.doc_freq});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return *a.word < *b.word;
                   });
  if (ranked.size() > static_cast<std::size_t>(top_k)) ranked.resize(top_k);
  std::vector<std::string> words;
  std::vector<std::int32_t> freq;
  for (const auto& r : ranked) {
    words.push_back(*r.word);
    freq.push_back(r.doc_freq);
  }
  return Vocabulary(std::move(words), std::move(freq));
}

std::vector<std::vector<std::string>> read_token_docs(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<std::string>> docs;
  std::string line;
  while (std::getline(in, line)) docs.push_back(tokenize(line));
  return docs;
}

}  // namespace lcmr
