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
#include "lcmr/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lcmr/checkpoint.hpp"
#include "lcmr/error.hpp"

namespace lcmr {

namespace fs = std::filesystem;

namespace {

constexpr const char* kInteractionsFile = "interactions.txt";
constexpr const char* kItemsFile = "items.bow";
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kUserIdsFile = "user_ids.txt";
constexpr const char* kItemIdsFile = "item_ids.txt";
constexpr const char* kStatsFile = "stats.txt";

std::string pct(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    fail(ErrorKind::kIo, "cannot read " + path.string());
  }
}

void write_lines(const std::vector<std::string>& lines, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Occurrences in an LDA-C file, counting each idx:cnt as cnt words.
std::int64_t bow_occurrences(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::int64_t total = 0;
  std::string term;
  while (in >> term) {
    const auto colon = term.find(':');
    if (colon == std::string::npos) continue;
    std::int64_t cnt = 0;
    std::from_chars(term.data() + colon + 1, term.data() + term.size(), cnt);
    total += cnt;
  }
  return total;
}

std::vector<std::string> numbered(std::int32_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::int32_t k = 0; k < n; ++k) out.push_back(std::to_string(k));
  return out;
}

ItemCorpus corpus_for(const LooSplit& split, const fs::path& dir) {
  ItemCorpus corpus = load_item_text(dir);
  if (corpus.num_items() != split.num_items()) {
    fail(ErrorKind::kConfig,
         "corpus in " + dir.string() + " has " +
             std::to_string(corpus.num_items()) + " items, split has " +
             std::to_string(split.num_items()));
  }
  return corpus;
}

const char* target_name(EvalTarget t) {
  return t == EvalTarget::kTest ? "test" : "val";
}

}  // namespace

CorpusStats corpus_stats(const InteractionSet& interactions,
                         const ItemCorpus& corpus,
                         std::int64_t word_occurrences) {
  CorpusStats s;
  s.users = interactions.num_users();
  s.items = interactions.num_items();
  s.feedback = static_cast<std::int64_t>(interactions.num_interactions());
  s.words = word_occurrences >= 0
                ? word_occurrences
                : static_cast<std::int64_t>(corpus.total_words());
  s.vocabulary = corpus.vocab_size();
  if (s.users > 0 && s.items > 0) {
    s.density_pct = static_cast<double>(s.feedback) /
                    (static_cast<double>(s.users) * static_cast<double>(s.items)) *
                    100.0;
    s.avg_words_per_item =
        static_cast<double>(s.words) / static_cast<double>(s.items);
  }
  return s;
}

void print_stats(const CorpusStats& s, std::ostream& out) {
  out << "#Users                " << s.users << '\n'
      << "#Items                " << s.items << '\n'
      << "#Feedback             " << s.feedback << '\n'
      << "#Words                " << s.words << '\n'
      << "Vocabulary            " << s.vocabulary << '\n'
      << "Rating Density (%)    " << pct(s.density_pct, 3) << '\n'
      << "Avg. Words per Item   " << pct(s.avg_words_per_item, 1) << '\n';
}

ItemCorpus load_item_text(const fs::path& dir) {
  require_file(dir / kItemsFile);
  require_file(dir / kVocabFile);
  const Vocabulary vocab = read_vocabulary(dir / kVocabFile);
  return parse_item_text(dir / kItemsFile, TextFormat::kBowCounts, &vocab);
}

PreparedCorpus load_prepared(const fs::path& dir) {
  require_file(dir / kInteractionsFile);
  PreparedCorpus data;
  data.vocab = read_vocabulary(dir / kVocabFile);
  data.corpus = load_item_text(dir);
  InteractionSet interactions = parse_interactions(
      dir / kInteractionsFile, InteractionFormat::kCiteulikeUsers);
  if (interactions.num_items() > data.corpus.num_items()) {
    fail(ErrorKind::kFormat,
         dir.string() + ": interactions reference item " +
             std::to_string(interactions.num_items() - 1) + " but " +
             kItemsFile + " has " + std::to_string(data.corpus.num_items()) +
             " items");
  }
  data.interactions = widen_catalog(interactions, data.corpus.num_items());
  if (fs::exists(dir / kUserIdsFile)) data.ids.users = read_lines(dir / kUserIdsFile);
  if (fs::exists(dir / kItemIdsFile)) data.ids.items = read_lines(dir / kItemIdsFile);
  return data;
}

void write_prepared(const PreparedCorpus& data, const fs::path& dir) {
  if (data.corpus.num_items() != data.interactions.num_items()) {
    fail(ErrorKind::kInvalidArgument,
         "prepared corpus: text and interactions disagree on the item count");
  }
  fs::create_directories(dir);
  write_user_lists(data.interactions, dir / kInteractionsFile);
  write_bow(data.corpus, dir / kItemsFile);
  write_vocabulary(data.vocab, dir / kVocabFile);
  write_lines(data.ids.users.empty() ? numbered(data.interactions.num_users())
                                     : data.ids.users,
              dir / kUserIdsFile);
  write_lines(data.ids.items.empty() ? numbered(data.interactions.num_items())
                                     : data.ids.items,
              dir / kItemIdsFile);
}

CorpusStats cmd_prepare(const PrepareOptions& o, std::ostream& log) {
  if (o.out_dir.empty()) fail(ErrorKind::kConfig, "prepare needs an output directory");
  require_file(o.interactions);
  require_file(o.text);

  IdMaps ids;
  InteractionSet interactions =
      parse_interactions(o.interactions, o.interactions_format, &ids);

  ItemCorpus text;
  Vocabulary vocab;
  std::int64_t occurrences = 0;
  if (o.text_format == TextFormat::kRawTokens) {
    const auto docs = read_token_docs(o.text);
    if (docs.empty()) fail(ErrorKind::kFormat, o.text.string() + ": empty text corpus");
    const auto stop = o.stopwords.empty() ? default_stopwords()
                                          : read_stopwords(o.stopwords);
    vocab = build_vocab(docs, o.vocab_size, stop);
    std::vector<std::vector<WordId>> items;
    items.reserve(docs.size());
    for (const auto& tokens : docs) {
      std::vector<WordId> words;
      for (const auto& tok : tokens) {
        if (auto w = vocab.find(tok)) {
          words.push_back(*w);
          ++occurrences;
        }
      }
      items.push_back(std::move(words));
    }
    text = ItemCorpus(vocab.size(), std::move(items));
  } else {
    if (!o.vocab.empty()) {
      vocab = read_vocabulary(o.vocab);
      text = parse_item_text(o.text, TextFormat::kBowCounts, &vocab);
    } else {
      text = parse_item_text(o.text, TextFormat::kBowCounts);
      std::vector<std::string> words;
      std::vector<std::int32_t> df(text.vocab_size(), 0);
      for (WordId w = 0; w < text.vocab_size(); ++w) {
        words.push_back("w" + std::to_string(w));
      }
      for (ItemId i = 0; i < text.num_items(); ++i) {
        for (WordId w : text.words(i)) ++df[w];
      }
      vocab = Vocabulary(std::move(words), std::move(df));
    }
    occurrences = bow_occurrences(o.text);
  }
  if (text.num_items() == 0 || text.total_words() == 0) {
    fail(ErrorKind::kFormat, o.text.string() + ": empty text corpus");
  }

  PreparedCorpus out;
  out.vocab = vocab;
  if (o.interactions_format == InteractionFormat::kCiteulikeUsers) {
    // Item ids index text lines directly.
    if (interactions.num_items() > text.num_items()) {
      fail(ErrorKind::kFormat,
           o.interactions.string() + " references item " +
               std::to_string(interactions.num_items() - 1) + " but " +
               o.text.string() + " has " + std::to_string(text.num_items()) +
               " items");
    }
    out.interactions = widen_catalog(interactions, text.num_items());
    out.corpus = std::move(text);
    out.ids.users = std::move(ids.users);
  } else {
    // Raw item ids are line numbers into the text file.
    std::vector<std::int32_t> order;
    order.reserve(ids.items.size());
    for (const std::string& raw : ids.items) {
      std::int64_t line = -1;
      const auto [ptr, ec] =
          std::from_chars(raw.data(), raw.data() + raw.size(), line);
      if (ec != std::errc() || ptr != raw.data() + raw.size() || line < 0 ||
          line >= text.num_items()) {
        fail(ErrorKind::kFormat, "item id '" + raw +
                                     "' is not a line number of " +
                                     o.text.string());
      }
      order.push_back(static_cast<std::int32_t>(line));
    }
    out.corpus = text.reordered(order);
    out.interactions = std::move(interactions);
    out.ids = std::move(ids);
    // Occurrences of items outside the catalog no longer count.
    if (o.text_format == TextFormat::kRawTokens) occurrences = -1;
  }

  write_prepared(out, o.out_dir);
  const CorpusStats stats = corpus_stats(out.interactions, out.corpus,
                                         occurrences);
  std::ofstream stats_file(o.out_dir / kStatsFile, std::ios::trunc);
  print_stats(stats, stats_file);
  print_stats(stats, log);
  if (out.corpus.num_empty() > 0) {
    log << out.corpus.num_empty() << " items have no vocabulary words\n";
  }
  return stats;
}

CorpusStats cmd_synth(const PlantedOptions& options, const fs::path& out_dir,
                      std::ostream& log) {
  PlantedDataset data = make_planted(options);
  PreparedCorpus out;
  out.interactions = std::move(data.interactions);
  out.corpus = std::move(data.corpus);
  out.vocab = std::move(data.vocab);
  write_prepared(out, out_dir);
  std::vector<std::string> groups;
  for (std::int32_t g : data.user_group) groups.push_back(std::to_string(g));
  write_lines(groups, out_dir / "user_groups.txt");
  groups.clear();
  for (std::int32_t g : data.item_group) groups.push_back(std::to_string(g));
  write_lines(groups, out_dir / "item_groups.txt");
  const CorpusStats stats = corpus_stats(out.interactions, out.corpus);
  std::ofstream stats_file(out_dir / kStatsFile, std::ios::trunc);
  print_stats(stats, stats_file);
  print_stats(stats, log);
  return stats;
}

LooSplit cmd_split(const SplitCommand& o, std::ostream& log) {
  const PreparedCorpus data = load_prepared(o.corpus_dir);
  SplitOptions so;
  so.seed = o.seed;
  so.min_interactions = o.min_interactions;
  LooSplit split = loo_split(data.interactions, so);
  const fs::path out = o.out.empty() ? o.corpus_dir / "split.txt" : o.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_split(split, out);
  log << "eval users " << split.test.size() << " of "
      << split.num_users() << " (excluded " << split.excluded.size()
      << "), train interactions " << split.train.num_interactions() << '\n'
      << "wrote " << out.string() << '\n';
  return split;
}

std::unique_ptr<Recommender> make_model(const RunConfig& cfg,
                                        const LooSplit& split,
                                        const ItemCorpus* corpus) {
  std::mt19937_64 rng = make_rng(cfg.seed, 1);
  if (cfg.model == "mlp") {
    MlpConfig mc;
    mc.num_users = split.num_users();
    mc.num_items = split.num_items();
    mc.user_dim = cfg.d / 2;
    mc.item_dim = cfg.d / 2;
    mc.hidden = cfg.mlp_layers.empty() ? MlpConfig::default_hidden(cfg.d)
                                       : cfg.mlp_layers;
    mc.init_sigma = cfg.init_sigma;
    return std::make_unique<MlpModel>(mc, rng);
  }
  LcmrConfig lc;
  lc.num_users = split.num_users();
  lc.num_items = split.num_items();
  lc.variant = cfg.variant;
  if (lc.uses_local()) {
    if (corpus == nullptr) {
      fail(ErrorKind::kConfig,
           "variant " + std::string(variant_name(cfg.variant)) +
               " reads item text: set corpus_dir");
    }
    lc.vocab_size = corpus->vocab_size();
  }
  lc.set_joint_dim(cfg.d);
  lc.hops = cfg.hops;
  lc.memory_size = cfg.memory_size;
  lc.beta = cfg.beta;
  lc.max_words_per_item = cfg.max_words_per_item;
  lc.init_sigma = cfg.init_sigma;
  return std::make_unique<LcmrModel>(lc, rng);
}

namespace {

TrainOutcome train_run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const LooSplit split = read_split(cfg.split_path());
  std::optional<ItemCorpus> corpus;
  if (!cfg.corpus_dir.empty()) corpus = corpus_for(split, cfg.corpus_dir);
  const ItemCorpus* text = corpus ? &*corpus : nullptr;
  std::unique_ptr<Recommender> model = make_model(cfg, split, text);

  fs::create_directories(cfg.out_dir);
  write_run_config(cfg, cfg.out_dir / "config.txt");

  TrainConfig tc = cfg.train_config();
  if (!cfg.corpus_dir.empty()) {
    tc.extra_header["corpus_dir"] = fs::absolute(cfg.corpus_dir).string();
  }
  tc.on_epoch = [&](const EpochRecord& r) {
    log << "epoch " << r.epoch << " loss " << pct(r.loss, 6) << " val HR@"
        << cfg.k << ' ' << pct(r.val_hr * 100.0) << " NDCG@" << cfg.k << ' '
        << pct(r.val_ndcg * 100.0) << '\n';
  };
  TrainOutcome outcome;
  outcome.out_dir = cfg.out_dir;
  outcome.fit = fit(*model, split, text, tc);
  log_history(outcome.fit.history, cfg.out_dir / "history.csv");
  const EpochRecord& best = outcome.fit.history.best();
  log << "best epoch " << best.epoch << " val HR@" << cfg.k << ' '
      << pct(best.val_hr * 100.0) << " NDCG@" << cfg.k << ' '
      << pct(best.val_ndcg * 100.0) << '\n'
      << "wrote " << (cfg.out_dir / "best.ckpt").string() << '\n';
  return outcome;
}

}  // namespace

TrainOutcome cmd_train(RunConfig cfg, std::ostream& log) {
  apply_environment(cfg);
  return train_run(cfg, log);
}

LoadedModel load_model(const fs::path& checkpoint) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  LoadedModel out;
  out.header = ckpt.header;
  const auto kind = ckpt.header.find("kind");
  if (kind == ckpt.header.end()) {
    fail(ErrorKind::kFormat, checkpoint.string() + ": header lacks 'kind'");
  }
  if (kind->second == "lcmr") {
    auto model = std::make_unique<LcmrModel>(lcmr_config_from_header(ckpt.header));
    restore_parameters(ckpt, model->parameters());
    out.recommender = model.get();
    out.model = std::move(model);
  } else if (kind->second == "mlp") {
    auto model = std::make_unique<MlpModel>(mlp_config_from_header(ckpt.header));
    restore_parameters(ckpt, model->parameters());
    out.recommender = model.get();
    out.model = std::move(model);
  } else if (kind->second == "itempop") {
    const auto users = ckpt.header.find("num_users");
    if (users == ckpt.header.end()) {
      fail(ErrorKind::kFormat, checkpoint.string() + ": header lacks 'num_users'");
    }
    std::int32_t num_users = 0;
    const std::string& s = users->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), num_users);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(ErrorKind::kFormat, checkpoint.string() + ": bad num_users");
    }
    out.model = std::make_unique<ItemPopModel>(
        ItemPopModel::from_parameter(ckpt.find("popularity"), num_users));
  } else {
    fail(ErrorKind::kFormat,
         checkpoint.string() + ": unknown model kind '" + kind->second + "'");
  }
  return out;
}

namespace {

std::optional<ItemCorpus> text_for(const LoadedModel& loaded,
                                   const LooSplit& split,
                                   const fs::path& corpus_dir) {
  if (!loaded.model->uses_text()) return std::nullopt;
  fs::path dir = corpus_dir;
  if (dir.empty()) {
    const auto it = loaded.header.find("corpus_dir");
    if (it != loaded.header.end()) dir = it->second;
  }
  if (dir.empty()) {
    fail(ErrorKind::kConfig,
         "checkpoint reads item text: pass the prepared corpus directory");
  }
  return corpus_for(split, dir);
}

}  // namespace

EvalReport cmd_evaluate(const EvaluateCommand& o, std::ostream& log) {
  const LoadedModel loaded = load_model(o.checkpoint);
  const LooSplit split = read_split(o.split);
  const std::optional<ItemCorpus> corpus = text_for(loaded, split, o.corpus_dir);
  EvalOptions eo;
  eo.k = o.k;
  eo.target = o.target;
  eo.threads = o.threads;
  const EvalReport report =
      evaluate(*loaded.model, split, corpus ? &*corpus : nullptr, eo);
  const fs::path path =
      o.report.empty()
          ? o.checkpoint.parent_path() /
                (std::string("report-") + target_name(o.target) + ".txt")
          : o.report;
  write_report(report, path);
  log << "HR@" << o.k << "   " << pct(report.hr * 100.0) << '\n'
      << "NDCG@" << o.k << " " << pct(report.ndcg * 100.0) << '\n'
      << "users " << report.num_users() << " (" << target_name(o.target)
      << ")\n"
      << "wrote " << path.string() << '\n';
  return report;
}

void cmd_itempop(const fs::path& split_path, const fs::path& out,
                 std::ostream& log) {
  const LooSplit split = read_split(split_path);
  const ItemPopModel model(itempop_scores(split.train), split.num_users());
  ModelHeader header = model.header();
  header["seed"] = std::to_string(split.seed);
  const Parameter counts = model.as_parameter();
  const Parameter* params[] = {&counts};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_checkpoint(out, header, params);
  log << "wrote " << out.string() << '\n';
}

std::vector<AblationRow> cmd_ablate(RunConfig cfg, std::ostream& log) {
  apply_environment(cfg);
  cfg.validate();
  if (cfg.model != "lcmr") {
    fail(ErrorKind::kConfig, "config key 'model': ablation needs lcmr");
  }
  const LooSplit split = read_split(cfg.split_path());
  std::optional<ItemCorpus> corpus;
  if (!cfg.corpus_dir.empty()) corpus = corpus_for(split, cfg.corpus_dir);

  const struct {
    const char* label;
    Variant variant;
  } runs[] = {{"LCMR", Variant::kFull},
              {"LCMR\\local", Variant::kNoLocal},
              {"LCMR\\central", Variant::kNoCentral}};
  std::vector<AblationRow> rows;
  EvalOptions eo;
  eo.k = cfg.k;
  eo.threads = cfg.threads;
  for (const auto& run : runs) {
    RunConfig sub = cfg;
    sub.variant = run.variant;
    sub.out_dir = cfg.out_dir / std::string(variant_name(run.variant));
    log << "== " << run.label << '\n';
    const TrainOutcome outcome = train_run(sub, log);
    const EvalReport report = evaluate(*outcome.fit.best, split,
                                       corpus ? &*corpus : nullptr, eo);
    AblationRow row;
    row.label = run.label;
    row.variant = run.variant;
    row.hr = report.hr;
    row.ndcg = report.ndcg;
    rows.push_back(row);
  }
  for (AblationRow& row : rows) {
    if (rows[0].hr > 0.0) row.hr_drop_pct = (rows[0].hr - row.hr) / rows[0].hr * 100.0;
    if (rows[0].ndcg > 0.0) {
      row.ndcg_drop_pct = (rows[0].ndcg - row.ndcg) / rows[0].ndcg * 100.0;
    }
  }
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream csv(cfg.out_dir / "ablation.csv", std::ios::trunc);
    csv << "model,variant,hr,ndcg,hr_drop_pct,ndcg_drop_pct\n";
    for (const AblationRow& r : rows) {
      csv << r.label << ',' << variant_name(r.variant) << ','
          << pct(r.hr * 100.0, 4) << ',' << pct(r.ndcg * 100.0, 4) << ','
          << pct(r.hr_drop_pct, 4) << ',' << pct(r.ndcg_drop_pct, 4) << '\n';
    }
    if (!csv) fail(ErrorKind::kIo, "failed writing ablation.csv");
  }
  print_ablation(rows, cfg.k, log);
  return rows;
}

void print_ablation(const std::vector<AblationRow>& rows, std::int32_t k,
                    std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %8s %8s %10s %10s\n", "model",
                ("HR@" + std::to_string(k)).c_str(),
                ("NDCG@" + std::to_string(k)).c_str(), "dHR(%)", "dNDCG(%)");
  out << line;
  for (const AblationRow& r : rows) {
    std::snprintf(line, sizeof(line), "%-14s %8.2f %8.2f %10.2f %10.2f\n",
                  r.label.c_str(), r.hr * 100.0, r.ndcg * 100.0,
                  r.hr_drop_pct, r.ndcg_drop_pct);
    out << line;
  }
}

std::vector<std::pair<ItemId, double>> cmd_recommend(const RecommendCommand& o) {
  if (o.n < 1) fail(ErrorKind::kInvalidArgument, "n must be >= 1");
  const LoadedModel loaded = load_model(o.checkpoint);
  const LooSplit split = read_split(o.split);
  if (loaded.model->num_users() != split.num_users() ||
      loaded.model->num_items() != split.num_items()) {
    fail(ErrorKind::kConfig, "checkpoint and split dimensions differ");
  }
  if (o.user < 0 || o.user >= split.num_users()) {
    fail(ErrorKind::kIndex, "unknown user " + std::to_string(o.user) +
                                " (have " + std::to_string(split.num_users()) +
                                ")");
  }
  const std::optional<ItemCorpus> corpus = text_for(loaded, split, o.corpus_dir);
  std::vector<ItemId> items;
  for (ItemId i = 0; i < split.num_items(); ++i) {
    if (!split.train.contains(o.user, i)) items.push_back(i);
  }
  std::vector<double> scores(items.size());
  loaded.model->make_scorer(corpus ? &*corpus : nullptr)
      ->score(o.user, items, scores);
  std::vector<std::pair<ItemId, double>> ranked;
  ranked.reserve(items.size());
  for (std::size_t k = 0; k < items.size(); ++k) ranked.emplace_back(items[k], scores[k]);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  });
  if (ranked.size() > static_cast<std::size_t>(o.n)) ranked.resize(o.n);
  return ranked;
}

}  // namespace lcmr
