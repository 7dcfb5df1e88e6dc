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
#include "lcmr/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lcmr/checkpoint.hpp"
#include "lcmr/error.hpp"
#include "lcmr/eval.hpp"

namespace lcmr {

namespace {

std::span<const WordId> words_for(const Recommender& model,
                                  const ItemCorpus* corpus, ItemId item) {
  if (!model.uses_text()) return {};
  return corpus->words(item);
}

void check_inputs(const Recommender& model, const LooSplit& split,
                  const ItemCorpus* corpus) {
  if (model.num_users() != split.num_users() ||
      model.num_items() != split.num_items()) {
    fail(ErrorKind::kConfig,
         "model has " + std::to_string(model.num_users()) + " users / " +
             std::to_string(model.num_items()) + " items, split has " +
             std::to_string(split.num_users()) + " / " +
             std::to_string(split.num_items()));
  }
  // Surfaces a missing or short corpus before any update happens.
  model.make_scorer(corpus);
}

std::string fixed(double x, int digits) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

bool better(const EpochRecord& a, const EpochRecord& b) {
  if (a.val_hr != b.val_hr) return a.val_hr > b.val_hr;
  return a.val_ndcg > b.val_ndcg;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::kConfig, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorKind::kConfig, "batch_size must be >= 1");
  if (neg_ratio < 1) fail(ErrorKind::kConfig, "neg_ratio must be >= 1");
  if (eval_every < 1) fail(ErrorKind::kConfig, "eval_every must be >= 1");
  if (k < 1) fail(ErrorKind::kConfig, "k must be >= 1");
  if (threads < 1) fail(ErrorKind::kConfig, "threads must be >= 1");
  adam.validate();
}

const EpochRecord& TrainHistory::best() const {
  for (const EpochRecord& r : epochs) {
    if (r.epoch == best_epoch) return r;
  }
  fail(ErrorKind::kState, "history has no best epoch");
}

double batch_loss(const Recommender& model,
                  std::span<const TrainExample> batch,
                  const ItemCorpus* corpus) {
  if (batch.empty()) fail(ErrorKind::kInvalidArgument, "empty batch");
  Tape tape;
  double total = 0.0;
  for (const TrainExample& ex : batch) {
    tape.reset();
    const Var pred = model.forward(tape, ex.user, ex.item,
                                   words_for(model, corpus, ex.item));
    total += tape.scalar(tape.bce_loss(pred, ex.label));
  }
  return total / static_cast<double>(batch.size());
}

double train_epoch(Recommender& model, const LooSplit& split,
                   const InteractionSet& observed, const ItemCorpus* corpus,
                   const TrainConfig& cfg, std::int64_t epoch_idx) {
  cfg.validate();
  check_inputs(model, split, corpus);
  const std::vector<TrainExample> examples =
      make_epoch_examples(split, observed, cfg.neg_ratio, cfg.seed, epoch_idx);
  if (examples.empty()) fail(ErrorKind::kState, "no training examples");

  std::vector<Parameter*> params = model.parameters();
  zero_grads(params);
  Tape tape;
  double epoch_total = 0.0;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t begin = 0; begin < examples.size(); begin += batch) {
    const std::size_t end = std::min(examples.size(), begin + batch);
    const double inv = 1.0 / static_cast<double>(end - begin);
    double batch_total = 0.0;
    // Gradients accumulate across the per-example tapes, so one update
    // sees the mean-loss gradient of the whole batch.
    for (std::size_t k = begin; k < end; ++k) {
      const TrainExample& ex = examples[k];
      tape.reset();
      const Var pred = model.forward(tape, ex.user, ex.item,
                                     words_for(model, corpus, ex.item));
      auto diagnose = [&](const char* what) {
        fail(ErrorKind::kNumeric,
             std::string("non-finite ") + what + " at epoch " +
                 std::to_string(epoch_idx + 1) + ", batch " +
                 std::to_string(begin / batch) + " (user " +
                 std::to_string(ex.user) + ", item " +
                 std::to_string(ex.item) + ", label " +
                 std::to_string(ex.label) + ")");
      };
      if (!std::isfinite(tape.scalar(pred))) diagnose("prediction");
      const Var loss = tape.bce_loss(pred, ex.label);
      const double value = tape.scalar(loss);
      if (!std::isfinite(value)) diagnose("loss");
      batch_total += value;
      tape.scale(loss, inv);
      tape.backward();
    }
    adam_step(params, cfg.adam);
    epoch_total += batch_total;
  }
  return epoch_total / static_cast<double>(examples.size());
}

ModelHeader checkpoint_header(const Recommender& model, std::uint64_t seed,
                              const EpochRecord* best,
                              const ModelHeader& extra) {
  ModelHeader header = model.header();
  for (const auto& [key, value] : extra) header.try_emplace(key, value);
  header["seed"] = std::to_string(seed);
  if (best != nullptr) {
    char buf[64];
    header["epoch"] = std::to_string(best->epoch);
    std::snprintf(buf, sizeof(buf), "%.17g", best->val_hr);
    header["val_hr"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", best->val_ndcg);
    header["val_ndcg"] = buf;
  }
  return header;
}

void save_model(const Recommender& model, const std::filesystem::path& path,
                std::uint64_t seed, const EpochRecord* best,
                const ModelHeader& extra) {
  const std::vector<const Parameter*> params = model.parameters();
  save_checkpoint(path, checkpoint_header(model, seed, best, extra), params);
}

FitResult fit(Recommender& model, const LooSplit& split,
              const ItemCorpus* corpus, const TrainConfig& cfg) {
  cfg.validate();
  if (split.val.empty()) {
    fail(ErrorKind::kState,
         "no eval-eligible users (every user has fewer than " +
             std::to_string(split.min_interactions) + " interactions)");
  }
  check_inputs(model, split, corpus);
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  const InteractionSet observed = split.observed();
  FitResult result;
  EvalOptions eval_opts;
  eval_opts.k = cfg.k;
  eval_opts.target = EvalTarget::kValidation;
  eval_opts.threads = cfg.threads;

  for (std::int32_t e = 0; e < cfg.epochs; ++e) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = e + 1;
    rec.loss = train_epoch(model, split, observed, corpus, cfg, e);
    const bool eval_now = rec.epoch % cfg.eval_every == 0 || e + 1 == cfg.epochs;
    if (eval_now) {
      const EvalReport report = evaluate(model, split, corpus, eval_opts);
      rec.val_hr = report.hr;
      rec.val_ndcg = report.ndcg;
    } else {
      rec.val_hr = std::numeric_limits<double>::quiet_NaN();
      rec.val_ndcg = std::numeric_limits<double>::quiet_NaN();
    }
    if (cfg.record_seconds) {
      rec.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    }
    result.history.epochs.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);

    if (eval_now && (!result.best || better(rec, result.history.best()))) {
      result.history.best_epoch = rec.epoch;
      result.best = model.clone();
      if (!cfg.out_dir.empty()) {
        save_model(*result.best, cfg.out_dir / "best.ckpt", cfg.seed, &rec,
                   cfg.extra_header);
      }
    }
    if (cfg.save_epoch_checkpoints && !cfg.out_dir.empty()) {
      save_model(model,
                 cfg.out_dir / ("epoch-" + std::to_string(rec.epoch) + ".ckpt"),
                 cfg.seed, eval_now ? &rec : nullptr, cfg.extra_header);
    }
  }
  return result;
}

void log_history(const TrainHistory& history,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "epoch,loss,val_hr10,val_ndcg10,seconds\n";
  for (const EpochRecord& r : history.epochs) {
    out << r.epoch << ',' << fixed(r.loss, 12) << ',' << fixed(r.val_hr, 12)
        << ',' << fixed(r.val_ndcg, 12) << ',' << fixed(r.seconds, 3) << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

TrainHistory read_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "epoch,loss,val_hr10,val_ndcg10,seconds") {
    fail(ErrorKind::kFormat, path.string() + ": missing history header");
  }
  TrainHistory history;
  std::size_t lineno = 1;
  auto parse = [&](const std::string& field) {
    if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != field.size() || field.empty()) {
      fail(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) +
                                  ": bad number '" + field + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      fail(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) +
                                  ": expected 5 fields");
    }
    EpochRecord r;
    r.epoch = static_cast<std::int32_t>(parse(fields[0]));
    r.loss = parse(fields[1]);
    r.val_hr = parse(fields[2]);
    r.val_ndcg = parse(fields[3]);
    r.seconds = parse(fields[4]);
    history.epochs.push_back(r);
  }
  const EpochRecord* best = nullptr;
  for (const EpochRecord& r : history.epochs) {
    if (std::isnan(r.val_hr)) continue;
    if (best == nullptr || better(r, *best)) best = &r;
  }
  if (best != nullptr) history.best_epoch = best->epoch;
  return history;
}

}  // namespace lcmr
