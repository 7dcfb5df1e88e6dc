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

// lcmr: prepare -> split -> train -> evaluate -> ablate -> recommend.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcmr/error.hpp"
#include "lcmr/pipeline.hpp"

namespace {

using namespace lcmr;

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : read_run_config(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kConfig, "--set expects key=value, got '" + kv + "'");
    }
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

EvalTarget parse_target(const std::string& name) {
  if (name == "test") return EvalTarget::kTest;
  if (name == "val" || name == "validation") return EvalTarget::kValidation;
  fail(ErrorKind::kInvalidArgument, "target must be test or val, got '" + name + "'");
}

int report_error(std::string_view category, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n') c = ' ';
  }
  std::fprintf(stderr, "error[%.*s]: %s\n", static_cast<int>(category.size()),
               category.data(), flat.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LCMR: local and centralized memories recommender"};
  app.require_subcommand(1);

  PrepareOptions prep;
  std::string interactions_format = "citeulike-users";
  std::string text_format = "raw-tokens";
  auto* prepare = app.add_subcommand("prepare", "build a corpus directory from raw data");
  prepare->add_option("--interactions", prep.interactions, "interaction file")->required();
  prepare->add_option("--interactions-format", interactions_format,
                      "citeulike-users or pairs")
      ->capture_default_str();
  prepare->add_option("--text", prep.text, "item text, one item per line")->required();
  prepare->add_option("--text-format", text_format, "raw-tokens or bow-counts")
      ->capture_default_str();
  prepare->add_option("--vocab", prep.vocab, "vocabulary for bow-counts input");
  prepare->add_option("--vocab-size", prep.vocab_size, "words kept by tf-idf")
      ->capture_default_str();
  prepare->add_option("--stopwords", prep.stopwords, "stopword list (default: bundled)");
  prepare->add_option("--out", prep.out_dir, "output directory")->required();

  PlantedOptions planted;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a planted-structure corpus");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--users", planted.num_users)->capture_default_str();
  synth->add_option("--items", planted.num_items)->capture_default_str();
  synth->add_option("--groups", planted.num_groups)->capture_default_str();
  synth->add_option("--affinity", planted.affinity)->capture_default_str();
  synth->add_option("--skew", planted.popularity_skew)->capture_default_str();
  synth->add_option("--seed", planted.seed)->capture_default_str();

  SplitCommand split_cmd;
  auto* split = app.add_subcommand("split", "leave-one-out split with eval negatives");
  split->add_option("--corpus", split_cmd.corpus_dir, "prepared corpus directory")
      ->required();
  split->add_option("--seed", split_cmd.seed)->capture_default_str();
  split->add_option("--min-interactions", split_cmd.min_interactions)
      ->capture_default_str();
  split->add_option("--out", split_cmd.out, "split file (default <corpus>/split.txt)");

  std::string config_path;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "train a model from a run config");
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--set", overrides, "override a config key (key=value)");

  auto* ablate = app.add_subcommand("ablate", "train full, no_local and no_central");
  ablate->add_option("--config", config_path, "key=value config file");
  ablate->add_option("--set", overrides, "override a config key (key=value)");

  EvaluateCommand eval_cmd;
  std::string target = "test";
  auto* evaluate = app.add_subcommand("evaluate", "rank held-out items");
  evaluate->add_option("--checkpoint", eval_cmd.checkpoint)->required();
  evaluate->add_option("--split", eval_cmd.split)->required();
  evaluate->add_option("--corpus", eval_cmd.corpus_dir, "prepared corpus directory");
  evaluate->add_option("--k", eval_cmd.k)->capture_default_str();
  evaluate->add_option("--target", target, "test or val")->capture_default_str();
  evaluate->add_option("--threads", eval_cmd.threads)->capture_default_str();
  evaluate->add_option("--report", eval_cmd.report, "report path");

  std::string pop_split;
  std::string pop_out;
  auto* itempop = app.add_subcommand("itempop", "popularity baseline checkpoint");
  itempop->add_option("--split", pop_split)->required();
  itempop->add_option("--out", pop_out)->required();

  RecommendCommand rec;
  auto* recommend = app.add_subcommand("recommend", "top-n unseen items for a user");
  recommend->add_option("--checkpoint", rec.checkpoint)->required();
  recommend->add_option("--split", rec.split)->required();
  recommend->add_option("--corpus", rec.corpus_dir, "prepared corpus directory");
  recommend->add_option("--user", rec.user)->required();
  recommend->add_option("--n", rec.n)->capture_default_str();

  auto* keys = app.add_subcommand("config-keys", "list run config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    if (*prepare) {
      prep.interactions_format = parse_interaction_format(interactions_format);
      prep.text_format = parse_text_format(text_format);
      cmd_prepare(prep, std::cout);
    } else if (*synth) {
      cmd_synth(planted, synth_out, std::cout);
    } else if (*split) {
      cmd_split(split_cmd, std::cout);
    } else if (*train) {
      cmd_train(load_config(config_path, overrides), std::cout);
    } else if (*ablate) {
      cmd_ablate(load_config(config_path, overrides), std::cout);
    } else if (*evaluate) {
      eval_cmd.target = parse_target(target);
      cmd_evaluate(eval_cmd, std::cout);
    } else if (*itempop) {
      cmd_itempop(pop_split, pop_out, std::cout);
    } else if (*recommend) {
      const auto ranked = cmd_recommend(rec);
      char line[96];
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        std::snprintf(line, sizeof(line), "%zu %d %.10g\n", k + 1,
                      ranked[k].first, ranked[k].second);
        std::cout << line;
      }
    } else if (*keys) {
      for (const ConfigKey& key : config_schema()) {
        std::cout << key.name << "\t" << key.help << '\n';
      }
    }
  } catch (const Error& e) {
    return report_error(error_kind_name(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
