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
#include "lcmr/config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lcmr/error.hpp"

namespace lcmr {

namespace {

constexpr std::array<ConfigKey, 25> kSchema{{
    {"corpus_dir", "prepared corpus directory"},
    {"split", "split file (default <corpus_dir>/split.txt)"},
    {"out_dir", "output directory"},
    {"seed", "seed for init, sampling and shuffling"},
    {"model", "lcmr or mlp"},
    {"variant", "full, no_local, no_central or embedding_only"},
    {"d", "joint embedding dimension (even)"},
    {"hops", "memory hops L"},
    {"memory_size", "centralized memory slots N"},
    {"beta", "attention scale; 0 uses d^-1/2"},
    {"max_words_per_item", "local memory word cap; 0 is unlimited"},
    {"init_sigma", "std of the Gaussian initializer"},
    {"mlp_layers", "comma-separated hidden widths; empty uses d/2,d/4"},
    {"epochs", "training epochs"},
    {"batch_size", "examples per update"},
    {"neg_ratio", "negatives per positive"},
    {"lr", "Adam learning rate"},
    {"adam_beta1", "Adam first-moment decay"},
    {"adam_beta2", "Adam second-moment decay"},
    {"adam_eps", "Adam epsilon"},
    {"eval_every", "validate every n epochs"},
    {"k", "ranking cutoff"},
    {"threads", "validation scoring threads"},
    {"save_epoch_checkpoints", "write epoch-<k>.ckpt files"},
    {"record_seconds", "write wall-clock seconds to the history"},
}};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  fail(ErrorKind::kConfig, "config key '" + std::string(key) + "': '" +
                               std::string(value) + "' is not " +
                               std::string(expected));
}

template <class Int>
Int to_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, value, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "a boolean");
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string setting_value(const RunConfig& c, std::string_view key) {
  if (key == "corpus_dir") return c.corpus_dir.string();
  if (key == "split") return c.split.string();
  if (key == "out_dir") return c.out_dir.string();
  if (key == "seed") return std::to_string(c.seed);
  if (key == "model") return c.model;
  if (key == "variant") return std::string(variant_name(c.variant));
  if (key == "d") return std::to_string(c.d);
  if (key == "hops") return std::to_string(c.hops);
  if (key == "memory_size") return std::to_string(c.memory_size);
  if (key == "beta") return fmt_double(c.beta);
  if (key == "max_words_per_item") return std::to_string(c.max_words_per_item);
  if (key == "init_sigma") return fmt_double(c.init_sigma);
  if (key == "mlp_layers") {
    std::string out;
    for (std::size_t k = 0; k < c.mlp_layers.size(); ++k) {
      if (k > 0) out += ',';
      out += std::to_string(c.mlp_layers[k]);
    }
    return out;
  }
  if (key == "epochs") return std::to_string(c.epochs);
  if (key == "batch_size") return std::to_string(c.batch_size);
  if (key == "neg_ratio") return std::to_string(c.neg_ratio);
  if (key == "lr") return fmt_double(c.lr);
  if (key == "adam_beta1") return fmt_double(c.adam_beta1);
  if (key == "adam_beta2") return fmt_double(c.adam_beta2);
  if (key == "adam_eps") return fmt_double(c.adam_eps);
  if (key == "eval_every") return std::to_string(c.eval_every);
  if (key == "k") return std::to_string(c.k);
  if (key == "threads") return std::to_string(c.threads);
  if (key == "save_epoch_checkpoints") {
    return c.save_epoch_checkpoints ? "true" : "false";
  }
  if (key == "record_seconds") return c.record_seconds ? "true" : "false";
  fail(ErrorKind::kConfig, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::span<const ConfigKey> config_schema() { return kSchema; }

std::filesystem::path RunConfig::split_path() const {
  if (!split.empty()) return split;
  if (corpus_dir.empty()) {
    fail(ErrorKind::kConfig, "set 'split' or 'corpus_dir' to locate the split");
  }
  return corpus_dir / "split.txt";
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.neg_ratio = neg_ratio;
  t.adam.lr = lr;
  t.adam.beta1 = adam_beta1;
  t.adam.beta2 = adam_beta2;
  t.adam.eps = adam_eps;
  t.seed = seed;
  t.eval_every = eval_every;
  t.k = k;
  t.threads = threads;
  t.out_dir = out_dir;
  t.save_epoch_checkpoints = save_epoch_checkpoints;
  t.record_seconds = record_seconds;
  return t;
}

void RunConfig::validate() const {
  if (model != "lcmr" && model != "mlp") {
    fail(ErrorKind::kConfig, "config key 'model': expected lcmr or mlp, got '" +
                                 model + "'");
  }
  if (d < 2 || d % 2 != 0) {
    fail(ErrorKind::kConfig, "config key 'd': must be even and >= 2");
  }
  if (hops < 1) fail(ErrorKind::kConfig, "config key 'hops': must be >= 1");
  if (memory_size < 1) {
    fail(ErrorKind::kConfig, "config key 'memory_size': must be >= 1");
  }
  if (beta < 0.0) fail(ErrorKind::kConfig, "config key 'beta': must be >= 0");
  if (max_words_per_item < 0) {
    fail(ErrorKind::kConfig, "config key 'max_words_per_item': must be >= 0");
  }
  if (!(init_sigma > 0.0)) {
    fail(ErrorKind::kConfig, "config key 'init_sigma': must be > 0");
  }
  for (std::int32_t w : mlp_layers) {
    if (w < 1) fail(ErrorKind::kConfig, "config key 'mlp_layers': widths must be >= 1");
  }
  try {
    train_config().validate();
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, e.what());
  }
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "corpus_dir") {
    c.corpus_dir = std::string(v);
  } else if (key == "split") {
    c.split = std::string(v);
  } else if (key == "out_dir") {
    c.out_dir = std::string(v);
  } else if (key == "seed") {
    c.seed = to_int<std::uint64_t>(key, v);
  } else if (key == "model") {
    c.model = std::string(v);
    if (c.model != "lcmr" && c.model != "mlp") bad_value(key, v, "lcmr or mlp");
  } else if (key == "variant") {
    try {
      c.variant = parse_variant(v);
    } catch (const Error&) {
      bad_value(key, v, "full, no_local, no_central or embedding_only");
    }
  } else if (key == "d") {
    c.d = to_int<std::int32_t>(key, v);
  } else if (key == "hops") {
    c.hops = to_int<std::int32_t>(key, v);
  } else if (key == "memory_size") {
    c.memory_size = to_int<std::int32_t>(key, v);
  } else if (key == "beta") {
    c.beta = to_double(key, v);
  } else if (key == "max_words_per_item") {
    c.max_words_per_item = to_int<std::int32_t>(key, v);
  } else if (key == "init_sigma") {
    c.init_sigma = to_double(key, v);
  } else if (key == "mlp_layers") {
    c.mlp_layers.clear();
    std::string_view rest = v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      if (!field.empty()) c.mlp_layers.push_back(to_int<std::int32_t>(key, field));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  } else if (key == "epochs") {
    c.epochs = to_int<std::int32_t>(key, v);
  } else if (key == "batch_size") {
    c.batch_size = to_int<std::int32_t>(key, v);
  } else if (key == "neg_ratio") {
    c.neg_ratio = to_int<std::int32_t>(key, v);
  } else if (key == "lr") {
    c.lr = to_double(key, v);
  } else if (key == "adam_beta1") {
    c.adam_beta1 = to_double(key, v);
  } else if (key == "adam_beta2") {
    c.adam_beta2 = to_double(key, v);
  } else if (key == "adam_eps") {
    c.adam_eps = to_double(key, v);
  } else if (key == "eval_every") {
    c.eval_every = to_int<std::int32_t>(key, v);
  } else if (key == "k") {
    c.k = to_int<std::int32_t>(key, v);
  } else if (key == "threads") {
    c.threads = to_int<std::int32_t>(key, v);
  } else if (key == "save_epoch_checkpoints") {
    c.save_epoch_checkpoints = to_bool(key, v);
  } else if (key == "record_seconds") {
    c.record_seconds = to_bool(key, v);
  } else {
    fail(ErrorKind::kConfig, "unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::kConfig, std::string(source) + ":" +
                                   std::to_string(line_no) +
                                   ": expected key=value");
    }
    const std::string_view key = trim(body.substr(0, eq));
    try {
      apply_setting(cfg, key, body.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), std::string(source) + ":" + std::to_string(line_no) +
                         ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out = "# resolved lcmr run configuration\n";
  for (const ConfigKey& key : config_schema()) {
    out += std::string(key.name) + '=' + setting_value(cfg, key.name) + '\n';
  }
  return out;
}

void write_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << format_run_config(cfg);
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

void apply_environment(RunConfig& cfg) {
  const char* dir = std::getenv("LCMR_OUTPUT_DIR");
  if (dir != nullptr && *dir != '\0') cfg.out_dir = dir;
}

}  // namespace lcmr
