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

#include <cstdlib>
#include <string>

#include "doctest.h"
#include "lcmr/config.hpp"
#include "test_util.hpp"

using namespace lcmr;
using lcmr::testing::error_kind_of;
using lcmr::testing::scratch_dir;

TEST_CASE("defaults follow the reported settings") {
  const RunConfig cfg;
  CHECK(cfg.d == 200);
  CHECK(cfg.hops == 3);
  CHECK(cfg.memory_size == 100);
  CHECK(cfg.epochs == 50);
  CHECK(cfg.batch_size == 128);
  CHECK(cfg.neg_ratio == 1);
  CHECK(cfg.lr == 0.001);
  CHECK(cfg.init_sigma == 0.01);
  CHECK(cfg.k == 10);
  const TrainConfig t = cfg.train_config();
  CHECK(t.adam.beta1 == 0.9);
  CHECK(t.adam.beta2 == 0.999);
  CHECK(t.adam.eps == 1e-8);
}

TEST_CASE("parse settings with comments") {
  const RunConfig cfg = parse_run_config(
      "# run\ncorpus_dir = data/cul\n\nvariant=no_local  # trailing\nd=64\nhops=1\n"
      "mlp_layers=32,16\nrecord_seconds=false\nlr=0.01\n");
  CHECK(cfg.corpus_dir == "data/cul");
  CHECK(cfg.variant == Variant::kNoLocal);
  CHECK(cfg.d == 64);
  CHECK(cfg.hops == 1);
  CHECK(cfg.mlp_layers == std::vector<std::int32_t>{32, 16});
  CHECK_FALSE(cfg.record_seconds);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.split_path() == std::filesystem::path("data/cul") / "split.txt");
}

TEST_CASE("unknown keys and bad values name the key") {
  try {
    parse_run_config("d=8\nhopz=2\n", "run.cfg");
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    const std::string msg = e.what();
    CHECK(msg.find("hopz") != std::string::npos);
    CHECK(msg.find("run.cfg:2") != std::string::npos);
  }
  RunConfig cfg;
  CHECK(error_kind_of([&] { apply_setting(cfg, "d", "ten"); }) == ErrorKind::kConfig);
  CHECK(error_kind_of([&] { apply_setting(cfg, "variant", "partial"); }) == ErrorKind::kConfig);
  CHECK(error_kind_of([&] { apply_setting(cfg, "record_seconds", "maybe"); }) == ErrorKind::kConfig);
  CHECK(error_kind_of([&] { parse_run_config("no equals sign\n"); }) == ErrorKind::kConfig);
  try {
    cfg.d = 7;
    cfg.validate();
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("d") != std::string::npos);
  }
  RunConfig model;
  model.model = "svd";
  CHECK(error_kind_of([&] { model.validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("config echo round trips") {
  const auto dir = scratch_dir("config_rt");
  RunConfig cfg;
  cfg.corpus_dir = "x/y";
  cfg.variant = Variant::kNoCentral;
  cfg.beta = 0.125;
  cfg.seed = 99;
  cfg.mlp_layers = {8, 4};
  write_run_config(cfg, dir / "config.txt");
  const RunConfig back = read_run_config(dir / "config.txt");
  CHECK(format_run_config(back) == format_run_config(cfg));
  // Every schema key appears in the echo.
  const std::string text = format_run_config(cfg);
  for (const ConfigKey& key : config_schema()) {
    CHECK(text.find(std::string(key.name) + "=") != std::string::npos);
  }
  CHECK(config_schema().size() == 25);
}

TEST_CASE("environment overrides the output directory") {
  RunConfig cfg;
  ::setenv("LCMR_OUTPUT_DIR", "/tmp/elsewhere", 1);
  apply_environment(cfg);
  ::unsetenv("LCMR_OUTPUT_DIR");
  CHECK(cfg.out_dir == "/tmp/elsewhere");
  RunConfig untouched;
  apply_environment(untouched);
  CHECK(untouched.out_dir == "runs/lcmr");
}
