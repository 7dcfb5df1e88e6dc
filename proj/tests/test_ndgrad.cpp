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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "lcmr/ndgrad.hpp"
#include "test_util.hpp"

using namespace lcmr;
using lcmr::testing::error_kind_of;

namespace {

Parameter filled(std::string name, std::vector<std::size_t> shape,
                 std::vector<double> values) {
  Parameter p(std::move(name), std::move(shape));
  std::copy(values.begin(), values.end(), p.value().begin());
  return p;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

TEST_CASE("init_gaussian sample mean and variance") {
  std::mt19937_64 rng(11);
  Parameter small = init_gaussian("w", {100, 100}, 0.01, rng);
  const double mean =
      std::accumulate(small.value().begin(), small.value().end(), 0.0) / 1e4;
  CHECK(std::abs(mean) < 0.01);

  Parameter big = init_gaussian("v", {1000, 100}, 0.01, rng);
  double m = 0.0;
  for (double x : big.value()) m += x;
  m /= static_cast<double>(big.size());
  double var = 0.0;
  for (double x : big.value()) var += (x - m) * (x - m);
  var /= static_cast<double>(big.size() - 1);
  CHECK(var == doctest::Approx(1e-4).epsilon(0.05));

  CHECK(error_kind_of([&] { init_gaussian("z", {2, 2}, 0.0, rng); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("embed_lookup routes one-hot gradients") {
  Parameter table = filled("t", {3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tape tape;
  Var row = tape.embed_lookup(table, 1);
  const auto v = tape.value(row);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == 0.0);

  const auto up = ones(3);
  tape.dot(row, tape.constant(up, 1, 3));
  tape.backward();
  const std::vector<double> expect = {0, 0, 0, 1, 1, 1, 0, 0, 0};
  for (std::size_t k = 0; k < expect.size(); ++k) CHECK(table.grad()[k] == expect[k]);

  CHECK(error_kind_of([&] { tape.embed_lookup(table, 3); }) == ErrorKind::kIndex);
  CHECK(error_kind_of([&] { tape.embed_lookup(table, -1); }) == ErrorKind::kIndex);
}

TEST_CASE("embed_lookup gradient matches finite differences") {
  std::mt19937_64 rng(3);
  Parameter table = init_gaussian("t", {4, 5}, 1.0, rng);
  const auto w = std::vector<double>{0.3, -1.2, 0.7, 2.0, -0.4};
  Parameter* params[] = {&table};
  const double err = finite_diff_check(
      [&](Tape& t) {
        Var e = t.embed_lookup(table, 2);
        return t.sigmoid(t.dot(e, t.constant(w, 1, 5)));
      },
      params);
  CHECK(err <= 1e-6);
}

TEST_CASE("concat values and slice routing") {
  Parameter a = filled("a", {2}, {1, 2});
  Parameter b = filled("b", {1}, {3});
  Tape tape;
  Var c = tape.concat(tape.param(a), tape.param(b));
  REQUIRE(tape.cols(c) == 3);
  CHECK(tape.value(c)[0] == 1.0);
  CHECK(tape.value(c)[1] == 2.0);
  CHECK(tape.value(c)[2] == 3.0);

  const std::vector<double> g = {0.5, -2.0, 7.0};
  tape.dot(c, tape.constant(g, 1, 3));
  tape.backward();
  CHECK(a.grad()[0] == 0.5);
  CHECK(a.grad()[1] == -2.0);
  CHECK(b.grad()[0] == 7.0);

  Tape t2;
  Var x = t2.param(a);
  Var e = t2.constant({}, 1, 0);
  Var xe = t2.concat(x, e);
  REQUIRE(t2.cols(xe) == 2);
  CHECK(t2.value(xe)[0] == 1.0);
  CHECK(t2.value(xe)[1] == 2.0);
}

TEST_CASE("attend single slot returns the value row") {
  const std::vector<double> q = {0.3, -9.0};
  const std::vector<double> k = {5.0, 1.0};
  const std::vector<double> v = {-1.5, 2.5};
  for (double beta : {0.1, 1.0, 40.0}) {
    Tape tape;
    Var out = tape.attend(tape.constant(q, 1, 2), tape.constant(k, 1, 2),
                          tape.constant(v, 1, 2), beta);
    CHECK(tape.attention_weights(out)[0] == 1.0);
    CHECK(tape.value(out)[0] == -1.5);
    CHECK(tape.value(out)[1] == 2.5);
  }
}

TEST_CASE("attend with identical keys is uniform") {
  const std::vector<double> q = {0.4, 1.1, -0.2};
  std::vector<double> k;
  for (int j = 0; j < 5; ++j) k.insert(k.end(), {0.9, -0.3, 2.0});
  std::vector<double> v(15);
  std::iota(v.begin(), v.end(), 0.0);
  Tape tape;
  Var out = tape.attend(tape.constant(q, 1, 3), tape.constant(k, 5, 3),
                        tape.constant(v, 5, 3), 0.7);
  for (double a : tape.attention_weights(out)) CHECK(a == doctest::Approx(0.2).epsilon(1e-12));
  // Column means of v.
  CHECK(tape.value(out)[0] == doctest::Approx(6.0));
  CHECK(tape.value(out)[1] == doctest::Approx(7.0));
  CHECK(tape.value(out)[2] == doctest::Approx(8.0));
}

TEST_CASE("attend two-slot hand evaluation") {
  const double beta = 1.0 / std::sqrt(2.0);
  // softmax(beta, 0) by hand.
  const double e0 = std::exp(beta);
  const double a0 = e0 / (e0 + 1.0);
  const double a1 = 1.0 / (e0 + 1.0);
  CHECK(a0 == doctest::Approx(0.6698).epsilon(1e-4));
  CHECK(a1 == doctest::Approx(0.3302).epsilon(1e-4));

  const std::vector<double> q = {1, 0};
  const std::vector<double> eye = {1, 0, 0, 1};
  Tape tape;
  Var out = tape.attend(tape.constant(q, 1, 2), tape.constant(eye, 2, 2),
                        tape.constant(eye, 2, 2), beta);
  const auto a = tape.attention_weights(out);
  CHECK(a[0] == doctest::Approx(a0).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(a1).epsilon(1e-14));
  CHECK(tape.value(out)[0] == doctest::Approx(a0).epsilon(1e-14));
  CHECK(tape.value(out)[1] == doctest::Approx(a1).epsilon(1e-14));
}

TEST_CASE("attention weights form a distribution") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 9;
    const std::size_t d = 1 + trial % 4;
    std::vector<double> q(d), k(n * d), v(n * d);
    for (double& x : q) x = g(rng);
    for (double& x : k) x = g(rng);
    for (double& x : v) x = g(rng);
    Tape tape;
    Var out = tape.attend(tape.constant(q, 1, d), tape.constant(k, n, d),
                          tape.constant(v, n, d), 1.0);
    double sum = 0.0;
    for (double a : tape.attention_weights(out)) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      sum += a;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("softmax is shift invariant") {
  // Appending a constant coordinate to query and keys adds beta*c*s to every
  // logit, which must not change the weights.
  const std::vector<double> q = {0.3, -1.0, 1.0};
  const std::vector<double> k = {1.0, 2.0, 0.0, -0.5, 0.1, 0.0, 4.0, -3.0, 0.0};
  std::vector<double> base(3), shifted(3);
  softmax_scores(q, k.data(), 3, 0.9, base);
  std::vector<double> k2 = k;
  for (int j = 0; j < 3; ++j) k2[j * 3 + 2] = 250.0;
  softmax_scores(q, k2.data(), 3, 0.9, shifted);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(base[j] - shifted[j]) <= 1e-12);
}

TEST_CASE("attend gradients match finite differences") {
  std::mt19937_64 rng(5);
  Parameter q = init_gaussian("q", {1, 3}, 1.0, rng);
  Parameter k = init_gaussian("k", {4, 3}, 1.0, rng);
  Parameter v = init_gaussian("v", {4, 3}, 1.0, rng);
  const std::vector<double> w = {0.5, -1.0, 0.25};
  Parameter* params[] = {&q, &k, &v};
  const double err = finite_diff_check(
      [&](Tape& t) {
        Var o = t.attend(t.param(q), t.param(k), t.param(v), 0.8);
        return t.bce_loss(t.sigmoid(t.dot(o, t.constant(w, 1, 3))), 1);
      },
      params);
  CHECK(err <= 1e-6);
}

TEST_CASE("sigmoid values") {
  CHECK(stable_sigmoid(0.0) == 0.5);
  CHECK(stable_sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-14));
  const double tiny = stable_sigmoid(-40.0);
  CHECK(std::isfinite(tiny));
  CHECK(tiny > 0.0);
  CHECK(tiny <= 1e-15);
  CHECK(stable_sigmoid(800.0) == 1.0);
  CHECK(stable_sigmoid(-800.0) >= 0.0);

  Parameter h = filled("h", {2}, {1.0, 0.0});
  const std::vector<double> z = {std::log(3.0), 5.0};
  Tape tape;
  Var s = tape.sigmoid_dot(tape.param(h), tape.constant(z, 1, 2));
  CHECK(tape.scalar(s) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("bce loss values") {
  Tape tape;
  const std::vector<double> half = {0.5};
  CHECK(tape.scalar(tape.bce_loss(tape.constant(half, 1, 1), 1)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const std::vector<double> near_one = {1.0 - 1e-15};
  CHECK(tape.scalar(tape.bce_loss(tape.constant(near_one, 1, 1), 1)) < 1e-11);
  const std::vector<double> one = {1.0};
  const double clamped = tape.scalar(tape.bce_loss(tape.constant(one, 1, 1), 0));
  CHECK(std::isfinite(clamped));
  CHECK(clamped == doctest::Approx(-std::log(1e-12)).epsilon(1e-6));
  CHECK(error_kind_of([&] { tape.bce_loss(tape.constant(half, 1, 1), 2); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("bce loss is nonnegative") {
  Tape tape;
  for (double p = 0.0; p <= 1.0; p += 0.01) {
    const std::vector<double> v = {p};
    for (int y : {0, 1}) CHECK(tape.scalar(tape.bce_loss(tape.constant(v, 1, 1), y)) >= 0.0);
  }
}

TEST_CASE("bce gradient through sigmoid is pred minus label") {
  for (double x0 : {-2.0, -0.3, 0.0, 1.7}) {
    for (int y : {0, 1}) {
      Parameter x = filled("x", {1}, {x0});
      Tape tape;
      tape.bce_loss(tape.sigmoid(tape.param(x)), y);
      tape.backward();
      const double pred = 1.0 / (1.0 + std::exp(-x0));
      CHECK(x.grad()[0] == doctest::Approx(pred - y).epsilon(1e-12));

      // Central difference on the closed-form loss.
      auto loss = [&](double v) {
        const double p = 1.0 / (1.0 + std::exp(-v));
        return -(y * std::log(p) + (1 - y) * std::log(1 - p));
      };
      const double h = 1e-5;
      const double fd = (loss(x0 + h) - loss(x0 - h)) / (2 * h);
      CHECK(std::abs(x.grad()[0] - fd) <= 1e-7);
    }
  }
}

TEST_CASE("backward of p*p") {
  Parameter p = filled("p", {1}, {3.0});
  Tape tape;
  tape.dot(tape.param(p), tape.param(p));
  tape.backward();
  CHECK(p.grad()[0] == 6.0);
}

TEST_CASE("gradients accumulate across uses and passes") {
  Parameter p = filled("p", {1}, {2.0});
  const std::vector<double> c = {5.0};
  Tape tape;
  Var a = tape.dot(tape.param(p), tape.constant(c, 1, 1));
  Var b = tape.dot(tape.param(p), tape.constant(c, 1, 1));
  tape.add(a, b);
  tape.backward();
  CHECK(p.grad()[0] == 10.0);

  tape.reset();
  tape.dot(tape.param(p), tape.constant(c, 1, 1));
  tape.backward();
  CHECK(p.grad()[0] == 15.0);

  p.zero_grad();
  CHECK(p.grad()[0] == 0.0);
}

TEST_CASE("backward requires a scalar tail") {
  Tape tape;
  CHECK(error_kind_of([&] { tape.backward(); }) == ErrorKind::kState);
  const std::vector<double> v = {1.0, 2.0};
  tape.constant(v, 1, 2);
  CHECK(error_kind_of([&] { tape.backward(); }) == ErrorKind::kState);
}

TEST_CASE("const parameters record no gradient") {
  Parameter p = filled("p", {1}, {3.0});
  const Parameter& cp = p;
  Tape tape;
  Var x = tape.param(cp);
  Var y = tape.param(p);
  tape.dot(x, y);
  tape.backward();
  CHECK(p.grad()[0] == 3.0);
}

TEST_CASE("adam first step moves by lr") {
  Parameter p = filled("p", {3}, {0.5, -1.0, 2.0});
  const std::vector<double> g = {0.3, -7.0, 1e-3};
  std::copy(g.begin(), g.end(), p.grad().begin());
  AdamConfig cfg;
  Parameter* params[] = {&p};
  adam_step(params, cfg);
  CHECK(p.value()[0] == doctest::Approx(0.5 - cfg.lr).epsilon(1e-6));
  CHECK(p.value()[1] == doctest::Approx(-1.0 + cfg.lr).epsilon(1e-6));
  CHECK(p.value()[2] == doctest::Approx(2.0 - cfg.lr).epsilon(1e-4));
  CHECK(p.step_count() == 1);
  for (double x : p.grad()) CHECK(x == 0.0);
}

TEST_CASE("adam with zero gradient leaves values") {
  Parameter p = filled("p", {2}, {0.25, -4.0});
  Parameter* params[] = {&p};
  AdamConfig cfg;
  for (int s = 0; s < 5; ++s) adam_step(params, cfg);
  CHECK(p.value()[0] == 0.25);
  CHECK(p.value()[1] == -4.0);
}

TEST_CASE("adam minimizes a 1-d quadratic") {
  Parameter p = filled("p", {1}, {0.0});
  Parameter* params[] = {&p};
  AdamConfig cfg;
  cfg.lr = 0.1;
  for (int s = 0; s < 200; ++s) {
    p.grad()[0] = 2.0 * (p.value()[0] - 1.0);
    adam_step(params, cfg);
  }
  CHECK(std::abs(p.value()[0] - 1.0) < 0.05);
}

TEST_CASE("adam rejects non-finite gradients by name") {
  Parameter p = filled("central_keys_0", {1}, {0.0});
  p.grad()[0] = std::nan("");
  Parameter* params[] = {&p};
  try {
    adam_step(params, AdamConfig{});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
    CHECK(std::string(e.what()).find("central_keys_0") != std::string::npos);
  }
  AdamConfig bad;
  bad.lr = 0.0;
  CHECK(error_kind_of([&] { bad.validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    std::mt19937_64 rng(9);
    Parameter p = init_gaussian("p", {4, 4}, 0.1, rng);
    Parameter* params[] = {&p};
    for (int s = 0; s < 25; ++s) {
      Tape tape;
      tape.bce_loss(tape.sigmoid(tape.dot(tape.embed_lookup(p, s % 4),
                                          tape.embed_lookup(p, (s + 1) % 4))),
                    s % 2);
      tape.backward();
      adam_step(params, AdamConfig{});
    }
    return std::vector<double>(p.value().begin(), p.value().end());
  };
  CHECK(run() == run());
}

TEST_CASE("finite difference check on a quadratic") {
  Parameter p = filled("p", {3}, {0.7, -1.3, 2.2});
  const std::vector<double> c = {1.0, 2.0, -3.0};
  Parameter* params[] = {&p};
  auto quad = [&](Tape& t) {
    Var x = t.param(p);
    return t.add(t.dot(x, x), t.dot(x, t.constant(c, 1, 3)));
  };
  CHECK(finite_diff_check(quad, params) <= 1e-9);

  FiniteDiffOptions zero;
  zero.step = 0.0;
  CHECK(error_kind_of([&] { finite_diff_check(quad, params, zero); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("finite difference check rejects non-finite loss") {
  Parameter p = filled("p", {1}, {1.0});
  const std::vector<double> inf = {std::numeric_limits<double>::infinity()};
  Parameter* params[] = {&p};
  CHECK(error_kind_of([&] {
          finite_diff_check(
              [&](Tape& t) { return t.dot(t.param(p), t.constant(inf, 1, 1)); },
              params);
        }) == ErrorKind::kNumeric);
}

TEST_CASE("affine and relu gradients match finite differences") {
  std::mt19937_64 rng(13);
  Parameter w = init_gaussian("w", {3, 4}, 1.0, rng);
  Parameter b = init_gaussian("b", {3}, 1.0, rng);
  Parameter x = init_gaussian("x", {4}, 1.0, rng);
  Parameter h = init_gaussian("h", {3}, 1.0, rng);
  Parameter* params[] = {&w, &b, &x, &h};
  const double err = finite_diff_check(
      [&](Tape& t) {
        Var a = t.relu(t.affine(t.param(w), t.param(b), t.param(x)));
        return t.bce_loss(t.sigmoid(t.dot(t.param(h), a)), 0);
      },
      params);
  CHECK(err <= 1e-6);
}
