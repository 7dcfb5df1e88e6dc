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

// A small reverse-mode differentiation core sized for the LCMR model: dense
// row-major parameters, a tape of vector/matrix operations, Adam, and a
// central-difference gradient checker.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lcmr {

// Dense float64 array of rank 1 or 2 with gradient and Adam moment buffers.
// Rank-1 parameters behave as a single row.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, std::vector<std::size_t> shape);

  const std::string& name() const { return name_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rows() const { return shape_.size() == 1 ? 1 : shape_[0]; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }
  std::size_t size() const { return value_.size(); }

  std::span<double> value() { return value_; }
  std::span<const double> value() const { return value_; }
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }
  std::span<double> adam_m() { return adam_m_; }
  std::span<const double> adam_m() const { return adam_m_; }
  std::span<double> adam_v() { return adam_v_; }
  std::span<const double> adam_v() const { return adam_v_; }

  std::span<double> row(std::size_t r) {
    return std::span<double>(value_).subspan(r * cols(), cols());
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(value_).subspan(r * cols(), cols());
  }

  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t steps) { step_count_ = steps; }

  void zero_grad();

 private:
  std::string name_;
  std::vector<std::size_t> shape_;
  std::vector<double> value_;
  std::vector<double> grad_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  std::int64_t step_count_ = 0;
};

// Entries drawn i.i.d. from Normal(0, sigma^2).
Parameter init_gaussian(std::string name, std::vector<std::size_t> shape,
                        double sigma, std::mt19937_64& rng);

void zero_grads(std::span<Parameter* const> params);

// Handle to a value recorded on a Tape.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Records forward operations and replays them in reverse for gradients.
//
// Parameters bound through the non-const overloads receive gradients in
// their own grad buffers; const overloads record read-only inputs, which is
// what inference uses. Buffers are retained across reset() so a Tape reused
// for many examples stops allocating after warm-up.
class Tape {
 public:
  Tape() = default;

  void reset();
  bool empty() const { return num_ops_ == 0; }
  std::size_t num_ops() const { return num_ops_; }

  // Leaves.
  Var param(Parameter& p);
  Var param(const Parameter& p);
  Var constant(std::span<const double> values, std::size_t rows,
               std::size_t cols);

  // Operations.
  Var embed_lookup(Parameter& table, std::int64_t index);
  Var embed_lookup(const Parameter& table, std::int64_t index);
  Var gather_rows(Parameter& table, std::span<const std::int32_t> indices);
  Var gather_rows(const Parameter& table,
                  std::span<const std::int32_t> indices);
  Var concat(Var a, Var b);
  // softmax(beta * keys . query) weighted sum of value rows.
  Var attend(Var query, Var keys, Var values, double beta);
  Var dot(Var a, Var b);
  Var sigmoid(Var x);
  Var sigmoid_dot(Var h, Var z) { return sigmoid(dot(h, z)); }
  Var bce_loss(Var pred, int label);
  Var scale(Var x, double factor);
  Var add(Var a, Var b);
  // weight (out x in) times x plus bias (out).
  Var affine(Var weight, Var bias, Var x);
  Var relu(Var x);

  std::size_t rows(Var v) const;
  std::size_t cols(Var v) const;
  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  // Gradient of an intermediate after backward(); parameter-bound leaves
  // report through Parameter::grad().
  std::span<const double> grad(Var v) const;
  // Cached softmax weights of the attend() that produced `out`.
  std::span<const double> attention_weights(Var out) const;

  // Seeds d(tail)/d(tail) = 1 and accumulates gradients into every
  // parameter that reached the tail. The tail must be a 1x1 value.
  void backward();

 private:
  enum class OpKind : std::uint8_t {
    kLeaf,
    kEmbed,
    kGather,
    kConcat,
    kAttend,
    kDot,
    kSigmoid,
    kBce,
    kScale,
    kAdd,
    kAffine,
    kRelu,
  };

  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> own_value;
    std::vector<double> own_grad;
    const double* ext_value = nullptr;  // parameter leaves
    double* ext_grad = nullptr;         // parameter leaves recording grads
    Parameter* table = nullptr;         // embed/gather targets
    std::vector<std::int32_t> indices;  // embed/gather rows
    std::vector<double> cache;          // attention weights, etc.
    std::int32_t in0 = -1;
    std::int32_t in1 = -1;
    std::int32_t in2 = -1;
    double scalar = 0.0;
    int label = 0;
    bool needs_grad = false;
  };

  Node& push(OpKind kind, std::size_t rows, std::size_t cols);
  const Node& node(Var v) const;
  Node& node(Var v);
  const double* value_ptr(const Node& n) const;
  double* grad_ptr(Node& n);
  void backward_node(Node& n);

  std::vector<Node> nodes_;
  std::size_t num_ops_ = 0;
  std::vector<double> scratch_;
};

// Pure-function kernels shared by the tape and the test oracles.
double stable_sigmoid(double x);
// Writes softmax(beta * keys . query) into `weights` (max-subtracted).
void softmax_scores(std::span<const double> query, const double* keys,
                    std::size_t num_slots, double beta,
                    std::span<double> weights);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Bias-corrected Adam; increments step counts and zeroes the gradients.
// Throws a numeric error naming the parameter on non-finite gradients.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);

struct FiniteDiffOptions {
  double step = 1e-5;
  // Coordinates checked per parameter; all of them when the parameter is
  // smaller than this.
  std::size_t max_coords_per_param = 64;
  std::uint64_t seed = 0;
};

// Builds the loss on the given tape and returns its (1x1) Var.
using LossBuilder = std::function<Var(Tape&)>;

// Max over sampled coordinates of |analytic - central| / max(1e-8, |central|).
// Leaves the parameter values untouched and their gradients zeroed.
double finite_diff_check(const LossBuilder& loss_fn,
                         std::span<Parameter* const> params,
                         const FiniteDiffOptions& options = {});

}  // namespace lcmr
