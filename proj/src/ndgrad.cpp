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
#include "lcmr/ndgrad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lcmr/error.hpp"

namespace lcmr {

namespace {

constexpr double kBceClamp = 1e-12;

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 2) {
    fail(ErrorKind::kInvalidArgument, "parameter rank must be 1 or 2");
  }
  std::size_t total = 1;
  for (std::size_t dim : shape) {
    if (dim == 0) fail(ErrorKind::kInvalidArgument, "zero-sized dimension");
    total *= dim;
  }
  return total;
}

}  // namespace

Parameter::Parameter(std::string name, std::vector<std::size_t> shape)
    : name_(std::move(name)), shape_(std::move(shape)) {
  const std::size_t total = shape_size(shape_);
  value_.assign(total, 0.0);
  grad_.assign(total, 0.0);
  adam_m_.assign(total, 0.0);
  adam_v_.assign(total, 0.0);
}

void Parameter::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

Parameter init_gaussian(std::string name, std::vector<std::size_t> shape,
                        double sigma, std::mt19937_64& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorKind::kInvalidArgument, "init_gaussian: sigma must be > 0");
  }
  Parameter p(std::move(name), std::move(shape));
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& x : p.value()) x = normal(rng);
  return p;
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_scores(std::span<const double> query, const double* keys,
                    std::size_t num_slots, double beta,
                    std::span<double> weights) {
  const std::size_t dim = query.size();
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < num_slots; ++j) {
    const double* k = keys + j * dim;
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += query[c] * k[c];
    s *= beta;
    weights[j] = s;
    max_score = std::max(max_score, s);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < num_slots; ++j) {
    weights[j] = std::exp(weights[j] - max_score);
    total += weights[j];
  }
  for (std::size_t j = 0; j < num_slots; ++j) weights[j] /= total;
}

// ---------------------------------------------------------------------------
// Tape

void Tape::reset() { num_ops_ = 0; }

Tape::Node& Tape::push(OpKind kind, std::size_t rows, std::size_t cols) {
  if (num_ops_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[num_ops_++];
  n.kind = kind;
  n.rows = rows;
  n.cols = cols;
  n.own_value.assign(rows * cols, 0.0);
  n.own_grad.clear();
  n.ext_value = nullptr;
  n.ext_grad = nullptr;
  n.table = nullptr;
  n.indices.clear();
  n.cache.clear();
  n.in0 = n.in1 = n.in2 = -1;
  n.scalar = 0.0;
  n.label = 0;
  n.needs_grad = false;
  return n;
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= num_ops_) {
    fail(ErrorKind::kState, "tape: stale or invalid Var");
  }
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  return const_cast<Node&>(static_cast<const Tape&>(*this).node(v));
}

const double* Tape::value_ptr(const Node& n) const {
  return n.ext_value != nullptr ? n.ext_value : n.own_value.data();
}

double* Tape::grad_ptr(Node& n) {
  if (n.ext_grad != nullptr) return n.ext_grad;
  if (n.own_grad.size() != n.rows * n.cols) {
    n.own_grad.assign(n.rows * n.cols, 0.0);
  }
  return n.own_grad.data();
}

std::size_t Tape::rows(Var v) const { return node(v).rows; }
std::size_t Tape::cols(Var v) const { return node(v).cols; }

std::span<const double> Tape::value(Var v) const {
  const Node& n = node(v);
  return {value_ptr(n), n.rows * n.cols};
}

double Tape::scalar(Var v) const {
  const Node& n = node(v);
  if (n.rows * n.cols != 1) fail(ErrorKind::kInvalidArgument, "not a scalar");
  return value_ptr(n)[0];
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.ext_grad != nullptr) return {n.ext_grad, n.rows * n.cols};
  return n.own_grad;
}

std::span<const double> Tape::attention_weights(Var out) const {
  const Node& n = node(out);
  if (n.kind != OpKind::kAttend) {
    fail(ErrorKind::kInvalidArgument, "Var was not produced by attend()");
  }
  return n.cache;
}

Var Tape::param(Parameter& p) {
  Node& n = push(OpKind::kLeaf, p.rows(), p.cols());
  n.own_value.clear();
  n.ext_value = p.value().data();
  n.ext_grad = p.grad().data();
  n.needs_grad = true;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::param(const Parameter& p) {
  Node& n = push(OpKind::kLeaf, p.rows(), p.cols());
  n.own_value.clear();
  n.ext_value = p.value().data();
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::constant(std::span<const double> values, std::size_t rows,
                   std::size_t cols) {
  if (values.size() != rows * cols) {
    fail(ErrorKind::kInvalidArgument, "constant: size does not match shape");
  }
  Node& n = push(OpKind::kLeaf, rows, cols);
  std::copy(values.begin(), values.end(), n.own_value.begin());
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::embed_lookup(const Parameter& table, std::int64_t index) {
  if (index < 0 || static_cast<std::size_t>(index) >= table.rows()) {
    fail(ErrorKind::kIndex, "embed_lookup: index " + std::to_string(index) +
                                " out of range for " + table.name() + " with " +
                                std::to_string(table.rows()) + " rows");
  }
  Node& n = push(OpKind::kEmbed, 1, table.cols());
  auto src = table.row(static_cast<std::size_t>(index));
  std::copy(src.begin(), src.end(), n.own_value.begin());
  n.indices.push_back(static_cast<std::int32_t>(index));
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::embed_lookup(Parameter& table, std::int64_t index) {
  Var v = embed_lookup(static_cast<const Parameter&>(table), index);
  Node& n = nodes_[v.id];
  n.table = &table;
  n.needs_grad = true;
  return v;
}

Var Tape::gather_rows(const Parameter& table,
                      std::span<const std::int32_t> indices) {
  for (const std::int32_t index : indices) {
    if (index < 0 || static_cast<std::size_t>(index) >= table.rows()) {
      fail(ErrorKind::kIndex, "gather_rows: index " + std::to_string(index) +
                                  " out of range for " + table.name());
    }
  }
  const std::size_t dim = table.cols();
  Node& n = push(OpKind::kGather, indices.size(), dim);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::int32_t index = indices[r];
    auto src = table.row(static_cast<std::size_t>(index));
    std::copy(src.begin(), src.end(), n.own_value.begin() + r * dim);
  }
  n.indices.assign(indices.begin(), indices.end());
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::gather_rows(Parameter& table, std::span<const std::int32_t> indices) {
  Var v = gather_rows(static_cast<const Parameter&>(table), indices);
  Node& n = nodes_[v.id];
  n.table = &table;
  n.needs_grad = true;
  return v;
}

Var Tape::concat(Var a, Var b) {
  const std::size_t size_a = node(a).rows * node(a).cols;
  const std::size_t size_b = node(b).rows * node(b).cols;
  Node& n = push(OpKind::kConcat, 1, size_a + size_b);
  const Node& na = nodes_[a.id];
  const Node& nb = nodes_[b.id];
  std::copy_n(value_ptr(na), size_a, n.own_value.begin());
  std::copy_n(value_ptr(nb), size_b, n.own_value.begin() + size_a);
  n.in0 = a.id;
  n.in1 = b.id;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::attend(Var query, Var keys, Var values, double beta) {
  const Node& nq = node(query);
  const Node& nk = node(keys);
  const Node& nv = node(values);
  const std::size_t dim = nq.rows * nq.cols;
  const std::size_t slots = nk.rows;
  if (slots == 0) fail(ErrorKind::kState, "attend: empty memory");
  if (nk.cols != dim || nv.rows != slots) {
    fail(ErrorKind::kInvalidArgument, "attend: shape mismatch");
  }
  if (!(beta > 0.0)) fail(ErrorKind::kInvalidArgument, "attend: beta <= 0");
  const std::size_t out_dim = nv.cols;
  const std::int32_t iq = query.id, ik = keys.id, iv = values.id;
  Node& n = push(OpKind::kAttend, 1, out_dim);
  const Node& q = nodes_[iq];
  const Node& k = nodes_[ik];
  const Node& m = nodes_[iv];
  n.cache.resize(slots);
  softmax_scores({value_ptr(q), dim}, value_ptr(k), slots, beta, n.cache);
  const double* mem = value_ptr(m);
  for (std::size_t j = 0; j < slots; ++j) {
    const double a = n.cache[j];
    const double* row = mem + j * out_dim;
    for (std::size_t c = 0; c < out_dim; ++c) n.own_value[c] += a * row[c];
  }
  n.in0 = iq;
  n.in1 = ik;
  n.in2 = iv;
  n.scalar = beta;
  n.needs_grad = q.needs_grad || k.needs_grad || m.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::dot(Var a, Var b) {
  const std::size_t size = node(a).rows * node(a).cols;
  if (node(b).rows * node(b).cols != size) {
    fail(ErrorKind::kInvalidArgument,
         "dot: size mismatch " + std::to_string(size) + " vs " +
             std::to_string(node(b).rows * node(b).cols));
  }
  Node& n = push(OpKind::kDot, 1, 1);
  const Node& na = nodes_[a.id];
  const Node& nb = nodes_[b.id];
  const double* pa = value_ptr(na);
  const double* pb = value_ptr(nb);
  double s = 0.0;
  for (std::size_t c = 0; c < size; ++c) s += pa[c] * pb[c];
  n.own_value[0] = s;
  n.in0 = a.id;
  n.in1 = b.id;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::sigmoid(Var x) {
  const std::size_t rows = node(x).rows, cols = node(x).cols;
  Node& n = push(OpKind::kSigmoid, rows, cols);
  const Node& nx = nodes_[x.id];
  const double* px = value_ptr(nx);
  for (std::size_t c = 0; c < rows * cols; ++c) {
    n.own_value[c] = stable_sigmoid(px[c]);
  }
  n.in0 = x.id;
  n.needs_grad = nx.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::bce_loss(Var pred, int label) {
  if (label != 0 && label != 1) {
    fail(ErrorKind::kInvalidArgument,
         "bce_loss: label must be 0 or 1, got " + std::to_string(label));
  }
  const double p = scalar(pred);
  if (!std::isfinite(p)) fail(ErrorKind::kNumeric, "bce_loss: non-finite pred");
  Node& n = push(OpKind::kBce, 1, 1);
  const Node& np = nodes_[pred.id];
  const double clamped = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
  n.own_value[0] = label == 1 ? -std::log(clamped) : -std::log1p(-clamped);
  n.in0 = pred.id;
  n.label = label;
  n.needs_grad = np.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::scale(Var x, double factor) {
  const std::size_t rows = node(x).rows, cols = node(x).cols;
  Node& n = push(OpKind::kScale, rows, cols);
  const Node& nx = nodes_[x.id];
  const double* px = value_ptr(nx);
  for (std::size_t c = 0; c < rows * cols; ++c) n.own_value[c] = px[c] * factor;
  n.in0 = x.id;
  n.scalar = factor;
  n.needs_grad = nx.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::add(Var a, Var b) {
  const std::size_t rows = node(a).rows, cols = node(a).cols;
  if (node(b).rows * node(b).cols != rows * cols) {
    fail(ErrorKind::kInvalidArgument, "add: size mismatch");
  }
  Node& n = push(OpKind::kAdd, rows, cols);
  const Node& na = nodes_[a.id];
  const Node& nb = nodes_[b.id];
  const double* pa = value_ptr(na);
  const double* pb = value_ptr(nb);
  for (std::size_t c = 0; c < rows * cols; ++c) n.own_value[c] = pa[c] + pb[c];
  n.in0 = a.id;
  n.in1 = b.id;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::affine(Var weight, Var bias, Var x) {
  const std::size_t out = node(weight).rows;
  const std::size_t in = node(weight).cols;
  if (node(x).rows * node(x).cols != in) {
    fail(ErrorKind::kInvalidArgument,
         "affine: input width " +
             std::to_string(node(x).rows * node(x).cols) + " != " +
             std::to_string(in));
  }
  if (node(bias).rows * node(bias).cols != out) {
    fail(ErrorKind::kInvalidArgument, "affine: bias width mismatch");
  }
  Node& n = push(OpKind::kAffine, 1, out);
  const Node& nw = nodes_[weight.id];
  const Node& nb = nodes_[bias.id];
  const Node& nx = nodes_[x.id];
  const double* w = value_ptr(nw);
  const double* b = value_ptr(nb);
  const double* px = value_ptr(nx);
  for (std::size_t r = 0; r < out; ++r) {
    double s = b[r];
    const double* wr = w + r * in;
    for (std::size_t c = 0; c < in; ++c) s += wr[c] * px[c];
    n.own_value[r] = s;
  }
  n.in0 = weight.id;
  n.in1 = bias.id;
  n.in2 = x.id;
  n.needs_grad = nw.needs_grad || nb.needs_grad || nx.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

Var Tape::relu(Var x) {
  const std::size_t rows = node(x).rows, cols = node(x).cols;
  Node& n = push(OpKind::kRelu, rows, cols);
  const Node& nx = nodes_[x.id];
  const double* px = value_ptr(nx);
  for (std::size_t c = 0; c < rows * cols; ++c) {
    n.own_value[c] = px[c] > 0.0 ? px[c] : 0.0;
  }
  n.in0 = x.id;
  n.needs_grad = nx.needs_grad;
  return {static_cast<std::int32_t>(num_ops_ - 1)};
}

void Tape::backward() {
  if (num_ops_ == 0) fail(ErrorKind::kState, "backward on an empty tape");
  Node& tail = nodes_[num_ops_ - 1];
  if (tail.rows * tail.cols != 1) {
    fail(ErrorKind::kState, "backward: tape tail is not a scalar loss");
  }
  for (std::size_t i = 0; i < num_ops_; ++i) {
    Node& n = nodes_[i];
    if (n.ext_grad == nullptr) n.own_grad.assign(n.rows * n.cols, 0.0);
  }
  if (!tail.needs_grad) return;
  grad_ptr(tail)[0] += 1.0;
  for (std::size_t i = num_ops_; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.needs_grad) backward_node(n);
  }
}

void Tape::backward_node(Node& n) {
  const double* g = n.ext_grad != nullptr ? n.ext_grad : n.own_grad.data();
  const std::size_t size = n.rows * n.cols;
  switch (n.kind) {
    case OpKind::kLeaf:
      break;
    case OpKind::kEmbed: {
      auto row = n.table->grad().subspan(
          static_cast<std::size_t>(n.indices[0]) * n.cols, n.cols);
      for (std::size_t c = 0; c < n.cols; ++c) row[c] += g[c];
      break;
    }
    case OpKind::kGather: {
      for (std::size_t r = 0; r < n.rows; ++r) {
        auto row = n.table->grad().subspan(
            static_cast<std::size_t>(n.indices[r]) * n.cols, n.cols);
        for (std::size_t c = 0; c < n.cols; ++c) row[c] += g[r * n.cols + c];
      }
      break;
    }
    case OpKind::kConcat: {
      Node& a = nodes_[n.in0];
      Node& b = nodes_[n.in1];
      const std::size_t size_a = a.rows * a.cols;
      if (a.needs_grad) {
        double* ga = grad_ptr(a);
        for (std::size_t c = 0; c < size_a; ++c) ga[c] += g[c];
      }
      if (b.needs_grad) {
        double* gb = grad_ptr(b);
        for (std::size_t c = 0; c < b.rows * b.cols; ++c) {
          gb[c] += g[size_a + c];
        }
      }
      break;
    }
    case OpKind::kAttend: {
      Node& q = nodes_[n.in0];
      Node& k = nodes_[n.in1];
      Node& m = nodes_[n.in2];
      const std::size_t dim = q.rows * q.cols;
      const std::size_t slots = k.rows;
      const std::size_t out_dim = n.cols;
      const double beta = n.scalar;
      const std::vector<double>& a = n.cache;
      const double* mem = value_ptr(m);
      const double* keys = value_ptr(k);
      const double* query = value_ptr(q);
      // d loss / d a_j = g . values_j; softmax Jacobian gives
      // d loss / d s_j = a_j (da_j - sum_k a_k da_k).
      double mean_da = 0.0;
      std::vector<double>& ds = scratch_;
      ds.assign(slots, 0.0);
      for (std::size_t j = 0; j < slots; ++j) {
        const double* row = mem + j * out_dim;
        double da = 0.0;
        for (std::size_t c = 0; c < out_dim; ++c) da += g[c] * row[c];
        ds[j] = da;
        mean_da += a[j] * da;
      }
      for (std::size_t j = 0; j < slots; ++j) ds[j] = a[j] * (ds[j] - mean_da);
      if (m.needs_grad) {
        double* gm = grad_ptr(m);
        for (std::size_t j = 0; j < slots; ++j) {
          for (std::size_t c = 0; c < out_dim; ++c) {
            gm[j * out_dim + c] += a[j] * g[c];
          }
        }
      }
      if (q.needs_grad) {
        double* gq = grad_ptr(q);
        for (std::size_t j = 0; j < slots; ++j) {
          const double coef = beta * ds[j];
          const double* kr = keys + j * dim;
          for (std::size_t c = 0; c < dim; ++c) gq[c] += coef * kr[c];
        }
      }
      if (k.needs_grad) {
        double* gk = grad_ptr(k);
        for (std::size_t j = 0; j < slots; ++j) {
          const double coef = beta * ds[j];
          for (std::size_t c = 0; c < dim; ++c) gk[j * dim + c] += coef * query[c];
        }
      }
      break;
    }
    case OpKind::kDot: {
      Node& a = nodes_[n.in0];
      Node& b = nodes_[n.in1];
      const std::size_t len = a.rows * a.cols;
      const double* pa = value_ptr(a);
      const double* pb = value_ptr(b);
      if (a.needs_grad) {
        double* ga = grad_ptr(a);
        for (std::size_t c = 0; c < len; ++c) ga[c] += g[0] * pb[c];
      }
      if (b.needs_grad) {
        double* gb = grad_ptr(b);
        for (std::size_t c = 0; c < len; ++c) gb[c] += g[0] * pa[c];
      }
      break;
    }
    case OpKind::kSigmoid: {
      Node& x = nodes_[n.in0];
      double* gx = grad_ptr(x);
      for (std::size_t c = 0; c < size; ++c) {
        const double s = n.own_value[c];
        gx[c] += g[c] * s * (1.0 - s);
      }
      break;
    }
    case OpKind::kBce: {
      Node& p = nodes_[n.in0];
      const double pred = value_ptr(p)[0];
      if (pred < kBceClamp || pred > 1.0 - kBceClamp) break;  // clamp is flat
      const double d = n.label == 1 ? -1.0 / pred : 1.0 / (1.0 - pred);
      grad_ptr(p)[0] += g[0] * d;
      break;
    }
    case OpKind::kScale: {
      Node& x = nodes_[n.in0];
      double* gx = grad_ptr(x);
      for (std::size_t c = 0; c < size; ++c) gx[c] += g[c] * n.scalar;
      break;
    }
    case OpKind::kAdd: {
      Node& a = nodes_[n.in0];
      Node& b = nodes_[n.in1];
      if (a.needs_grad) {
        double* ga = grad_ptr(a);
        for (std::size_t c = 0; c < size; ++c) ga[c] += g[c];
      }
      if (b.needs_grad) {
        double* gb = grad_ptr(b);
        for (std::size_t c = 0; c < size; ++c) gb[c] += g[c];
      }
      break;
    }
    case OpKind::kAffine: {
      Node& w = nodes_[n.in0];
      Node& b = nodes_[n.in1];
      Node& x = nodes_[n.in2];
      const std::size_t out = n.cols;
      const std::size_t in = w.cols;
      const double* pw = value_ptr(w);
      const double* px = value_ptr(x);
      if (w.needs_grad) {
        double* gw = grad_ptr(w);
        for (std::size_t r = 0; r < out; ++r) {
          for (std::size_t c = 0; c < in; ++c) gw[r * in + c] += g[r] * px[c];
        }
      }
      if (b.needs_grad) {
        double* gb = grad_ptr(b);
        for (std::size_t r = 0; r < out; ++r) gb[r] += g[r];
      }
      if (x.needs_grad) {
        double* gx = grad_ptr(x);
        for (std::size_t r = 0; r < out; ++r) {
          for (std::size_t c = 0; c < in; ++c) gx[c] += g[r] * pw[r * in + c];
        }
      }
      break;
    }
    case OpKind::kRelu: {
      Node& x = nodes_[n.in0];
      const double* px = value_ptr(x);
      double* gx = grad_ptr(x);
      for (std::size_t c = 0; c < size; ++c) {
        if (px[c] > 0.0) gx[c] += g[c];
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Adam

void AdamConfig::validate() const {
  if (!(lr > 0.0)) fail(ErrorKind::kConfig, "adam: lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorKind::kConfig, "adam: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) fail(ErrorKind::kConfig, "adam: eps must be > 0");
}

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  cfg.validate();
  for (const Parameter* p : params) {
    auto g = p->grad();
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (!std::isfinite(g[c])) {
        std::ostringstream msg;
        msg << "adam_step: non-finite gradient in parameter '" << p->name()
            << "' at flat index " << c << " (value " << g[c] << ")";
        fail(ErrorKind::kNumeric, msg.str());
      }
    }
  }
  for (Parameter* p : params) {
    const std::int64_t t = p->step_count() + 1;
    const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    auto value = p->value();
    auto grad = p->grad();
    auto m = p->adam_m();
    auto v = p->adam_v();
    for (std::size_t c = 0; c < value.size(); ++c) {
      const double gc = grad[c];
      m[c] = cfg.beta1 * m[c] + (1.0 - cfg.beta1) * gc;
      v[c] = cfg.beta2 * v[c] + (1.0 - cfg.beta2) * gc * gc;
      const double m_hat = m[c] / correction1;
      const double v_hat = v[c] / correction2;
      value[c] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    p->set_step_count(t);
    p->zero_grad();
  }
}

// ---------------------------------------------------------------------------
// Gradient check

double finite_diff_check(const LossBuilder& loss_fn,
                         std::span<Parameter* const> params,
                         const FiniteDiffOptions& options) {
  if (!(options.step > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "finite_diff_check: step must be > 0");
  }
  Tape tape;
  auto evaluate = [&]() {
    tape.reset();
    const double loss = tape.scalar(loss_fn(tape));
    if (!std::isfinite(loss)) {
      fail(ErrorKind::kNumeric, "finite_diff_check: non-finite loss");
    }
    return loss;
  };

  zero_grads(params);
  tape.reset();
  const Var loss = loss_fn(tape);
  if (!std::isfinite(tape.scalar(loss))) {
    fail(ErrorKind::kNumeric, "finite_diff_check: non-finite loss");
  }
  tape.backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) {
    analytic.emplace_back(p->grad().begin(), p->grad().end());
  }
  zero_grads(params);

  std::mt19937_64 rng(options.seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t c : coords) {
      const double saved = p.value()[c];
      p.value()[c] = saved + options.step;
      const double plus = evaluate();
      p.value()[c] = saved - options.step;
      const double minus = evaluate();
      p.value()[c] = saved;
      const double central = (plus - minus) / (2.0 * options.step);
      const double err = std::abs(analytic[k][c] - central) /
                         std::max(1e-8, std::abs(central));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace lcmr
