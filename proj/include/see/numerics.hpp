// Copyright 2026 The SEE Relation Extraction Authors.
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

// Deterministic fp64 differentiable-computation core: tensors, a parameter
// store with gradient accumulators, a tape-based reverse-mode graph over a
// small fixed set of primitives, SGD and dropout.
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "see/errors.hpp"

namespace see {

// ---------------------------------------------------------------------------
// Random numbers. The standard distributions are implementation-defined, so
// everything that must be reproducible across toolchains goes through these.

using Rng = std::mt19937_64;

inline Rng make_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(keys.size() * 2);
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n), unbiased.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

// Inclusive integer range [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

// ---------------------------------------------------------------------------

// Dense fp64 tensor of rank 1 or 2, row-major.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::size_t n, double fill = 0.0) : shape_{n}, data_(n, fill) {}
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape_{rows, cols}, data_(rows * cols, fill) {}
  // Two integer arguments always mean rows x cols.
  template <std::integral R, std::integral C>
  Tensor(R rows, C cols) : Tensor(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), 0.0) {}

  static Tensor from(std::vector<double> values) {
    Tensor t;
    t.shape_ = {values.size()};
    t.data_ = std::move(values);
    return t;
  }
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) {
      throw ShapeError("Tensor::from: " + std::to_string(values.size()) +
                       " values for shape " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
    Tensor t;
    t.shape_ = {rows, cols};
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool is_matrix() const { return shape_.size() == 2; }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() == 2 ? shape_[1] : 1; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }
  std::string shape_string() const {
    std::string s;
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------

struct Param {
  Tensor value;
  Tensor grad;
};

// Named trainable tensors, each with a same-shaped gradient accumulator.
// Iteration is in name order, which fixes every reduction and update order.
class ParamStore {
 public:
  Param& add(const std::string& name, Tensor value) {
    if (entries_.count(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    Tensor grad = value;
    grad.fill(0.0);
    auto [it, ok] = entries_.emplace(name, Param{std::move(value), std::move(grad)});
    return it->second;
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Param& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
    return it->second;
  }
  const Param& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
    return it->second;
  }

  void zero_grad() {
    for (auto& [name, p] : entries_) p.grad.fill(0.0);
  }

  std::size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Param> entries_;
};

// value <- value - lr * grad for every entry, then gradients are zeroed.
inline void sgd_step(ParamStore& store, double learning_rate) {
  for (auto& [name, p] : store) {
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter '" + name + "'");
  }
  for (auto& [name, p] : store) {
    auto& v = p.value.data();
    auto& g = p.grad.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
    p.grad.fill(0.0);
  }
}

// Inverted dropout: entries are 0 with probability `rate`, else 1/(1-rate).
// Outside training the mask is all ones.
inline Tensor dropout_mask(std::size_t length, double rate, Rng& rng, bool training = true) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Tensor mask(length, 1.0);
  if (!training || rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < length; ++i) mask[i] = uniform01(rng) < rate ? 0.0 : keep;
  return mask;
}

inline void init_uniform(Tensor& t, Rng& rng, double scale = 0.08) {
  for (double& v : t.data()) v = uniform(rng, -scale, scale);
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Max-subtracted softmax.
inline std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  const double m = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

// Central differences (f(x+h e_k) - f(x-h e_k)) / 2h per coordinate.
inline Tensor finite_difference(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                double h = 1e-6) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference: step must be positive");
  Tensor grad = x;
  Tensor probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_difference: non-finite evaluation at coordinate " +
                         std::to_string(k));
    }
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

// ---------------------------------------------------------------------------

// Handle to a node in a Graph.
struct Var {
  std::size_t id = 0;
};

// Tape of primitive operations. Nodes are evaluated eagerly when created;
// backward() walks the tape in reverse. Parameter nodes alias the store, so
// their gradients accumulate straight into ParamStore::grad.
class Graph {
 public:
  explicit Graph(ParamStore* store = nullptr) : store_(store) {}
  // Evaluation-only graph over a store it must not modify.
  explicit Graph(const ParamStore& store)
      : store_(const_cast<ParamStore*>(&store)), readonly_(true) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  std::size_t size() const { return nodes_.size(); }

  const Tensor& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.param ? n.param->value : n.value;
  }
  const Tensor& grad(Var v) const {
    const Node& n = nodes_[v.id];
    return n.param ? n.param->grad : n.grad;
  }
  const std::string& op(Var v) const { return nodes_[v.id].op; }

  Var constant(Tensor t, std::string label = "constant") {
    return push(std::move(label), std::move(t), nullptr);
  }

  // Whole-parameter leaf; repeated requests return the same node.
  Var param(const std::string& name) {
    if (auto it = param_nodes_.find(name); it != param_nodes_.end()) return it->second;
    Param& p = require_store("param").at(name);
    Node n;
    n.op = "param:" + name;
    n.param = &p;
    nodes_.push_back(std::move(n));
    Var v{nodes_.size() - 1};
    param_nodes_.emplace(name, v);
    return v;
  }

  // Row `index` of a 2-D parameter; only that row receives gradient.
  Var lookup(const std::string& table, std::size_t index) {
    Param& p = require_store("lookup").at(table);
    if (!p.value.is_matrix() || index >= p.value.rows()) {
      fail("lookup:" + table, "row " + std::to_string(index) + " outside table of shape " +
                                  p.value.shape_string());
    }
    auto src = p.value.row(index);
    Tensor out = Tensor::from(std::vector<double>(src.begin(), src.end()));
    Param* pp = &p;
    const std::size_t id = nodes_.size();
    return push("lookup:" + table, std::move(out), [this, pp, id, index] {
      const auto& g = nodes_[id].grad.data();
      auto dst = pp->grad.row(index);
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    });
  }

  Var matvec(Var m, Var x) {
    const Tensor& M = value(m);
    const Tensor& X = value(x);
    const std::string name = "matvec";
    if (!M.is_matrix() || X.rank() != 1 || M.cols() != X.size()) {
      fail(name, "matrix " + M.shape_string() + " times vector " + X.shape_string());
    }
    const std::size_t r = M.rows(), c = M.cols();
    Tensor out(r);
    for (std::size_t i = 0; i < r; ++i) {
      const double* row = M.data().data() + i * c;
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += row[j] * X[j];
      out[i] = s;
    }
    const std::size_t id = nodes_.size();
    return push(name, std::move(out), [this, id, m, x, r, c] {
      const Tensor& g = nodes_[id].grad;
      const Tensor& M = value(m);
      const Tensor& X = value(x);
      Tensor& gm = mgrad(m);
      Tensor& gx = mgrad(x);
      for (std::size_t i = 0; i < r; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double* gmr = gm.data().data() + i * c;
        const double* row = M.data().data() + i * c;
        for (std::size_t j = 0; j < c; ++j) {
          gmr[j] += gi * X[j];
          gx[j] += gi * row[j];
        }
      }
    });
  }

  Var add(Var a, Var b) { return binary("add", a, b, 0); }
  Var sub(Var a, Var b) { return binary("sub", a, b, 1); }
  Var mul(Var a, Var b) { return binary("mul", a, b, 2); }

  // W x + b.
  Var affine(Var w, Var x, Var b) { return add(matvec(w, x), b); }

  Var scale(Var a, double s) {
    Tensor out = value(a);
    for (double& v : out.data()) v *= s;
    const std::size_t id = nodes_.size();
    return push("scale", std::move(out), [this, id, a, s] {
      const Tensor& g = nodes_[id].grad;
      Tensor& ga = mgrad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
    });
  }

  // 1 - a, element-wise.
  Var one_minus(Var a) {
    Tensor out = value(a);
    for (double& v : out.data()) v = 1.0 - v;
    const std::size_t id = nodes_.size();
    return push("one_minus", std::move(out), [this, id, a] {
      const Tensor& g = nodes_[id].grad;
      Tensor& ga = mgrad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
    });
  }

  Var tanh(Var a) {
    Tensor out = value(a);
    for (double& v : out.data()) v = std::tanh(v);
    const std::size_t id = nodes_.size();
    return push("tanh", std::move(out), [this, id, a] {
      const Tensor& g = nodes_[id].grad;
      const Tensor& y = nodes_[id].value;
      Tensor& ga = mgrad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    });
  }

  Var sigmoid(Var a) {
    Tensor out = value(a);
    for (double& v : out.data()) v = see::sigmoid(v);
    const std::size_t id = nodes_.size();
    return push("sigmoid", std::move(out), [this, id, a] {
      const Tensor& g = nodes_[id].grad;
      const Tensor& y = nodes_[id].value;
      Tensor& ga = mgrad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    });
  }

  Var concat(std::span<const Var> parts) {
    std::vector<double> out;
    for (Var p : parts) {
      const Tensor& t = value(p);
      if (t.rank() != 1) fail("concat", "part of shape " + t.shape_string() + " is not a vector");
      out.insert(out.end(), t.data().begin(), t.data().end());
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    const std::size_t id = nodes_.size();
    return push("concat", Tensor::from(std::move(out)), [this, id, ps] {
      const Tensor& g = nodes_[id].grad;
      std::size_t off = 0;
      for (Var p : ps) {
        Tensor& gp = mgrad(p);
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
        off += gp.size();
      }
    });
  }
  Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
  }

  // Inner product of two same-shape tensors, as a length-1 tensor.
  Var dot(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.size() == 0 || A.shape() != B.shape()) {
      fail("dot", "shapes " + A.shape_string() + " and " + B.shape_string());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) s += A[i] * B[i];
    const std::size_t id = nodes_.size();
    return push("dot", Tensor(1, s), [this, id, a, b] {
      const double g = nodes_[id].grad[0];
      const Tensor& A = value(a);
      const Tensor& B = value(b);
      Tensor& ga = mgrad(a);
      Tensor& gb = mgrad(b);
      for (std::size_t i = 0; i < A.size(); ++i) {
        ga[i] += g * B[i];
        gb[i] += g * A[i];
      }
    });
  }

  Var softmax(Var a) {
    const Tensor& A = value(a);
    if (A.rank() != 1 || A.size() == 0) fail("softmax", "input of shape " + A.shape_string());
    Tensor out = Tensor::from(see::softmax(A.data()));
    const std::size_t id = nodes_.size();
    return push("softmax", std::move(out), [this, id, a] {
      const Tensor& g = nodes_[id].grad;
      const Tensor& y = nodes_[id].value;
      double gy = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) gy += g[i] * y[i];
      Tensor& ga = mgrad(a);
      for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - gy);
    });
  }

  // sum_i weights[i] * items[i].
  Var weighted_sum(Var weights, std::span<const Var> items) {
    const Tensor& w = value(weights);
    if (w.rank() != 1 || w.size() != items.size() || items.empty()) {
      fail("weighted_sum", std::to_string(w.size()) + " weights for " +
                               std::to_string(items.size()) + " items");
    }
    const Tensor& first = value(items[0]);
    Tensor out(first.size());
    for (std::size_t k = 0; k < items.size(); ++k) {
      const Tensor& t = value(items[k]);
      if (t.shape() != first.shape()) {
        fail("weighted_sum", "item " + std::to_string(k) + " has shape " + t.shape_string() +
                                 ", expected " + first.shape_string());
      }
      for (std::size_t i = 0; i < t.size(); ++i) out[i] += w[k] * t[i];
    }
    std::vector<Var> its(items.begin(), items.end());
    const std::size_t id = nodes_.size();
    return push("weighted_sum", std::move(out), [this, id, weights, its] {
      const Tensor& g = nodes_[id].grad;
      const Tensor& w = value(weights);
      Tensor& gw = mgrad(weights);
      for (std::size_t k = 0; k < its.size(); ++k) {
        const Tensor& t = value(its[k]);
        Tensor& gt = mgrad(its[k]);
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
          s += g[i] * t[i];
          gt[i] += w[k] * g[i];
        }
        gw[k] += s;
      }
    });
  }

  // Sliding-window linear map. `filters` is K x (window * dim); the result is
  // K x (n - window + 1) with entry (j, i) = filters[j] . [x_i; ...; x_{i+window-1}].
  Var conv(Var filters, std::span<const Var> inputs, std::size_t window) {
    const Tensor& W = value(filters);
    if (inputs.empty() || window == 0 || inputs.size() < window) {
      fail("conv", std::to_string(inputs.size()) + " inputs for window " + std::to_string(window));
    }
    const std::size_t dim = value(inputs[0]).size();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (value(inputs[i]).rank() != 1 || value(inputs[i]).size() != dim) {
        fail("conv", "input " + std::to_string(i) + " has shape " +
                         value(inputs[i]).shape_string() + ", expected " + std::to_string(dim));
      }
    }
    if (!W.is_matrix() || W.cols() != window * dim) {
      fail("conv", "filter matrix " + W.shape_string() + " does not match window " +
                       std::to_string(window) + " x dim " + std::to_string(dim));
    }
    const std::size_t k = W.rows();
    const std::size_t len = inputs.size() - window + 1;
    Tensor out(k, len);
    for (std::size_t j = 0; j < k; ++j) {
      const double* wj = W.data().data() + j * W.cols();
      for (std::size_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (std::size_t t = 0; t < window; ++t) {
          const Tensor& x = value(inputs[i + t]);
          const double* wt = wj + t * dim;
          for (std::size_t d = 0; d < dim; ++d) s += wt[d] * x[d];
        }
        out.at(j, i) = s;
      }
    }
    std::vector<Var> xs(inputs.begin(), inputs.end());
    const std::size_t id = nodes_.size();
    return push("conv", std::move(out), [this, id, filters, xs, window, dim, k, len] {
      const Tensor& g = nodes_[id].grad;
      const Tensor& W = value(filters);
      Tensor& gw = mgrad(filters);
      for (std::size_t j = 0; j < k; ++j) {
        const double* wj = W.data().data() + j * W.cols();
        double* gwj = gw.data().data() + j * W.cols();
        for (std::size_t i = 0; i < len; ++i) {
          const double gji = g.at(j, i);
          if (gji == 0.0) continue;
          for (std::size_t t = 0; t < window; ++t) {
            const Tensor& x = value(xs[i + t]);
            Tensor& gx = mgrad(xs[i + t]);
            const double* wt = wj + t * dim;
            double* gwt = gwj + t * dim;
            for (std::size_t d = 0; d < dim; ++d) {
              gwt[d] += gji * x[d];
              gx[d] += gji * wt[d];
            }
          }
        }
      }
    });
  }

  // Row-wise max over columns [begin, end) of a matrix; an empty range gives 0.
  Var max_over_range(Var m, std::size_t begin, std::size_t end) {
    const Tensor& M = value(m);
    if (!M.is_matrix() || end > M.cols()) {
      fail("max_over_range", "range [" + std::to_string(begin) + "," + std::to_string(end) +
                                 ") on " + M.shape_string());
    }
    return segment_max("max_over_range", m, {{begin, end}});
  }

  // Three-segment max pooling of a K x T matrix at boundaries p1 <= p2:
  // columns [0, p1-1], [p1, p2], [p2+1, T-1]. Output is filter-major (3K).
  Var piecewise_max_pool(Var m, std::size_t p1, std::size_t p2) {
    const Tensor& M = value(m);
    if (!M.is_matrix() || p1 > p2 || p2 >= M.cols()) {
      fail("piecewise_max_pool", "boundaries " + std::to_string(p1) + "," + std::to_string(p2) +
                                     " on " + M.shape_string());
    }
    return segment_max("piecewise_max_pool", m, {{0, p1}, {p1, p2 + 1}, {p2 + 1, M.cols()}});
  }

  // -log softmax(scores)[gold], as a length-1 tensor.
  Var cross_entropy(Var scores, std::size_t gold) {
    const Tensor& s = value(scores);
    if (s.rank() != 1 || gold >= s.size()) {
      fail("cross_entropy", "gold " + std::to_string(gold) + " for scores " + s.shape_string());
    }
    std::vector<double> p = see::softmax(s.data());
    const double m = *std::max_element(s.data().begin(), s.data().end());
    double z = 0.0;
    for (double v : s.data()) z += std::exp(v - m);
    const double loss = std::log(z) - (s[gold] - m);
    const std::size_t id = nodes_.size();
    return push("cross_entropy", Tensor(1, loss), [this, id, scores, gold, p] {
      const double g = nodes_[id].grad[0];
      Tensor& gs = mgrad(scores);
      for (std::size_t i = 0; i < p.size(); ++i) gs[i] += g * (p[i] - (i == gold ? 1.0 : 0.0));
    });
  }

  Var sum(std::span<const Var> scalars) {
    double s = 0.0;
    for (Var v : scalars) {
      if (value(v).size() != 1) fail("sum", "operand of shape " + value(v).shape_string());
      s += value(v)[0];
    }
    std::vector<Var> vs(scalars.begin(), scalars.end());
    const std::size_t id = nodes_.size();
    return push("sum", Tensor(1, s), [this, id, vs] {
      const double g = nodes_[id].grad[0];
      for (Var v : vs) mgrad(v)[0] += g;
    });
  }

  // Accumulates d(loss)/d(node) for every node reachable from `loss`,
  // scaled by `seed`. Parameter gradients land in the store. Call once per
  // graph.
  void backward(Var loss, double seed = 1.0) {
    if (readonly_) throw std::logic_error("backward on an evaluation-only graph");
    if (value(loss).size() != 1) {
      throw ShapeError("backward: designated loss '" + nodes_[loss.id].op + "' (node " +
                       std::to_string(loss.id) + ") has shape " + value(loss).shape_string() +
                       ", expected a scalar");
    }
    mgrad(loss)[0] += seed;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (nodes_[i].back) nodes_[i].back();
    }
  }

 private:
  struct Node {
    std::string op;
    Tensor value;
    Tensor grad;
    Param* param = nullptr;
    std::function<void()> back;
  };

  ParamStore& require_store(const char* what) {
    if (!store_) throw std::logic_error(std::string(what) + ": graph has no parameter store");
    return *store_;
  }

  Tensor& mgrad(Var v) {
    Node& n = nodes_[v.id];
    return n.param ? n.param->grad : n.grad;
  }

  [[noreturn]] void fail(const std::string& op, const std::string& detail) const {
    throw ShapeError(op + " (node " + std::to_string(nodes_.size()) + "): " + detail);
  }

  Var push(std::string op, Tensor value, std::function<void()> back) {
    Node n;
    n.op = std::move(op);
    n.grad = value;
    n.grad.fill(0.0);
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Var binary(const char* name, Var a, Var b, int kind) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.shape() != B.shape()) fail(name, "shapes " + A.shape_string() + " and " + B.shape_string());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = kind == 0 ? A[i] + B[i] : kind == 1 ? A[i] - B[i] : A[i] * B[i];
    }
    const std::size_t id = nodes_.size();
    return push(name, std::move(out), [this, id, a, b, kind] {
      const Tensor& g = nodes_[id].grad;
      Tensor& ga = mgrad(a);
      Tensor& gb = mgrad(b);
      if (kind == 2) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * B[i];
          gb[i] += g[i] * A[i];
        }
        return;
      }
      const double sb = kind == 0 ? 1.0 : -1.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] += sb * g[i];
      }
    });
  }

  // Row-wise maxima over column ranges; output index = row * ranges + range.
  Var segment_max(const char* name, Var m, std::vector<std::pair<std::size_t, std::size_t>> ranges) {
    const Tensor& M = value(m);
    const std::size_t k = M.rows(), nr = ranges.size();
    Tensor out(k * nr);
    std::vector<std::ptrdiff_t> arg(k * nr, -1);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t s = 0; s < nr; ++s) {
        const auto [lo, hi] = ranges[s];
        for (std::size_t c = lo; c < hi; ++c) {
          const std::size_t o = j * nr + s;
          if (arg[o] < 0 || M.at(j, c) > out[o]) {
            out[o] = M.at(j, c);
            arg[o] = static_cast<std::ptrdiff_t>(c);
          }
        }
      }
    }
    const std::size_t cols = M.cols();
    const std::size_t id = nodes_.size();
    return push(name, std::move(out), [this, id, m, arg, nr, cols] {
      const Tensor& g = nodes_[id].grad;
      Tensor& gm = mgrad(m);
      for (std::size_t o = 0; o < arg.size(); ++o) {
        if (arg[o] >= 0) gm[(o / nr) * cols + static_cast<std::size_t>(arg[o])] += g[o];
      }
    });
  }

  ParamStore* store_;
  bool readonly_ = false;
  std::deque<Node> nodes_;
  std::map<std::string, Var> param_nodes_;
};

}  // namespace see
