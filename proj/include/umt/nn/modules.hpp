#pragma once
#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "umt/core/error.hpp"
#include "umt/nn/ops.hpp"

namespace umt::nn {

/// Ordered named parameter registry. Registration order is the serialization
/// and optimizer-slot order, so model construction must be deterministic.
class ParamStore {
 public:
  Var add(const std::string& name, Tensor init) {
    if (index_.count(name)) throw ConfigError("duplicate parameter: " + name);
    Var p = leaf(std::move(init));
    index_[name] = items_.size();
    items_.emplace_back(name, p);
    return p;
  }

  const Var& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return items_[it->second].second;
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::pair<std::string, Var>>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

  std::size_t total_scalars() const {
    std::size_t n = 0;
    for (const auto& [_, p] : items_) n += p->value.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [_, p] : items_)
      if (!p->grad.data.empty())
        std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
  }

  /// Marks parameters non-trainable (frozen encoders). Frozen params drop out
  /// of grad flow entirely; optimizer slots skip them by flag.
  void set_trainable(const std::string& name, bool on) {
    get(name)->requires_grad = on;
  }
  void set_all_trainable(bool on) {
    for (auto& [_, p] : items_) p->requires_grad = on;
  }

 private:
  std::vector<std::pair<std::string, Var>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Linear {
  Var w, b;

  /// scale < 0 picks 1/sqrt(in); scale == 0 zero-initializes (adaLN heads).
  static Linear create(ParamStore& ps, const std::string& name, int in, int out,
                       Rng& rng, bool bias = true, double scale = -1.0) {
    const double s = scale < 0.0 ? 1.0 / std::sqrt(double(in)) : scale;
    Linear m;
    m.w = ps.add(name + ".w", s == 0.0 ? Tensor::zeros({out, in})
                                       : Tensor::randn({out, in}, rng, s));
    m.b = bias ? ps.add(name + ".b", Tensor::zeros({out})) : nullptr;
    return m;
  }

  Var operator()(const Var& x) const { return linear(x, w, b); }
};

struct Conv2d {
  Var w, b;
  int stride = 1, pad = 0;

  static Conv2d create(ParamStore& ps, const std::string& name, int in_ch, int out_ch,
                       int k, int stride, int pad, Rng& rng) {
    Conv2d m;
    const double s = 1.0 / std::sqrt(double(in_ch) * k * k);
    m.w = ps.add(name + ".w", Tensor::randn({out_ch, in_ch, k, k}, rng, s));
    m.b = ps.add(name + ".b", Tensor::zeros({out_ch}));
    m.stride = stride;
    m.pad = pad;
    return m;
  }

  Var operator()(const Var& x) const { return conv2d(x, w, b, stride, pad); }
};

struct LayerNorm {
  Var gamma, beta;
  double eps = 1e-5;

  static LayerNorm create(ParamStore& ps, const std::string& name, int dim) {
    LayerNorm m;
    m.gamma = ps.add(name + ".g", Tensor::full({dim}, 1.0));
    m.beta = ps.add(name + ".b", Tensor::zeros({dim}));
    return m;
  }

  /// Affine-free norm (the adaLN blocks supply shift/scale themselves).
  static LayerNorm plain() { return LayerNorm{}; }

  Var operator()(const Var& x) const { return layernorm(x, gamma, beta, eps); }
};

struct Embedding {
  Var table;

  static Embedding create(ParamStore& ps, const std::string& name, int vocab, int dim,
                          Rng& rng, double scale = 0.02) {
    return Embedding{ps.add(name, Tensor::randn({vocab, dim}, rng, scale))};
  }

  Var operator()(const std::vector<int>& ids) const {
    return rows_from_table(table, ids);
  }
};

double global_grad_norm(const ParamStore& ps);
void clip_global_grad_norm(ParamStore& ps, double max_norm);

/// Adam with slot state held parallel to the store's registration order.
class Adam {
 public:
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void step(ParamStore& ps);
  void reset() {
    t_ = 0;
    m_.clear();
    v_.clear();
  }

  std::int64_t steps_done() const { return t_; }
  const std::vector<Tensor>& slot_m() const { return m_; }
  const std::vector<Tensor>& slot_v() const { return v_; }
  void restore(std::int64_t t, std::vector<Tensor> m, std::vector<Tensor> v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace umt::nn
