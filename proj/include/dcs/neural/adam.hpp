#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dcs/neural/mlp.hpp"

namespace dcs::neural {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Gradients are rescaled to this global L2 norm when larger; <= 0 disables.
  double max_grad_norm = 10.0;
};

template <typename Model>
auto parameter_blocks(Model& m) {
  using Block = std::remove_reference_t<decltype(m.w1)>;
  std::vector<Block*> blocks;
  m.for_each_block([&](const std::string&, Block& b) { blocks.push_back(&b); });
  return blocks;
}

/// Global L2 norm over every parameter block.
template <typename Model>
double global_norm(const Model& m) {
  double sq = 0;
  m.for_each_block([&](const std::string&, const auto& b) {
    sq += static_cast<double>(b.squaredNorm());
  });
  return std::sqrt(sq);
}

template <typename Model>
bool all_finite(const Model& m) {
  bool ok = true;
  m.for_each_block([&](const std::string&, const auto& b) { ok = ok && b.allFinite(); });
  return ok;
}

/// Adaptive moment estimation over a model exposing for_each_block.
template <typename Model>
class Adam {
 public:
  Adam(const Model& shape, AdamConfig config)
      : config_(config), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  /// Applies one update; `grads` may be rescaled in place by clipping.
  /// Returns the pre-clip gradient norm.
  double step(Model& params, Model& grads) {
    const double norm = global_norm(grads);
    if (config_.max_grad_norm > 0 && norm > config_.max_grad_norm) {
      const double scale = config_.max_grad_norm / norm;
      for (auto* g : parameter_blocks(grads)) *g *= scale;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    auto p = parameter_blocks(params);
    auto g = parameter_blocks(grads);
    auto m = parameter_blocks(m_);
    auto v = parameter_blocks(v_);
    for (std::size_t i = 0; i < p.size(); ++i) {
      *m[i] = config_.beta1 * *m[i] + (1.0 - config_.beta1) * *g[i];
      *v[i] = config_.beta2 * *v[i] + (1.0 - config_.beta2) * g[i]->cwiseProduct(*g[i]);
      p[i]->array() -= config_.learning_rate * (m[i]->array() / c1) /
                       ((v[i]->array() / c2).sqrt() + config_.epsilon);
    }
    return norm;
  }

  std::size_t steps() const { return t_; }

 private:
  AdamConfig config_;
  Model m_;
  Model v_;
  std::size_t t_ = 0;
};

}  // namespace dcs::neural
