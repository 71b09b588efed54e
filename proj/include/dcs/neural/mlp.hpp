#pragma once

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Core>

#include "dcs/lts.hpp"

namespace dcs::neural {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Glorot-uniform initialization of a fan_in x fan_out block.
template <typename Scalar, typename Rng>
Matrix<Scalar> glorot(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix<Scalar> m(fan_in, fan_out);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(u(rng));
  return m;
}

/// Lin -> ReLU -> Lin producing one scalar per input row.
template <typename Scalar>
struct Mlp {
  Matrix<Scalar> w1;  ///< in x hidden
  Matrix<Scalar> b1;  ///< 1 x hidden
  Matrix<Scalar> w2;  ///< hidden x 1
  Matrix<Scalar> b2;  ///< 1 x 1

  Eigen::Index in_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }

  static Mlp zeros(Eigen::Index in, Eigen::Index hidden) {
    return {Matrix<Scalar>::Zero(in, hidden), Matrix<Scalar>::Zero(1, hidden),
            Matrix<Scalar>::Zero(hidden, 1), Matrix<Scalar>::Zero(1, 1)};
  }

  Mlp zeros_like() const { return zeros(in_dim(), hidden_dim()); }

  template <typename Rng>
  static Mlp random(Eigen::Index in, Eigen::Index hidden, Rng& rng) {
    Mlp m = zeros(in, hidden);
    m.w1 = glorot<Scalar>(in, hidden, rng);
    m.w2 = glorot<Scalar>(hidden, 1, rng);
    return m;
  }

  template <typename F>
  void for_each_block(F&& f) {
    f("w1", w1);
    f("b1", b1);
    f("w2", w2);
    f("b2", b2);
  }
  template <typename F>
  void for_each_block(F&& f) const {
    f("w1", w1);
    f("b1", b1);
    f("w2", w2);
    f("b2", b2);
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
  }
};

template <typename Scalar>
struct MlpCache {
  Matrix<Scalar> input;       ///< rows x in
  Matrix<Scalar> pre;         ///< rows x hidden
  Matrix<Scalar> activation;  ///< rows x hidden
};

template <typename Scalar>
Vector<Scalar> mlp_forward(const Mlp<Scalar>& m, const Matrix<Scalar>& input,
                           MlpCache<Scalar>* cache = nullptr) {
  if (input.cols() != m.in_dim()) throw ContractViolation("mlp: input dimension mismatch");
  Matrix<Scalar> pre = (input * m.w1).rowwise() + m.b1.row(0);
  Matrix<Scalar> act = pre.cwiseMax(Scalar(0));
  Vector<Scalar> out = (act * m.w2).col(0).array() + m.b2(0, 0);
  if (cache) {
    cache->input = input;
    cache->pre = std::move(pre);
    cache->activation = std::move(act);
  }
  return out;
}

/// Accumulates parameter gradients into `grad` and returns d(loss)/d(input).
template <typename Scalar>
Matrix<Scalar> mlp_backward(const Mlp<Scalar>& m, const MlpCache<Scalar>& cache,
                            const Vector<Scalar>& d_out, Mlp<Scalar>& grad) {
  grad.b2(0, 0) += d_out.sum();
  grad.w2.col(0) += cache.activation.transpose() * d_out;
  Matrix<Scalar> d_pre = (d_out * m.w2.col(0).transpose()).array() *
                         (cache.pre.array() > Scalar(0)).template cast<Scalar>();
  grad.w1 += cache.input.transpose() * d_pre;
  grad.b1 += d_pre.colwise().sum();
  return d_pre * m.w1.transpose();
}

}  // namespace dcs::neural
