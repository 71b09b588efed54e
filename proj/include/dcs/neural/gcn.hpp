#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dcs/neural/mlp.hpp"

namespace dcs::neural {

/// Neighbor aggregation of a graph-convolution layer. Both modes use the
/// symmetrized, deduplicated edge set plus one self-loop per node.
enum class Aggregation {
  Normalized,  ///< weight 1/sqrt(d_u d_v), d counting the self-loop
  Sum,         ///< weight 1
};

template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// Propagation operator over `num_nodes` nodes. `Edge` exposes `source` and
/// `target`.
template <typename Scalar, typename Edge>
SparseMatrix<Scalar> propagation_matrix(Eigen::Index num_nodes, const std::vector<Edge>& edges,
                                        Aggregation aggregation) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(2 * edges.size() + static_cast<std::size_t>(num_nodes));
  for (const auto& e : edges) {
    if (static_cast<Eigen::Index>(e.source) >= num_nodes ||
        static_cast<Eigen::Index>(e.target) >= num_nodes) {
      throw ContractViolation("propagation: edge references an unknown node");
    }
    if (e.source == e.target) continue;
    pairs.emplace_back(e.source, e.target);
    pairs.emplace_back(e.target, e.source);
  }
  for (Eigen::Index v = 0; v < num_nodes; ++v) {
    pairs.emplace_back(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Scalar> degree(static_cast<std::size_t>(num_nodes), Scalar(0));
  for (const auto& [u, v] : pairs) degree[u] += Scalar(1);
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    const Scalar w = aggregation == Aggregation::Normalized
                         ? Scalar(1) / std::sqrt(degree[u] * degree[v])
                         : Scalar(1);
    triplets.emplace_back(u, v, w);
  }
  SparseMatrix<Scalar> a(num_nodes, num_nodes);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

/// Two graph-convolution layers and an edge-scoring MLP over
/// [h_source ‖ h_target ‖ edge features].
template <typename Scalar>
struct GnnModel {
  Aggregation aggregation = Aggregation::Normalized;
  Matrix<Scalar> w1;  ///< node_dim x hidden
  Matrix<Scalar> b1;  ///< 1 x hidden
  Matrix<Scalar> w2;  ///< hidden x hidden
  Matrix<Scalar> b2;  ///< 1 x hidden
  Mlp<Scalar> head;   ///< (2 hidden + edge_dim) x mlp_hidden x 1

  Eigen::Index node_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index edge_dim() const { return head.in_dim() - 2 * hidden_dim(); }
  Eigen::Index mlp_hidden_dim() const { return head.hidden_dim(); }

  static GnnModel zeros(Eigen::Index node_dim, Eigen::Index hidden, Eigen::Index edge_dim,
                        Eigen::Index mlp_hidden, Aggregation agg = Aggregation::Normalized) {
    GnnModel m;
    m.aggregation = agg;
    m.w1 = Matrix<Scalar>::Zero(node_dim, hidden);
    m.b1 = Matrix<Scalar>::Zero(1, hidden);
    m.w2 = Matrix<Scalar>::Zero(hidden, hidden);
    m.b2 = Matrix<Scalar>::Zero(1, hidden);
    m.head = Mlp<Scalar>::zeros(2 * hidden + edge_dim, mlp_hidden);
    return m;
  }

  template <typename Rng>
  static GnnModel random(Eigen::Index node_dim, Eigen::Index hidden, Eigen::Index edge_dim,
                         Eigen::Index mlp_hidden, Rng& rng,
                         Aggregation agg = Aggregation::Normalized) {
    GnnModel m = zeros(node_dim, hidden, edge_dim, mlp_hidden, agg);
    m.w1 = glorot<Scalar>(node_dim, hidden, rng);
    m.w2 = glorot<Scalar>(hidden, hidden, rng);
    m.head = Mlp<Scalar>::random(2 * hidden + edge_dim, mlp_hidden, rng);
    return m;
  }

  /// Same shape, all parameters zero.
  GnnModel zeros_like() const {
    return zeros(node_dim(), hidden_dim(), edge_dim(), mlp_hidden_dim(), aggregation);
  }

  template <typename F>
  void for_each_block(F&& f) {
    f("gcn1.weight", w1);
    f("gcn1.bias", b1);
    f("gcn2.weight", w2);
    f("gcn2.bias", b2);
    head.for_each_block([&](const char* name, Matrix<Scalar>& m) {
      f(std::string("mlp.") + name, m);
    });
  }
  template <typename F>
  void for_each_block(F&& f) const {
    f("gcn1.weight", w1);
    f("gcn1.bias", b1);
    f("gcn2.weight", w2);
    f("gcn2.bias", b2);
    head.for_each_block([&](const char* name, const Matrix<Scalar>& m) {
      f(std::string("mlp.") + name, m);
    });
  }

  friend bool operator==(const GnnModel& a, const GnnModel& b) {
    return a.aggregation == b.aggregation && a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 &&
           a.b2 == b.b2 && a.head == b.head;
  }
};

template <typename Scalar>
struct GnnCache {
  SparseMatrix<Scalar> propagation;
  Matrix<Scalar> x;
  Matrix<Scalar> pre1, out1, pre2, out2;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  MlpCache<Scalar> head;
};

/// Node embeddings after both layers: ReLU(Â (H W) + b), twice.
template <typename Scalar>
Matrix<Scalar> gcn_forward(const GnnModel<Scalar>& m, const Matrix<Scalar>& x,
                           const SparseMatrix<Scalar>& propagation,
                           GnnCache<Scalar>* cache = nullptr) {
  if (x.cols() != m.node_dim()) throw ContractViolation("gcn: node feature dimension mismatch");
  if (propagation.rows() != x.rows()) throw ContractViolation("gcn: node count mismatch");
  Matrix<Scalar> pre1 = (propagation * (x * m.w1)).rowwise() + m.b1.row(0);
  Matrix<Scalar> out1 = pre1.cwiseMax(Scalar(0));
  Matrix<Scalar> pre2 = (propagation * (out1 * m.w2)).rowwise() + m.b2.row(0);
  Matrix<Scalar> out2 = pre2.cwiseMax(Scalar(0));
  if (cache) {
    cache->propagation = propagation;
    cache->x = x;
    cache->pre1 = std::move(pre1);
    cache->out1 = std::move(out1);
    cache->pre2 = std::move(pre2);
    cache->out2 = out2;
  }
  return out2;
}

/// One score per (source, target) pair; row i of `edge_features` belongs to
/// pair i.
template <typename Scalar>
Vector<Scalar> edge_scores(const GnnModel<Scalar>& m, const Matrix<Scalar>& embeddings,
                           const Matrix<Scalar>& edge_features,
                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                           GnnCache<Scalar>* cache = nullptr) {
  const Eigen::Index h = m.hidden_dim();
  if (embeddings.cols() != h) throw ContractViolation("edge scores: embedding dimension mismatch");
  if (edge_features.cols() != m.edge_dim() ||
      edge_features.rows() != static_cast<Eigen::Index>(pairs.size())) {
    throw ContractViolation("edge scores: edge feature dimension mismatch");
  }
  Matrix<Scalar> z(static_cast<Eigen::Index>(pairs.size()), m.head.in_dim());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (static_cast<Eigen::Index>(std::max(pairs[i].first, pairs[i].second)) >=
        embeddings.rows()) {
      throw ContractViolation("edge scores: pair references an unknown node");
    }
    z.row(r).segment(0, h) = embeddings.row(pairs[i].first);
    z.row(r).segment(h, h) = embeddings.row(pairs[i].second);
    z.row(r).segment(2 * h, m.edge_dim()) = edge_features.row(r);
  }
  if (cache) cache->pairs = pairs;
  return mlp_forward(m.head, z, cache ? &cache->head : nullptr);
}

/// Accumulates d(loss)/d(parameters) into `grad` given d(loss)/d(scores).
template <typename Scalar>
void gnn_backward(const GnnModel<Scalar>& m, const GnnCache<Scalar>& cache,
                  const Vector<Scalar>& d_scores, GnnModel<Scalar>& grad) {
  const Eigen::Index h = m.hidden_dim();
  const Matrix<Scalar> dz = mlp_backward(m.head, cache.head, d_scores, grad.head);
  Matrix<Scalar> d_out2 = Matrix<Scalar>::Zero(cache.out2.rows(), h);
  for (std::size_t i = 0; i < cache.pairs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d_out2.row(cache.pairs[i].first) += dz.row(r).segment(0, h);
    d_out2.row(cache.pairs[i].second) += dz.row(r).segment(h, h);
  }
  const SparseMatrix<Scalar> at = cache.propagation.transpose();

  const Matrix<Scalar> d_pre2 =
      d_out2.array() * (cache.pre2.array() > Scalar(0)).template cast<Scalar>();
  const Matrix<Scalar> d_xw2 = at * d_pre2;
  grad.w2 += cache.out1.transpose() * d_xw2;
  grad.b2 += d_pre2.colwise().sum();
  const Matrix<Scalar> d_out1 = d_xw2 * m.w2.transpose();

  const Matrix<Scalar> d_pre1 =
      d_out1.array() * (cache.pre1.array() > Scalar(0)).template cast<Scalar>();
  const Matrix<Scalar> d_xw1 = at * d_pre1;
  grad.w1 += cache.x.transpose() * d_xw1;
  grad.b1 += d_pre1.colwise().sum();
}

}  // namespace dcs::neural
