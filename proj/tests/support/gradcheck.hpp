#pragma once

// Central finite-difference check of the graph network gradients.

#include <algorithm>
#include <cmath>
#include <random>

#include "dcs/neural.hpp"
#include "support/graphs.hpp"

namespace dcs::testing {

struct GradFixture {
  GnnModel model;
  Eigen::MatrixXd x;
  std::vector<GraphEdge> edges;
  Eigen::MatrixXd edge_features;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  Eigen::VectorXd loss_weights;
};

/// loss = w·q + |q|²/2 over the scores of the fixture's pairs.
inline double fixture_loss(const GradFixture& f, const GnnModel& m,
                           neural::GnnCache<double>* cache = nullptr) {
  const auto a = neural::propagation_matrix<double>(f.x.rows(), f.edges, m.aggregation);
  const Eigen::MatrixXd h = neural::gcn_forward(m, f.x, a, cache);
  const Eigen::VectorXd q = neural::edge_scores(m, h, f.edge_features, f.pairs, cache);
  return q.dot(f.loss_weights) + 0.5 * q.squaredNorm();
}

inline bool near_kink(const GradFixture& f) {
  neural::GnnCache<double> c;
  fixture_loss(f, f.model, &c);
  auto close = [](const Eigen::MatrixXd& m) { return (m.array().abs() < 1e-4).any(); };
  return close(c.pre1) || close(c.pre2) || close(c.head.pre);
}

/// Random fixture away from ReLU kinks (redrawn while any pre-activation is
/// within 1e-4 of zero).
inline GradFixture random_fixture(std::mt19937_64& rng, neural::Aggregation agg) {
  std::uniform_int_distribution<int> nodes(2, 9), edges(1, 14), hidden(2, 6), mlp(2, 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    GradFixture f;
    const auto g = random_graph(rng, static_cast<std::size_t>(nodes(rng)),
                                static_cast<std::size_t>(edges(rng)), 5, 4);
    f.model = GnnModel::random(5, hidden(rng), 4, mlp(rng), rng, agg);
    for (auto* b : {&f.model.b1, &f.model.b2, &f.model.head.b1, &f.model.head.b2}) {
      *b = b->unaryExpr([&](double) { return 0.2 * u(rng); });
    }
    f.x = g.node_features;
    f.edges = g.edges;
    for (auto i : g.frontier) f.pairs.emplace_back(g.edges[i].source, g.edges[i].target);
    f.edge_features.resize(static_cast<Eigen::Index>(f.pairs.size()), 4);
    for (std::size_t i = 0; i < g.frontier.size(); ++i) {
      f.edge_features.row(static_cast<Eigen::Index>(i)) =
          g.edge_features.row(static_cast<Eigen::Index>(g.frontier[i]));
    }
    f.loss_weights = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(f.pairs.size()),
                                                  [&] { return u(rng); });
    if (!near_kink(f)) return f;
  }
}

inline GnnModel analytic_gradient(const GradFixture& f) {
  neural::GnnCache<double> c;
  const auto a = neural::propagation_matrix<double>(f.x.rows(), f.edges, f.model.aggregation);
  const Eigen::MatrixXd h = neural::gcn_forward(f.model, f.x, a, &c);
  const Eigen::VectorXd q = neural::edge_scores(f.model, h, f.edge_features, f.pairs, &c);
  GnnModel grad = f.model.zeros_like();
  neural::gnn_backward(f.model, c, Eigen::VectorXd(f.loss_weights + q), grad);
  return grad;
}

/// Largest |fd - an| / max(1e-8, |fd| + |an|) over every parameter.
inline double worst_relative_error(const GradFixture& f, double step = 1e-5) {
  GnnModel grad = analytic_gradient(f);
  GnnModel probe = f.model;
  auto params = neural::parameter_blocks(probe);
  auto grads = neural::parameter_blocks(grad);
  double worst = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (Eigen::Index i = 0; i < params[b]->size(); ++i) {
      double& p = params[b]->data()[i];
      const double original = p;
      p = original + step;
      const double up = fixture_loss(f, probe);
      p = original - step;
      const double down = fixture_loss(f, probe);
      p = original;
      const double fd = (up - down) / (2 * step);
      const double an = grads[b]->data()[i];
      worst = std::max(worst, std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an)));
    }
  }
  return worst;
}

}  // namespace dcs::testing
