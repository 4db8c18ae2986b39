#pragma once

// Diagnostics tying a trained classifier back to the coverage objective:
// the per-node Lipschitz bound check and the accuracy-by-distance study.

#include "gal/gcn.hpp"
#include "gal/partition.hpp"

#include <Eigen/Eigenvalues>

namespace gal {

// Largest singular value of w.
inline double spectral_norm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = w.cols() <= w.rows() ? Eigen::MatrixXd(w.transpose() * w)
                                                    : Eigen::MatrixXd(w * w.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

// Power-iteration estimate of the largest singular value. Approaches from
// below, so it is reported but not used as a bound.
inline double spectral_norm_power(const Matrix& w, int iterations = 100) {
  if (w.size() == 0) return 0.0;
  Vector v = Vector::Ones(w.cols()).normalized();
  double sigma = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Vector u = w * v;
    const Vector next = w.transpose() * u;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    v = next / norm;
    sigma = std::sqrt(norm);
  }
  return sigma;
}

// A two-layer ReLU head applied to aggregated features: f = h o g with
// h(z) = ReLU(z W1) W2.
struct MlpHead {
  Matrix w1, w2;

  Matrix apply(const Matrix& z) const { return (z * w1).cwiseMax(0.0) * w2; }

  // ReLU is 1-Lipschitz, so |h(a) - h(b)|_2 <= |W1| |W2| |a - b|_2.
  double lipschitz_bound() const { return spectral_norm(w1) * spectral_norm(w2); }
};

// Trains the head with the GCN protocol by running the GCN on the identity
// propagation operator.
inline MlpHead train_mlp_head(const Matrix& aggregated, std::span<const NodeId> train, std::span<const int> labels,
                              int classes, const TrainConfig& cfg, std::uint64_t seed) {
  const GcnInput input(identity_adjacency(aggregated.rows()), aggregated);
  const GcnModel m = gcn_train(input, train, labels, classes, cfg, seed);
  return {m.w1, m.w2};
}

struct NodeBound {
  NodeId node = 0;
  NodeId tau = -1;       // nearest training node in the same part
  double epsilon = 0.0;  // |g(i) - g(tau)|_2
  double gamma = 0.0;    // 2 * lipschitz * epsilon
  double lhs = 0.0;      // |f(i) - f(tau)|_inf
  double rhs = 0.0;      // lipschitz * epsilon
  bool covered = false;
};

struct BoundDiagnostics {
  double lipschitz = 0.0;
  std::vector<NodeBound> nodes;
  Index violations = 0;  // covered nodes with lhs > rhs + 1e-9

  Index covered_count() const {
    Index c = 0;
    for (const auto& b : nodes) c += b.covered;
    return c;
  }
};

namespace detail {

inline std::vector<std::vector<NodeId>> training_by_part(const Partition& p, std::span<const NodeId> train) {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(p.k));
  for (NodeId t : train) out[p.assignment[t]].push_back(t);
  return out;
}

inline std::pair<NodeId, double> nearest_in(const Matrix& g, Index i, std::span<const NodeId> pool) {
  NodeId best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId t : pool) {
    const double d = squared_distance(g, i, g, t);
    if (d < best_d || (d == best_d && t < best)) {
      best_d = d;
      best = t;
    }
  }
  return {best, std::sqrt(best_d)};
}

}  // namespace detail

// Per node: tau(i), epsilon_i, and the check |f(i) - f(tau(i))|_inf <=
// lipschitz * epsilon_i for f = head o g. Nodes in a part with no training
// node are marked uncovered and skipped by the check.
inline BoundDiagnostics bound_diagnostics(const MlpHead& head, const Matrix& aggregated, const Partition& partition,
                                          std::span<const NodeId> train) {
  constexpr double kSlack = 1e-9;
  BoundDiagnostics out;
  out.lipschitz = head.lipschitz_bound();
  const Matrix f = head.apply(aggregated);
  const auto by_part = detail::training_by_part(partition, train);
  out.nodes.reserve(static_cast<std::size_t>(aggregated.rows()));
  for (Index i = 0; i < aggregated.rows(); ++i) {
    NodeBound b;
    b.node = static_cast<NodeId>(i);
    const auto& pool = by_part[partition.assignment[i]];
    if (!pool.empty()) {
      std::tie(b.tau, b.epsilon) = detail::nearest_in(aggregated, i, pool);
      b.covered = true;
      b.gamma = 2.0 * out.lipschitz * b.epsilon;
      b.rhs = out.lipschitz * b.epsilon;
      b.lhs = (f.row(i) - f.row(b.tau)).lpNorm<Eigen::Infinity>();
      if (b.lhs > b.rhs + kSlack) ++out.violations;
    }
    out.nodes.push_back(b);
  }
  return out;
}

// For a GCN, which is not of the form h o g, the largest observed ratio
// |f(i) - f(tau)|_inf / epsilon_i over covered nodes with epsilon_i > 0.
inline double observed_gcn_ratio(const Matrix& logits, const Matrix& aggregated, const Partition& partition,
                                 std::span<const NodeId> train) {
  const auto by_part = detail::training_by_part(partition, train);
  double ratio = 0.0;
  for (Index i = 0; i < aggregated.rows(); ++i) {
    const auto& pool = by_part[partition.assignment[i]];
    if (pool.empty()) continue;
    const auto [tau, eps] = detail::nearest_in(aggregated, i, pool);
    if (eps <= 0.0) continue;
    ratio = std::max(ratio, (logits.row(i) - logits.row(tau)).lpNorm<Eigen::Infinity>() / eps);
  }
  return ratio;
}

struct DisparityBin {
  int index = 0;
  double lo_distance = 0.0;
  double hi_distance = 0.0;
  Index count = 0;
  double accuracy = 0.0;
};

struct DisparityTable {
  std::vector<DisparityBin> bins;
  std::vector<int> bin_of_node;  // -1 for training nodes

  double spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& b : bins) {
      lo = std::min(lo, b.accuracy);
      hi = std::max(hi, b.accuracy);
    }
    return bins.empty() ? 0.0 : hi - lo;
  }
};

// Test nodes (not in train) sorted by distance to the nearest training node
// (ties by id) and cut into `bins` equal-count groups whose sizes differ by
// at most one, larger groups first.
inline DisparityTable disparity_analysis(std::span<const int> predictions, std::span<const int> truth,
                                         const Matrix& aggregated, std::span<const NodeId> train, int bins) {
  const Index n = aggregated.rows();
  if (bins < 1) throw Error("disparity_analysis: bins must be positive");
  if (train.empty()) throw Error("disparity_analysis: empty training set");
  std::vector<bool> in_train(static_cast<std::size_t>(n), false);
  for (NodeId t : train) in_train[t] = true;
  std::vector<std::pair<double, NodeId>> test;
  for (Index i = 0; i < n; ++i) {
    if (in_train[i]) continue;
    test.emplace_back(detail::nearest_in(aggregated, i, train).second, static_cast<NodeId>(i));
  }
  if (static_cast<Index>(test.size()) < bins) {
    throw Error("disparity_analysis: " + std::to_string(test.size()) + " test nodes for " + std::to_string(bins) +
                " bins");
  }
  std::sort(test.begin(), test.end());

  DisparityTable table;
  table.bin_of_node.assign(static_cast<std::size_t>(n), -1);
  const std::size_t base = test.size() / static_cast<std::size_t>(bins);
  const std::size_t extra = test.size() % static_cast<std::size_t>(bins);
  std::size_t pos = 0;
  for (int b = 0; b < bins; ++b) {
    const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
    DisparityBin bin;
    bin.index = b;
    bin.count = static_cast<Index>(size);
    bin.lo_distance = test[pos].first;
    bin.hi_distance = test[pos + size - 1].first;
    Index hits = 0;
    for (std::size_t j = pos; j < pos + size; ++j) {
      const NodeId v = test[j].second;
      hits += predictions[v] == truth[v];
      table.bin_of_node[v] = b;
    }
    bin.accuracy = static_cast<double>(hits) / static_cast<double>(size);
    table.bins.push_back(bin);
    pos += size;
  }
  return table;
}

}  // namespace gal
