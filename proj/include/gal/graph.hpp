#pragma once

// Attributed graph storage, the GCN propagation operator and L-hop feature
// aggregation.

#include "gal/core.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <utility>

namespace gal {

using Edge = std::pair<NodeId, NodeId>;

// Undirected graph in symmetric CSR form plus node features and optional labels.
// Immutable after construction.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  // Symmetrizes, deduplicates and drops self-loops. Throws on ids outside
  // [0, n), a feature matrix without n rows, or negative labels.
  static AttributedGraph from_edges(Index n, std::span<const Edge> edges, Matrix features,
                                    std::optional<std::vector<int>> labels = std::nullopt) {
    if (n < 0) throw Error("negative node count");
    if (features.rows() != n) {
      throw Error("feature matrix has " + std::to_string(features.rows()) + " rows, expected " +
                  std::to_string(n));
    }
    std::vector<Edge> sym;
    sym.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n) {
        throw Error("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                    ") references a node outside [0, " + std::to_string(n) + ")");
      }
      if (u == v) continue;
      sym.emplace_back(u, v);
      sym.emplace_back(v, u);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

    AttributedGraph g;
    g.n_ = n;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& e : sym) ++g.offsets_[static_cast<std::size_t>(e.first) + 1];
    for (Index i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.columns_.reserve(sym.size());
    for (const auto& e : sym) g.columns_.push_back(e.second);
    g.features_ = std::move(features);

    if (labels) {
      if (static_cast<Index>(labels->size()) != n) {
        throw Error("label vector has " + std::to_string(labels->size()) + " entries, expected " +
                    std::to_string(n));
      }
      int max_label = -1;
      for (int y : *labels) {
        if (y < 0) throw Error("negative label " + std::to_string(y));
        max_label = std::max(max_label, y);
      }
      g.class_count_ = max_label + 1;
      g.labels_ = std::move(labels);
    }
    return g;
  }

  Index num_nodes() const noexcept { return n_; }
  Index num_edges() const noexcept { return static_cast<Index>(columns_.size()) / 2; }
  Index feature_dim() const noexcept { return features_.cols(); }
  int class_count() const noexcept { return class_count_; }

  Index degree(Index v) const { return offsets_[v + 1] - offsets_[v]; }

  // Neighbors of v in ascending id order.
  std::span<const NodeId> neighbors(Index v) const {
    return {columns_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }

  const std::vector<Index>& row_offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& column_indices() const noexcept { return columns_; }
  const Matrix& features() const noexcept { return features_; }

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<int>& labels() const {
    if (!labels_) throw Error("graph has no labels");
    return *labels_;
  }

  // Each undirected edge once, as (u, v) with u < v, sorted.
  std::vector<Edge> undirected_edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(num_edges()));
    for (Index u = 0; u < n_; ++u) {
      for (NodeId v : neighbors(u)) {
        if (u < v) out.emplace_back(static_cast<NodeId>(u), v);
      }
    }
    return out;
  }

  // Same topology and labels with a different feature matrix.
  AttributedGraph with_features(Matrix features) const {
    if (features.rows() != n_) throw Error("feature matrix row count mismatch");
    AttributedGraph g = *this;
    g.features_ = std::move(features);
    return g;
  }

  friend bool operator==(const AttributedGraph& a, const AttributedGraph& b) {
    return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.columns_ == b.columns_ &&
           a.class_count_ == b.class_count_ && a.labels_ == b.labels_ &&
           a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
           a.features_ == b.features_;
  }

 private:
  Index n_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<NodeId> columns_;
  Matrix features_;
  std::optional<std::vector<int>> labels_;
  int class_count_ = 0;
};

// S = (I+D)^{-1/2} (A+I) (I+D)^{-1/2}, CSR with ascending columns per row.
struct NormalizedAdjacency {
  SparseMatrix s;

  Index size() const noexcept { return s.rows(); }
};

inline NormalizedAdjacency normalized_adjacency(const AttributedGraph& g) {
  const Index n = g.num_nodes();
  auto weight = [&](Index i, Index j) {
    if (i == j) return 1.0 / static_cast<double>(g.degree(i) + 1);
    return 1.0 / std::sqrt(static_cast<double>((g.degree(i) + 1) * (g.degree(j) + 1)));
  };

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * g.num_edges() + n));
  for (Index i = 0; i < n; ++i) {
    bool diagonal_done = false;
    for (NodeId j : g.neighbors(i)) {
      if (!diagonal_done && j > i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), weight(i, i));
        diagonal_done = true;
      }
      triplets.emplace_back(static_cast<int>(i), j, weight(i, j));
    }
    if (!diagonal_done) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), weight(i, i));
    }
  }
  NormalizedAdjacency out;
  out.s.resize(n, n);
  out.s.setFromTriplets(triplets.begin(), triplets.end());
  out.s.makeCompressed();
  return out;
}

// The n x n identity as a propagation operator; turns the GCN into a plain MLP.
inline NormalizedAdjacency identity_adjacency(Index n) {
  NormalizedAdjacency out;
  out.s.resize(n, n);
  out.s.setIdentity();
  out.s.makeCompressed();
  return out;
}

// S^L X by L sparse-dense products; S^L is never formed.
inline Matrix aggregate_features(const NormalizedAdjacency& adj, const Matrix& x, int hops) {
  if (hops < 0) throw Error("aggregate_features: negative hop count");
  if (adj.size() != x.rows()) {
    throw Error("aggregate_features: adjacency is " + std::to_string(adj.size()) +
                " x " + std::to_string(adj.size()) + " but features have " +
                std::to_string(x.rows()) + " rows");
  }
  Matrix out = x;
  for (int l = 0; l < hops; ++l) {
    Matrix next = adj.s * out;
    out.swap(next);
  }
  return out;
}

// Fraction of undirected edges whose endpoints share a label.
inline double homophily_ratio(const AttributedGraph& g) {
  const auto& y = g.labels();
  if (g.num_edges() == 0) throw Error("homophily_ratio: graph has no edges");
  Index same = 0;
  for (Index u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v && y[u] == y[v]) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

// Scales every non-zero feature row to unit L1 norm.
inline Matrix row_normalize(const Matrix& x) {
  Matrix out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).cwiseAbs().sum();
    if (sum > 0) out.row(i) /= sum;
  }
  return out;
}

}  // namespace gal
