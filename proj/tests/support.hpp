#pragma once

// Fixtures shared by the unit and acceptance suites.

#include "gal/graph.hpp"

#include <filesystem>
#include <optional>
#include <random>

#include <unistd.h>

namespace gal::testing {

// Zachary's karate club, unweighted, 34 nodes and 78 edges.
inline std::vector<Edge> karate_edges() {
  return {{0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},   {0, 10},  {0, 11},
          {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},
          {1, 17},  {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},
          {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
          {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32}, {15, 33},
          {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32}, {22, 33}, {23, 25}, {23, 27}, {23, 29},
          {23, 32}, {23, 33}, {24, 25}, {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
          {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
}

inline AttributedGraph karate_graph() {
  return AttributedGraph::from_edges(34, karate_edges(), Matrix::Identity(34, 34));
}

inline AttributedGraph two_triangles() {
  std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  Matrix x(6, 1);
  x << 0, 0.1, 0.2, 5, 5.1, 5.2;
  return AttributedGraph::from_edges(6, e, x, std::vector<int>{0, 0, 0, 1, 1, 1});
}

// Erdos-Renyi style graph with Gaussian features and random labels.
inline AttributedGraph random_graph(Index n, double p, Index d, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (u(rng) < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = normal(rng);
  }
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = static_cast<int>(rng() % static_cast<std::uint64_t>(classes));
  for (int c = 0; c < classes && c < n; ++c) y[c] = c;
  return AttributedGraph::from_edges(n, edges, x, y);
}

// `clusters` planted communities of equal size: dense inside, sparse across,
// features drawn around a per-cluster mean. Labels are the cluster ids.
inline AttributedGraph planted_clusters(Index n, int clusters, double p_in, double p_out, double spread, Index d,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) y[i] = static_cast<int>(i * clusters / n);
  Matrix centers(clusters, d);
  for (int c = 0; c < clusters; ++c) {
    for (Index j = 0; j < d; ++j) centers(c, j) = 4.0 * normal(rng);
  }
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (u(rng) < (y[i] == y[j] ? p_in : p_out)) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = centers(y[i], j) + spread * normal(rng);
  }
  return AttributedGraph::from_edges(n, edges, x, y);
}

inline Matrix dense_adjacency(const AttributedGraph& g) {
  Matrix a = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (Index u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
  }
  return a;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gal_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gal::testing
