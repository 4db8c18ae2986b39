#pragma once

// K-way graph partitions: modularity, the Clauset-Newman-Moore greedy merge
// dendrogram with a feature-centroid fallback, dendrogram cuts and the
// elbow rule for choosing K.

#include "gal/graph.hpp"

#include <map>
#include <numeric>
#include <queue>

namespace gal {

struct Partition {
  std::vector<int> assignment;  // node -> part id in [0, k)
  int k = 0;
  double modularity = 0.0;

  std::vector<std::vector<NodeId>> members() const {
    std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<NodeId>(i));
    }
    return out;
  }
};

namespace detail {

// Q = sum_c [E_c/m - (D_c/2m)^2] from integer community totals, evaluated as
// (4m sum E_c - sum D_c^2) / 4m^2 so that exact cases stay exact.
inline double modularity_from_totals(std::int64_t m, std::int64_t internal_sum,
                                     std::int64_t degree_sq_sum) {
  const double numerator = static_cast<double>(4 * m * internal_sum - degree_sq_sum);
  return numerator / (4.0 * static_cast<double>(m) * static_cast<double>(m));
}

}  // namespace detail

inline double modularity_score(const AttributedGraph& g, std::span<const int> assignment) {
  const Index n = g.num_nodes();
  const std::int64_t m = g.num_edges();
  if (m == 0) throw Error("modularity_score: graph has no edges");
  if (static_cast<Index>(assignment.size()) != n) throw Error("modularity_score: assignment size mismatch");
  const int parts = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<std::int64_t> internal(static_cast<std::size_t>(parts), 0);
  std::vector<std::int64_t> degree(static_cast<std::size_t>(parts), 0);
  for (Index u = 0; u < n; ++u) {
    const int cu = assignment[u];
    if (cu < 0) throw Error("modularity_score: negative part id");
    degree[cu] += g.degree(u);
    for (NodeId v : g.neighbors(u)) {
      if (u < v && assignment[v] == cu) ++internal[cu];
    }
  }
  std::int64_t internal_sum = 0, degree_sq_sum = 0;
  for (int c = 0; c < parts; ++c) {
    internal_sum += internal[c];
    degree_sq_sum += degree[c] * degree[c];
  }
  return detail::modularity_from_totals(m, internal_sum, degree_sq_sum);
}

// One merge. Communities are named by their smallest node id, so the
// survivor is always the smaller of the two names.
struct MergeRecord {
  NodeId survivor = 0;
  NodeId absorbed = 0;
  Index merged_size = 0;
  double modularity_after = 0.0;
  bool fallback = false;
};

struct MergeDendrogram {
  Index n = 0;
  double initial_modularity = 0.0;  // all singletons
  std::vector<MergeRecord> merges;  // n - 1 records, singletons down to one community

  // Modularity when exactly k communities remain.
  double modularity_at(Index k) const {
    if (k < 1 || k > n) throw Error("modularity_at: k out of range");
    return k == n ? initial_modularity : merges[static_cast<std::size_t>(n - k - 1)].modularity_after;
  }

  // Number of communities left when the greedy phase stopped.
  Index greedy_stop_k() const {
    Index greedy = 0;
    for (const auto& r : merges) greedy += r.fallback ? 0 : 1;
    return n - greedy;
  }

  // k with the highest modularity; ties go to the larger k.
  Index peak_k() const {
    Index best = n;
    double best_q = initial_modularity;
    for (std::size_t i = 0; i < merges.size(); ++i) {
      if (merges[i].modularity_after > best_q) {
        best_q = merges[i].modularity_after;
        best = n - static_cast<Index>(i) - 1;
      }
    }
    return best;
  }
};

namespace detail {

class CommunityState {
 public:
  CommunityState(const AttributedGraph& g, const Matrix& features)
      : m_(g.num_edges()),
        alive_(static_cast<std::size_t>(g.num_nodes()), true),
        size_(static_cast<std::size_t>(g.num_nodes()), 1),
        degree_(static_cast<std::size_t>(g.num_nodes())),
        internal_(static_cast<std::size_t>(g.num_nodes()), 0),
        links_(static_cast<std::size_t>(g.num_nodes())),
        centroid_sum_(features),
        version_(static_cast<std::size_t>(g.num_nodes()), 0) {
    for (Index u = 0; u < g.num_nodes(); ++u) {
      degree_[u] = g.degree(u);
      degree_sq_sum_ += degree_[u] * degree_[u];
      for (NodeId v : g.neighbors(u)) links_[u][v] = 1;
    }
    alive_count_ = g.num_nodes();
  }

  std::int64_t gain_numerator(NodeId a, NodeId b, std::int64_t between) const {
    return 2 * m_ * between - degree_[a] * degree_[b];
  }

  double modularity() const { return modularity_from_totals(m_, internal_sum_, degree_sq_sum_); }

  MergeRecord merge(NodeId a, NodeId b, bool fallback) {
    const NodeId keep = std::min(a, b);
    const NodeId gone = std::max(a, b);
    std::int64_t between = 0;
    if (auto it = links_[keep].find(gone); it != links_[keep].end()) between = it->second;

    degree_sq_sum_ -= degree_[keep] * degree_[keep] + degree_[gone] * degree_[gone];
    internal_sum_ += between;
    degree_[keep] += degree_[gone];
    degree_sq_sum_ += degree_[keep] * degree_[keep];
    internal_[keep] += internal_[gone] + between;
    size_[keep] += size_[gone];

    links_[keep].erase(gone);
    for (const auto& [x, e] : links_[gone]) {
      if (x == keep) continue;
      links_[keep][x] += e;
      auto& back = links_[x];
      back.erase(gone);
      back[keep] += e;
    }
    links_[gone].clear();
    centroid_sum_.row(keep) += centroid_sum_.row(gone);
    alive_[gone] = false;
    --alive_count_;
    ++version_[keep];
    ++version_[gone];
    return MergeRecord{keep, gone, size_[keep], modularity(), fallback};
  }

  std::int64_t m_;
  std::vector<bool> alive_;
  std::vector<Index> size_;
  std::vector<std::int64_t> degree_;
  std::vector<std::int64_t> internal_;
  std::vector<std::map<NodeId, std::int64_t>> links_;
  Matrix centroid_sum_;
  std::vector<std::uint64_t> version_;
  std::int64_t internal_sum_ = 0;
  std::int64_t degree_sq_sum_ = 0;
  Index alive_count_ = 0;
};

struct MergeCandidate {
  std::int64_t gain;
  NodeId a, b;  // a < b
  std::uint64_t version_a, version_b;
};

// Max-heap order: larger gain first, then lexicographically smaller (a, b).
struct CandidateOrder {
  bool operator()(const MergeCandidate& x, const MergeCandidate& y) const {
    if (x.gain != y.gain) return x.gain < y.gain;
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

}  // namespace detail

// Picks the next fallback merge among the live communities: the smallest
// community (ties: lower id) joins the community whose feature centroid is
// nearest to its own (ties: lower id). Returns {smallest, target}.
inline std::pair<NodeId, NodeId> agglomerative_fallback(std::span<const NodeId> communities,
                                                        std::span<const Index> sizes,
                                                        const Matrix& centroids) {
  if (communities.size() < 2) throw Error("agglomerative_fallback: fewer than two communities");
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < communities.size(); ++i) {
    if (sizes[i] < sizes[smallest] ||
        (sizes[i] == sizes[smallest] && communities[i] < communities[smallest])) {
      smallest = i;
    }
  }
  std::size_t target = smallest == 0 ? 1 : 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < communities.size(); ++i) {
    if (i == smallest) continue;
    const double dist = (centroids.row(static_cast<Index>(i)) - centroids.row(static_cast<Index>(smallest))).squaredNorm();
    if (dist < best || (dist == best && communities[i] < communities[target])) {
      best = dist;
      target = i;
    }
  }
  return {communities[smallest], communities[target]};
}

// Greedy modularity merges while any merge has positive gain (ties: smallest
// (min id, max id)), then fallback merges on `features` down to one community.
inline MergeDendrogram cnm_dendrogram(const AttributedGraph& g, const Matrix& features) {
  const Index n = g.num_nodes();
  if (g.num_edges() == 0) throw Error("cnm_dendrogram: graph has no edges");
  if (features.rows() != n) throw Error("cnm_dendrogram: feature row count mismatch");

  detail::CommunityState state(g, features);
  MergeDendrogram dendro;
  dendro.n = n;
  dendro.initial_modularity = state.modularity();
  dendro.merges.reserve(static_cast<std::size_t>(std::max<Index>(n - 1, 0)));

  using Heap = std::priority_queue<detail::MergeCandidate, std::vector<detail::MergeCandidate>,
                                   detail::CandidateOrder>;
  Heap heap;
  auto version = [&](NodeId c) { return state.version_[c]; };
  auto push_pairs = [&](NodeId c) {
    for (const auto& [x, e] : state.links_[c]) {
      const NodeId a = std::min(c, x), b = std::max(c, x);
      heap.push({state.gain_numerator(a, b, e), a, b, version(a), version(b)});
    }
  };
  for (Index u = 0; u < n; ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) heap.push({state.gain_numerator(static_cast<NodeId>(u), v, 1), static_cast<NodeId>(u), v, 0, 0});
    }
  }

  while (!heap.empty()) {
    const auto top = heap.top();
    heap.pop();
    if (!state.alive_[top.a] || !state.alive_[top.b] || top.version_a != version(top.a) ||
        top.version_b != version(top.b)) {
      continue;
    }
    if (top.gain <= 0) break;
    const auto rec = state.merge(top.a, top.b, false);
    dendro.merges.push_back(rec);
    push_pairs(rec.survivor);
  }

  std::vector<NodeId> live;
  for (Index c = 0; c < n; ++c) {
    if (state.alive_[c]) live.push_back(static_cast<NodeId>(c));
  }
  while (live.size() > 1) {
    std::vector<Index> sizes(live.size());
    Matrix centroids(static_cast<Index>(live.size()), features.cols());
    for (std::size_t i = 0; i < live.size(); ++i) {
      sizes[i] = state.size_[live[i]];
      centroids.row(static_cast<Index>(i)) =
          state.centroid_sum_.row(live[i]) / static_cast<double>(sizes[i]);
    }
    const auto [small, target] = agglomerative_fallback(live, sizes, centroids);
    const auto rec = state.merge(small, target, true);
    dendro.merges.push_back(rec);
    live.erase(std::find(live.begin(), live.end(), rec.absorbed));
  }
  return dendro;
}

// Communities as they stood when exactly k remained, numbered by smallest
// member id.
inline Partition partition_at_k(const MergeDendrogram& dendro, Index k) {
  const Index n = dendro.n;
  if (k < 1 || k > n) {
    throw Error("partition_at_k: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<NodeId> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (Index i = 0; i < n - k; ++i) {
    const auto& r = dendro.merges[static_cast<std::size_t>(i)];
    parent[find(r.absorbed)] = find(r.survivor);
  }
  Partition p;
  p.k = static_cast<int>(k);
  p.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> label_of_root(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Index v = 0; v < n; ++v) {
    const NodeId r = find(static_cast<NodeId>(v));
    if (label_of_root[r] < 0) label_of_root[r] = next++;
    p.assignment[v] = label_of_root[r];
  }
  p.modularity = dendro.modularity_at(k);
  return p;
}

// Sum over parts of the L2 (not squared) distances from members to the part
// centroid.
inline double partition_dispersion(const Partition& p, const Matrix& features) {
  Matrix sums = Matrix::Zero(p.k, features.cols());
  std::vector<Index> counts(static_cast<std::size_t>(p.k), 0);
  for (std::size_t i = 0; i < p.assignment.size(); ++i) {
    sums.row(p.assignment[i]) += features.row(static_cast<Index>(i));
    ++counts[p.assignment[i]];
  }
  for (int c = 0; c < p.k; ++c) sums.row(c) /= static_cast<double>(counts[c]);
  double cost = 0.0;
  for (std::size_t i = 0; i < p.assignment.size(); ++i) {
    cost += (features.row(static_cast<Index>(i)) - sums.row(p.assignment[i])).norm();
  }
  return cost;
}

struct CostPoint {
  Index k;
  double cost;
};

inline std::vector<CostPoint> cost_curve(const MergeDendrogram& dendro, const Matrix& features, Index k_max) {
  if (k_max < 1 || k_max > dendro.n) throw Error("cost_curve: k_max out of range");
  std::vector<CostPoint> curve;
  curve.reserve(static_cast<std::size_t>(k_max));
  for (Index k = 1; k <= k_max; ++k) {
    curve.push_back({k, partition_dispersion(partition_at_k(dendro, k), features)});
  }
  return curve;
}

struct ElbowResult {
  Index k = 0;
  bool degenerate = false;  // no point lies below the first-to-last chord
};

// Rotates the min-max scaled curve so that the first-to-last chord is
// horizontal and returns the point with the lowest rotated ordinate (ties:
// smaller k). A curve with nothing strictly below its chord returns the
// first interior point with degenerate = true.
inline ElbowResult elbow_k(std::span<const CostPoint> curve) {
  if (curve.size() < 3) throw Error("elbow_k: need at least 3 points");
  auto [xmin, xmax] = std::minmax_element(curve.begin(), curve.end(),
                                          [](const auto& a, const auto& b) { return a.k < b.k; });
  auto [ymin, ymax] = std::minmax_element(curve.begin(), curve.end(),
                                          [](const auto& a, const auto& b) { return a.cost < b.cost; });
  const double xspan = static_cast<double>(xmax->k - xmin->k);
  const double yspan = ymax->cost - ymin->cost;
  auto sx = [&](const CostPoint& p) { return xspan > 0 ? static_cast<double>(p.k - xmin->k) / xspan : 0.0; };
  auto sy = [&](const CostPoint& p) { return yspan > 0 ? (p.cost - ymin->cost) / yspan : 0.0; };

  const double theta = std::atan2(sy(curve.back()) - sy(curve.front()), sx(curve.back()) - sx(curve.front()));
  const double c = std::cos(theta), s = std::sin(theta);
  std::size_t best = 0;
  double best_y = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double y = -sx(curve[i]) * s + sy(curve[i]) * c;
    if (y < best_y || (y == best_y && curve[i].k < curve[best].k)) {
      best_y = y;
      best = i;
    }
  }
  const double chord_y = -sx(curve.front()) * s + sy(curve.front()) * c;
  constexpr double kFlatTolerance = 1e-12;
  if (best_y >= chord_y - kFlatTolerance) return {curve[1].k, true};
  return {curve[best].k, false};
}

}  // namespace gal
