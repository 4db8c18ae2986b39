#pragma once

// Query strategies for one-step batch active learning and the coverage
// objective they target. Every function here is a pure function of its
// inputs and the Rng it is handed; the model-dependent baselines take the
// model outputs (hidden representations, logits) as plain matrices.

#include "gal/graph.hpp"
#include "gal/kmeans.hpp"
#include "gal/partition.hpp"

#include <string_view>

namespace gal {

enum class Representation { aggregation, embedding, feature };

inline std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::aggregation: return "aggregation";
    case Representation::embedding: return "embedding";
    case Representation::feature: return "feature";
  }
  return "?";
}

inline Representation parse_representation(std::string_view s) {
  if (s == "aggregation") return Representation::aggregation;
  if (s == "embedding") return Representation::embedding;
  if (s == "feature") return Representation::feature;
  throw Error("unknown representation '" + std::string(s) + "'");
}

struct SelectionResult {
  std::vector<NodeId> selected;  // in selection order
  std::string strategy;
  Index budget = 0;
  std::uint64_t seed = 0;
  Representation representation = Representation::aggregation;
};

namespace detail {

inline std::vector<bool> membership(Index n, std::span<const NodeId> ids) {
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (NodeId v : ids) {
    if (v < 0 || v >= n) throw Error("node id " + std::to_string(v) + " out of range");
    in[v] = true;
  }
  return in;
}

inline void check_budget(Index b, Index available, std::string_view who) {
  if (b < 0) throw Error(std::string(who) + ": negative budget");
  if (b > available) {
    throw Error(std::string(who) + ": budget " + std::to_string(b) + " exceeds the " +
                std::to_string(available) + " selectable nodes");
  }
}

// Indices of the `count` largest scores among candidates; ties by node id.
inline std::vector<NodeId> top_by_score(std::span<const NodeId> candidates, std::span<const double> score,
                                        Index count) {
  std::vector<NodeId> order(candidates.begin(), candidates.end());
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(std::min<Index>(count, static_cast<Index>(order.size()))));
  return order;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Coverage objective

struct ObjectiveValue {
  double value = 0.0;
  std::vector<bool> uncovered;  // per part: no training node inside
  bool any_uncovered() const { return std::find(uncovered.begin(), uncovered.end(), true) != uncovered.end(); }
};

// Sum over nodes of the distance to the nearest training node in the same
// part. Nodes of a part without training nodes fall back to the nearest
// training node anywhere and the part is flagged.
inline ObjectiveValue objective_eval(const Matrix& features, const Partition& partition,
                                     std::span<const NodeId> train) {
  const Index n = features.rows();
  if (static_cast<Index>(partition.assignment.size()) != n) throw Error("objective_eval: partition size mismatch");
  if (train.empty()) throw Error("objective_eval: empty training set");
  ObjectiveValue out;
  out.uncovered.assign(static_cast<std::size_t>(partition.k), true);
  std::vector<std::vector<NodeId>> train_by_part(static_cast<std::size_t>(partition.k));
  for (NodeId t : train) {
    out.uncovered[partition.assignment[t]] = false;
    train_by_part[partition.assignment[t]].push_back(t);
  }
  for (Index i = 0; i < n; ++i) {
    const int part = partition.assignment[i];
    std::span<const NodeId> pool = out.uncovered[part] ? train : std::span<const NodeId>(train_by_part[part]);
    double best = std::numeric_limits<double>::infinity();
    for (NodeId t : pool) best = std::min(best, squared_distance(features, i, features, t));
    out.value += std::sqrt(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition-based selection

struct BudgetPlan {
  Index total = 0;
  std::vector<Index> per_part;     // b_k, indexed by part id
  std::vector<int> order;          // processing order: available size desc, id asc
  std::vector<Index> available;    // |T_k \ s0|
};

// b // K per part, the remainder one unit each to the largest parts, then any
// part asked for more than it holds passes the excess down the size order.
inline BudgetPlan plan_budget(const Partition& partition, Index b, std::span<const NodeId> seed_set) {
  const int k = partition.k;
  BudgetPlan plan;
  plan.total = b;
  plan.available.assign(static_cast<std::size_t>(k), 0);
  const auto in_seed = detail::membership(static_cast<Index>(partition.assignment.size()), seed_set);
  for (std::size_t v = 0; v < partition.assignment.size(); ++v) {
    if (!in_seed[v]) ++plan.available[partition.assignment[v]];
  }
  Index available_total = 0;
  for (Index a : plan.available) available_total += a;
  detail::check_budget(b, available_total, "plan_budget");

  plan.order.resize(static_cast<std::size_t>(k));
  std::iota(plan.order.begin(), plan.order.end(), 0);
  std::stable_sort(plan.order.begin(), plan.order.end(),
                   [&](int x, int y) { return plan.available[x] > plan.available[y]; });

  plan.per_part.assign(static_cast<std::size_t>(k), b / k);
  for (Index r = 0; r < b % k; ++r) ++plan.per_part[plan.order[static_cast<std::size_t>(r)]];

  Index excess = 0;
  for (int part : plan.order) {
    if (plan.per_part[part] > plan.available[part]) {
      excess += plan.per_part[part] - plan.available[part];
      plan.per_part[part] = plan.available[part];
    }
  }
  while (excess > 0) {
    for (int part : plan.order) {
      if (excess == 0) break;
      if (plan.per_part[part] < plan.available[part]) {
        ++plan.per_part[part];
        --excess;
      }
    }
  }
  return plan;
}

enum class MedoidRule {
  nearest,         // node closest to each K-Means center
  far_penalized,   // distance to center minus distance to the nearest selected node
};

enum class PenaltyScope {
  all_selected,          // every node picked so far, this part included
  previous_partitions,   // only nodes picked in parts processed earlier
};

struct PartitionSelectOptions {
  MedoidRule rule = MedoidRule::nearest;
  PenaltyScope scope = PenaltyScope::previous_partitions;
  KMeansOptions kmeans;
};

// For each center in order, the candidate minimizing
//   ||g(v) - center||                      (nearest)
//   ||g(v) - center|| - penalty[v]         (far_penalized)
// among candidates not yet taken; ties by node id. `penalty` holds the
// distance from each candidate to the nearest already-selected node (0 when
// nothing is selected) and is refreshed after every pick when
// refresh_penalty is set.
inline std::vector<NodeId> pick_for_centers(const Matrix& features, std::span<const NodeId> candidates,
                                            const Matrix& centers, MedoidRule rule,
                                            std::vector<double> penalty, bool refresh_penalty,
                                            bool has_selected) {
  std::vector<NodeId> picks;
  std::vector<bool> taken(candidates.size(), false);
  for (Index c = 0; c < centers.rows(); ++c) {
    std::size_t best = candidates.size();
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      double score = std::sqrt(squared_distance(features, candidates[i], centers, c));
      if (rule == MedoidRule::far_penalized && has_selected) score -= penalty[i];
      if (score < best_score || (score == best_score && candidates[i] < candidates[best])) {
        best_score = score;
        best = i;
      }
    }
    taken[best] = true;
    picks.push_back(candidates[best]);
    if (rule == MedoidRule::far_penalized && refresh_penalty) {
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double d = distance(features, candidates[i], features, candidates[best]);
        penalty[i] = has_selected ? std::min(penalty[i], d) : d;
      }
      has_selected = true;
    }
  }
  return picks;
}

// Per-part K-Means medoid approximation over `partition` (GraphPart), or the
// penalized variant (GraphPartFar) when options.rule is far_penalized.
inline std::vector<NodeId> partition_select(const Matrix& features, const Partition& partition, Index b,
                                            std::span<const NodeId> seed_set, Rng& rng,
                                            const PartitionSelectOptions& options = {}) {
  const Index n = features.rows();
  if (static_cast<Index>(partition.assignment.size()) != n) throw Error("partition_select: partition size mismatch");
  const BudgetPlan plan = plan_budget(partition, b, seed_set);
  const auto in_seed = detail::membership(n, seed_set);
  const auto parts = partition.members();

  std::vector<NodeId> selected;
  selected.reserve(static_cast<std::size_t>(b));
  std::vector<bool> is_selected(static_cast<std::size_t>(n), false);
  for (int part : plan.order) {
    const Index bk = plan.per_part[part];
    if (bk == 0) continue;
    std::vector<NodeId> candidates;
    for (NodeId v : parts[part]) {
      if (!in_seed[v] && !is_selected[v]) candidates.push_back(v);
    }
    Matrix points(static_cast<Index>(candidates.size()), features.cols());
    for (std::size_t i = 0; i < candidates.size(); ++i) points.row(static_cast<Index>(i)) = features.row(candidates[i]);
    const KMeansResult km = kmeans(points, static_cast<int>(bk), rng, options.kmeans);

    std::vector<double> penalty;
    const bool has_selected = !selected.empty();
    if (options.rule == MedoidRule::far_penalized) {
      penalty.assign(candidates.size(), 0.0);
      if (has_selected) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          double best = std::numeric_limits<double>::infinity();
          for (NodeId s : selected) best = std::min(best, squared_distance(features, candidates[i], features, s));
          penalty[i] = std::sqrt(best);
        }
      }
    }
    const bool refresh = options.scope == PenaltyScope::all_selected;
    for (NodeId v : pick_for_centers(features, candidates, km.centers, options.rule, std::move(penalty), refresh,
                                     has_selected)) {
      is_selected[v] = true;
      selected.push_back(v);
    }
  }
  return selected;
}

inline SelectionResult graphpart_select(const Matrix& features, const Partition& partition, Index b,
                                        std::span<const NodeId> seed_set, Rng& rng) {
  return {partition_select(features, partition, b, seed_set, rng), "graphpart", b};
}

inline SelectionResult graphpartfar_select(const Matrix& features, const Partition& partition, Index b,
                                           std::span<const NodeId> seed_set, Rng& rng,
                                           PenaltyScope scope = PenaltyScope::previous_partitions) {
  PartitionSelectOptions options;
  options.rule = MedoidRule::far_penalized;
  options.scope = scope;
  return {partition_select(features, partition, b, seed_set, rng, options), "graphpartfar", b};
}

inline Partition single_partition(Index n) {
  Partition p;
  p.k = 1;
  p.assignment.assign(static_cast<std::size_t>(n), 0);
  return p;
}

// K-Means over all nodes with b centers, nearest node per center.
inline SelectionResult featprop_select(const Matrix& features, Index b, std::span<const NodeId> seed_set, Rng& rng) {
  return {partition_select(features, single_partition(features.rows()), b, seed_set, rng), "featprop", b};
}

// ---------------------------------------------------------------------------
// Graph-structure baselines

inline SelectionResult random_select(Index n, Index b, std::span<const NodeId> seed_set, Rng& rng) {
  const auto in_seed = detail::membership(n, seed_set);
  std::vector<NodeId> pool;
  for (Index v = 0; v < n; ++v) {
    if (!in_seed[v]) pool.push_back(static_cast<NodeId>(v));
  }
  detail::check_budget(b, static_cast<Index>(pool.size()), "random_select");
  for (Index i = 0; i < b; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(b));
  return {std::move(pool), "random", b};
}

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-10;  // L1 change between iterates
  int max_iterations = 1000;
};

// Power iteration; mass on isolated nodes is spread uniformly.
inline Vector pagerank(const AttributedGraph& g, const PageRankOptions& options = {}) {
  const Index n = g.num_nodes();
  if (n == 0) return Vector();
  Vector rank = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector next(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double dangling = 0.0;
    for (Index v = 0; v < n; ++v) {
      if (g.degree(v) == 0) dangling += rank[v];
    }
    const double base = (1.0 - options.damping) / static_cast<double>(n) +
                        options.damping * dangling / static_cast<double>(n);
    for (Index v = 0; v < n; ++v) {
      double acc = 0.0;
      for (NodeId u : g.neighbors(v)) acc += rank[u] / static_cast<double>(g.degree(u));
      next[v] = base + options.damping * acc;
    }
    const double change = (next - rank).lpNorm<1>();
    rank.swap(next);
    if (change < options.tolerance) break;
  }
  return rank;
}

namespace detail {

inline SelectionResult top_b(std::span<const double> score, Index n, Index b, std::span<const NodeId> seed_set,
                             std::string name) {
  const auto in_seed = membership(n, seed_set);
  std::vector<NodeId> pool;
  for (Index v = 0; v < n; ++v) {
    if (!in_seed[v]) pool.push_back(static_cast<NodeId>(v));
  }
  check_budget(b, static_cast<Index>(pool.size()), name);
  return {top_by_score(pool, score, b), std::move(name), b};
}

}  // namespace detail

inline SelectionResult degree_select(const AttributedGraph& g, Index b, std::span<const NodeId> seed_set = {}) {
  std::vector<double> deg(static_cast<std::size_t>(g.num_nodes()));
  for (Index v = 0; v < g.num_nodes(); ++v) deg[v] = static_cast<double>(g.degree(v));
  return detail::top_b(deg, g.num_nodes(), b, seed_set, "degree");
}

inline SelectionResult pagerank_select(const AttributedGraph& g, Index b, std::span<const NodeId> seed_set = {}) {
  const Vector pr = pagerank(g);
  std::vector<double> score(pr.data(), pr.data() + pr.size());
  return detail::top_b(score, g.num_nodes(), b, seed_set, "pagerank");
}

// ---------------------------------------------------------------------------
// Model-dependent baselines. `init` is the random third already labeled; the
// returned list starts with it.

namespace detail {

inline std::vector<NodeId> remaining_pool(Index n, std::span<const NodeId> init, std::span<const NodeId> seed_set) {
  auto excluded = membership(n, seed_set);
  for (NodeId v : init) {
    if (excluded[v]) throw Error("initial set overlaps the seed set");
    excluded[v] = true;
  }
  std::vector<NodeId> pool;
  for (Index v = 0; v < n; ++v) {
    if (!excluded[v]) pool.push_back(static_cast<NodeId>(v));
  }
  return pool;
}

inline SelectionResult init_plus_top(std::span<const NodeId> init, std::span<const NodeId> pool,
                                     std::span<const double> score, Index b, std::string name) {
  const Index rest = b - static_cast<Index>(init.size());
  if (rest < 0) throw Error(name + ": initial set larger than the budget");
  check_budget(rest, static_cast<Index>(pool.size()), name);
  std::vector<NodeId> out(init.begin(), init.end());
  for (NodeId v : top_by_score(pool, score, rest)) out.push_back(v);
  return {std::move(out), std::move(name), b};
}

}  // namespace detail

// Greedy 2-approximate K-Center: repeatedly add the node farthest from the
// current set (ties by id) until b nodes are held.
inline SelectionResult kcenter_greedy_select(const Matrix& reps, Index b, std::span<const NodeId> init,
                                             std::span<const NodeId> seed_set = {}) {
  const Index n = reps.rows();
  const auto pool = detail::remaining_pool(n, init, seed_set);
  const Index rest = b - static_cast<Index>(init.size());
  if (rest < 0) throw Error("coreset: initial set larger than the budget");
  detail::check_budget(rest, static_cast<Index>(pool.size()), "coreset");

  std::vector<double> gap(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  auto absorb = [&](NodeId s) {
    for (NodeId v : pool) gap[v] = std::min(gap[v], distance(reps, v, reps, s));
  };
  for (NodeId s : init) absorb(s);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::vector<NodeId> out(init.begin(), init.end());
  for (Index step = 0; step < rest; ++step) {
    NodeId best = -1;
    for (NodeId v : pool) {
      if (!chosen[v] && (best < 0 || gap[v] > gap[best])) best = v;
    }
    chosen[best] = true;
    out.push_back(best);
    absorb(best);
  }
  return {std::move(out), "coreset", b};
}

// 1 / (1 + distance to own K-Means center).
inline std::vector<double> density_scores(const Matrix& reps, int clusters, Rng& rng) {
  const int k = static_cast<int>(std::min<Index>(clusters, reps.rows()));
  const KMeansResult km = kmeans(reps, k, rng);
  std::vector<double> score(static_cast<std::size_t>(reps.rows()));
  for (Index v = 0; v < reps.rows(); ++v) {
    score[v] = 1.0 / (1.0 + distance(reps, v, km.centers, km.assignment[v]));
  }
  return score;
}

inline SelectionResult density_select(const Matrix& reps, Index b, std::span<const NodeId> init, int clusters,
                                      Rng& rng, std::span<const NodeId> seed_set = {}) {
  const auto score = density_scores(reps, clusters, rng);
  const auto pool = detail::remaining_pool(reps.rows(), init, seed_set);
  return detail::init_plus_top(init, pool, score, b, "density");
}

// Softmax entropy of each logit row.
inline std::vector<double> prediction_entropy(const Matrix& logits) {
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    double h = 0.0;
    for (Index c = 0; c < e.size(); ++c) {
      const double p = e[c] / z;
      if (p > 0.0) h -= p * std::log(p);
    }
    out[i] = h;
  }
  return out;
}

inline SelectionResult uncertainty_select(const Matrix& logits, Index b, std::span<const NodeId> init,
                                          std::span<const NodeId> seed_set = {}) {
  const auto score = prediction_entropy(logits);
  const auto pool = detail::remaining_pool(logits.rows(), init, seed_set);
  return detail::init_plus_top(init, pool, score, b, "uncertainty");
}

// Fraction of the pool with a strictly smaller value, per pool member.
inline std::vector<double> pool_percentiles(std::span<const NodeId> pool, std::span<const double> value,
                                            Index n) {
  std::vector<double> sorted;
  sorted.reserve(pool.size());
  for (NodeId v : pool) sorted.push_back(value[v]);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (NodeId v : pool) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), value[v]) - sorted.begin();
    out[v] = static_cast<double>(below) / static_cast<double>(pool.size());
  }
  return out;
}

struct AgeSignals {
  std::span<const double> centrality;  // PageRank
  std::span<const double> density;
  std::span<const double> entropy;
};

// gamma * pct(centrality) + (1 - gamma)/2 * (pct(density) + pct(entropy)),
// percentiles taken over the candidate pool.
inline SelectionResult age_select(const AgeSignals& signals, Index b, std::span<const NodeId> init, double gamma,
                                  std::span<const NodeId> seed_set = {}) {
  if (gamma < 0.0 || gamma > 1.0) throw Error("age_select: gamma must lie in [0, 1]");
  const Index n = static_cast<Index>(signals.centrality.size());
  const auto pool = detail::remaining_pool(n, init, seed_set);
  const auto pc = pool_percentiles(pool, signals.centrality, n);
  const auto pd = pool_percentiles(pool, signals.density, n);
  const auto pe = pool_percentiles(pool, signals.entropy, n);
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  const double side = (1.0 - gamma) / 2.0;
  for (NodeId v : pool) score[v] = gamma * pc[v] + side * pd[v] + side * pe[v];
  return detail::init_plus_top(init, pool, score, b, "age");
}

// AGE's default centrality weight for the benchmark citation graphs.
inline double age_default_gamma(std::string_view dataset) {
  std::string lower(dataset);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "citeseer") return 0.3;
  if (lower == "cora") return 0.7;
  if (lower == "pubmed") return 0.9;
  return 0.8;
}

}  // namespace gal
