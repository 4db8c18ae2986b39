#pragma once

// Dataset preparation, automatic partitioning and name-based dispatch over
// every query strategy, including the model-dependent baselines that first
// train a GCN on a random third of the budget.

#include "gal/gcn.hpp"
#include "gal/partition.hpp"
#include "gal/selection.hpp"

#include <array>
#include <memory>
#include <optional>

namespace gal {

inline constexpr std::array<std::string_view, 10> kStrategies = {
    "random", "degree", "pagerank", "density", "uncertainty", "coreset", "age", "featprop", "graphpart", "graphpartfar"};

inline bool is_known_strategy(std::string_view name) {
  return std::find(kStrategies.begin(), kStrategies.end(), name) != kStrategies.end();
}

// Everything derived once per dataset and shared by all selections and
// training runs.
struct Dataset {
  std::string name;
  AttributedGraph graph;
  Matrix aggregated;  // S^hops X
  std::shared_ptr<const GcnInput> gcn_input;

  static Dataset prepare(std::string name, AttributedGraph graph, int hops = 2) {
    Dataset d;
    d.name = std::move(name);
    NormalizedAdjacency s = normalized_adjacency(graph);
    d.aggregated = aggregate_features(s, graph.features(), hops);
    d.gcn_input = std::make_shared<const GcnInput>(std::move(s), graph.features());
    d.graph = std::move(graph);
    return d;
  }

  Index num_nodes() const { return graph.num_nodes(); }
};

struct PartitionChoice {
  Partition partition;
  MergeDendrogram dendrogram;
  std::vector<CostPoint> curve;  // empty when k was given
  ElbowResult elbow;
};

// k_max for the elbow curve is min(n, 100).
inline PartitionChoice choose_partition(const Dataset& data, std::optional<Index> k = std::nullopt) {
  PartitionChoice out;
  out.dendrogram = cnm_dendrogram(data.graph, data.aggregated);
  Index chosen;
  if (k) {
    chosen = *k;
  } else {
    const Index k_max = std::min<Index>(data.num_nodes(), 100);
    out.curve = cost_curve(out.dendrogram, data.aggregated, k_max);
    out.elbow = elbow_k(out.curve);
    chosen = out.elbow.k;
  }
  out.partition = partition_at_k(out.dendrogram, chosen);
  return out;
}

struct StrategyOptions {
  Representation representation = Representation::aggregation;
  std::optional<double> gamma;  // AGE; defaults by dataset name
  PenaltyScope far_scope = PenaltyScope::previous_partitions;
  TrainConfig train;
};

// Size of the random warm-start set for model-dependent strategies: b / 3,
// but at least one node so that a model can be trained.
inline Index warm_start_size(Index b) { return b <= 0 ? 0 : std::max<Index>(1, b / 3); }

namespace detail {

inline SelectionResult with_provenance(SelectionResult r, std::string_view strategy, Index b, std::uint64_t seed,
                                       Representation rep) {
  r.strategy = std::string(strategy);
  r.budget = b;
  r.seed = seed;
  r.representation = rep;
  return r;
}

}  // namespace detail

// Runs one strategy. `seed` drives every random choice and the init of any
// helper model. s0 is empty in the one-step setting.
inline SelectionResult run_strategy(std::string_view strategy, const Dataset& data, const Partition& partition,
                                    Index b, std::uint64_t seed, const StrategyOptions& options = {},
                                    std::span<const NodeId> seed_set = {}) {
  if (!is_known_strategy(strategy)) throw Error("unknown strategy '" + std::string(strategy) + "'");
  const Index n = data.num_nodes();
  Rng rng(seed);

  if (strategy == "random") {
    return detail::with_provenance(random_select(n, b, seed_set, rng), strategy, b, seed, options.representation);
  }
  if (strategy == "degree") {
    return detail::with_provenance(degree_select(data.graph, b, seed_set), strategy, b, seed, options.representation);
  }
  if (strategy == "pagerank") {
    return detail::with_provenance(pagerank_select(data.graph, b, seed_set), strategy, b, seed,
                                   options.representation);
  }

  const bool partitioned = strategy == "graphpart" || strategy == "graphpartfar" || strategy == "featprop";
  const bool needs_model = !partitioned || options.representation == Representation::embedding;

  std::vector<NodeId> init;
  std::optional<GcnModel> model;
  if (needs_model) {
    const auto& labels = data.graph.labels();
    init = random_select(n, warm_start_size(b), seed_set, rng).selected;
    model = gcn_train(*data.gcn_input, init, labels, data.graph.class_count(), options.train, seed);
  }

  if (partitioned) {
    const Matrix* space = &data.aggregated;
    Matrix embedding;
    if (options.representation == Representation::feature) space = &data.graph.features();
    if (options.representation == Representation::embedding) {
      embedding = gcn_embedding(*model, *data.gcn_input);
      space = &embedding;
    }
    std::vector<NodeId> excluded(seed_set.begin(), seed_set.end());
    excluded.insert(excluded.end(), init.begin(), init.end());
    const Index rest = b - static_cast<Index>(init.size());
    SelectionResult picked;
    if (strategy == "featprop") {
      picked = featprop_select(*space, rest, excluded, rng);
    } else if (strategy == "graphpart") {
      picked = graphpart_select(*space, partition, rest, excluded, rng);
    } else {
      picked = graphpartfar_select(*space, partition, rest, excluded, rng, options.far_scope);
    }
    std::vector<NodeId> out = init;
    out.insert(out.end(), picked.selected.begin(), picked.selected.end());
    picked.selected = std::move(out);
    return detail::with_provenance(std::move(picked), strategy, b, seed, options.representation);
  }

  const Matrix hidden = gcn_embedding(*model, *data.gcn_input);
  const int classes = data.graph.class_count();
  SelectionResult r;
  if (strategy == "coreset") {
    r = kcenter_greedy_select(hidden, b, init, seed_set);
  } else if (strategy == "density") {
    r = density_select(hidden, b, init, classes, rng, seed_set);
  } else if (strategy == "uncertainty") {
    r = uncertainty_select(gcn_forward(*model, *data.gcn_input), b, init, seed_set);
  } else {  // age
    const Vector pr = pagerank(data.graph);
    const std::vector<double> centrality(pr.data(), pr.data() + pr.size());
    const auto density = density_scores(hidden, classes, rng);
    const auto entropy = prediction_entropy(gcn_forward(*model, *data.gcn_input));
    const double gamma = options.gamma.value_or(age_default_gamma(data.name));
    r = age_select({centrality, density, entropy}, b, init, gamma, seed_set);
  }
  return detail::with_provenance(std::move(r), strategy, b, seed, options.representation);
}

}  // namespace gal
