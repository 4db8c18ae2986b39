// gal: command line front end for graph active learning experiments.

#include "gal/analysis.hpp"
#include "gal/bench.hpp"
#include "gal/graph_io.hpp"
#include "gal/strategy.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace gal;
using nlohmann::json;

struct DataOptions {
  std::string dir;
  std::string name;  // defaults to the directory name
  int hops = 2;
  bool row_normalize = false;

  void attach(CLI::App* app) {
    app->add_option("--data", dir, "dataset directory (edges.tsv, features.csv, labels.csv)")->required();
    app->add_option("--name", name, "dataset name used in outputs and for AGE defaults");
    app->add_option("--hops", hops, "propagation hops for aggregated features")->check(CLI::NonNegativeNumber);
    app->add_flag("--row-normalize", row_normalize, "scale feature rows to unit L1 norm first");
  }

  Dataset load() const {
    AttributedGraph g = load_generic(dir);
    if (row_normalize) g = g.with_features(gal::row_normalize(g.features()));
    std::string label = name;
    if (label.empty()) {
      auto p = std::filesystem::path(dir);
      label = (p.has_filename() ? p.filename() : p.parent_path().filename()).string();
    }
    return Dataset::prepare(label, std::move(g), hops);
  }
};

// --k auto|<int>
struct PartitionOptions {
  std::string k = "auto";
  std::string file;

  void attach(CLI::App* app, bool allow_file) {
    app->add_option("--k", k, "number of parts, or auto for the elbow rule");
    if (allow_file) app->add_option("--partition", file, "partitions.json from the partition command");
  }

  std::optional<Index> fixed_k() const {
    if (k == "auto") return std::nullopt;
    Index v = 0;
    auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), v);
    if (ec != std::errc() || ptr != k.data() + k.size() || v < 1) throw Error("--k expects 'auto' or a positive integer");
    return v;
  }

  Partition resolve(const Dataset& data) const {
    if (!file.empty()) return read_partition(file, data.num_nodes());
    return choose_partition(data, fixed_k()).partition;
  }

  static Partition read_partition(const std::string& path, Index n) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(path + ": " + e.what());
    }
    Partition p;
    p.k = j.at("k").get<int>();
    p.modularity = j.value("modularity", 0.0);
    p.assignment = j.at("assignment").get<std::vector<int>>();
    if (static_cast<Index>(p.assignment.size()) != n) throw Error(path + ": assignment does not cover every node");
    for (int a : p.assignment) {
      if (a < 0 || a >= p.k) throw Error(path + ": part id outside [0, k)");
    }
    return p;
  }
};

std::vector<NodeId> read_nodes(const std::string& path, Index n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<NodeId> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream tok(line);
    long long v;
    if (!(tok >> v) || v < 0 || v >= n) throw ParseError(path, lineno, "expected a node id in [0, " + std::to_string(n) + ")");
    out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct TrainOptions {
  TrainConfig cfg;

  void attach(CLI::App* app) {
    app->add_option("--epochs", cfg.epochs, "training epochs")->check(CLI::PositiveNumber);
    app->add_option("--hidden", cfg.hidden, "hidden width")->check(CLI::PositiveNumber);
    app->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    app->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph active learning: partition-based selection, baselines and benchmarks"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "convert raw citation files to the generic format");
  std::string content, cites, ingest_out;
  ingest->add_option("--content", content, "<paper_id> <features...> <label> file")->required();
  ingest->add_option("--cites", cites, "<cited> <citing> file")->required();
  ingest->add_option("--out", ingest_out, "output directory")->required();

  // partition
  auto* part_cmd = app.add_subcommand("partition", "CNM partition with K from the elbow rule or --k");
  DataOptions part_data;
  PartitionOptions part_opts;
  std::string part_out = "partitions.json";
  part_data.attach(part_cmd);
  part_opts.attach(part_cmd, false);
  part_cmd->add_option("--out", part_out, "output JSON");

  // select
  auto* select = app.add_subcommand("select", "choose nodes to label");
  DataOptions sel_data;
  PartitionOptions sel_part;
  TrainOptions sel_train;
  std::string strategy, representation = "aggregation", sel_out = "selected.txt", far_scope = "previous", seed_file;
  Index budget = 0;
  std::uint64_t seed = 0;
  std::optional<double> gamma;
  sel_data.attach(select);
  sel_part.attach(select, true);
  sel_train.attach(select);
  select->add_option("--strategy", strategy)->required()->check(CLI::IsMember(std::vector<std::string>(kStrategies.begin(), kStrategies.end())));
  select->add_option("--budget", budget)->required()->check(CLI::NonNegativeNumber);
  select->add_option("--seed", seed);
  select->add_option("--representation", representation)->check(CLI::IsMember({"aggregation", "embedding", "feature"}));
  select->add_option("--gamma", gamma, "AGE centrality weight")->check(CLI::Range(0.0, 1.0));
  select->add_option("--far-scope", far_scope, "GraphPartFar penalty: previous or all")->check(CLI::IsMember({"previous", "all"}));
  select->add_option("--seed-set", seed_file, "already labeled nodes to exclude");
  select->add_option("--out", sel_out);

  // train
  auto* train = app.add_subcommand("train", "train the GCN on a labeled set and report F1");
  DataOptions tr_data;
  TrainOptions tr_opts;
  std::string tr_nodes, tr_out = "model.json";
  std::uint64_t tr_seed = 0;
  bool tr_test_only = false;
  tr_data.attach(train);
  tr_opts.attach(train);
  train->add_option("--train", tr_nodes, "selected.txt")->required();
  train->add_option("--seed", tr_seed);
  train->add_flag("--test-only", tr_test_only, "score only nodes outside the training set");
  train->add_option("--out", tr_out);

  // bench
  auto* bench = app.add_subcommand("bench", "budget sweep over strategies and seeds");
  DataOptions b_data;
  PartitionOptions b_part;
  TrainOptions b_train;
  std::string b_strategies = "random,featprop,graphpart", b_budgets, b_rep = "aggregation", b_out = ".",
              b_reference = "graphpart";
  int b_seeds = 10, b_threads = 0;
  bool b_timing = false, b_test_only = false;
  std::optional<double> b_gamma;
  b_data.attach(bench);
  b_part.attach(bench, true);
  b_train.attach(bench);
  bench->add_option("--strategies", b_strategies, "comma separated; 'all' for every strategy");
  bench->add_option("--budgets", b_budgets, "comma separated; default 10..160 (x8 above 50k nodes)");
  bench->add_option("--seeds", b_seeds)->check(CLI::PositiveNumber);
  bench->add_option("--reference", b_reference, "strategy the t-tests compare against");
  bench->add_option("--representation", b_rep)->check(CLI::IsMember({"aggregation", "embedding", "feature"}));
  bench->add_option("--gamma", b_gamma)->check(CLI::Range(0.0, 1.0));
  bench->add_option("--threads", b_threads, "worker count (default GAL_THREADS, else all cores)");
  bench->add_flag("--timing", b_timing, "record wall_time_s (makes results.csv run dependent)");
  bench->add_flag("--test-only", b_test_only, "score only nodes outside the training set");
  bench->add_option("--out-dir", b_out, "where results.csv and summary.csv go");

  // disparity
  auto* disparity = app.add_subcommand("disparity", "test accuracy by distance to the training set");
  DataOptions d_data;
  TrainOptions d_train;
  std::string d_nodes, d_out = "disparity.csv";
  std::uint64_t d_seed = 0;
  int d_bins = 10;
  d_data.attach(disparity);
  d_train.attach(disparity);
  disparity->add_option("--train", d_nodes)->required();
  disparity->add_option("--seed", d_seed);
  disparity->add_option("--bins", d_bins)->check(CLI::PositiveNumber);
  disparity->add_option("--out", d_out);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "per-node Lipschitz bound check for an MLP head on S^L X");
  DataOptions bd_data;
  PartitionOptions bd_part;
  TrainOptions bd_train;
  std::string bd_nodes, bd_out = "bounds.csv";
  std::uint64_t bd_seed = 0;
  bd_data.attach(bounds);
  bd_part.attach(bounds, true);
  bd_train.attach(bounds);
  bounds->add_option("--train", bd_nodes)->required();
  bounds->add_option("--seed", bd_seed);
  bounds->add_option("--out", bd_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto in = ingest_cora_content(content, cites);
      write_generic(in.graph, ingest_out);
      std::cout << "nodes " << in.graph.num_nodes() << "\nedges " << in.graph.num_edges() << "\nfeatures "
                << in.graph.feature_dim() << "\nclasses " << in.graph.class_count() << "\nhomophily "
                << homophily_ratio(in.graph) << '\n';
      if (in.dangling_edges) std::cerr << "warning: skipped " << in.dangling_edges << " citations to unknown papers\n";
      return 0;
    }

    if (*part_cmd) {
      const Dataset data = part_data.load();
      const auto choice = choose_partition(data, part_opts.fixed_k());
      json j = {{"k", choice.partition.k},
                {"modularity", choice.partition.modularity},
                {"assignment", choice.partition.assignment}};
      open_out(part_out) << j.dump() << '\n';
      std::cout << "k " << choice.partition.k << "\nmodularity " << choice.partition.modularity << '\n';
      if (choice.elbow.degenerate) std::cerr << "warning: flat cost curve, elbow fell back to k = " << choice.elbow.k << '\n';
      return 0;
    }

    if (*select) {
      const Dataset data = sel_data.load();
      StrategyOptions opt;
      opt.representation = parse_representation(representation);
      opt.gamma = gamma;
      opt.far_scope = far_scope == "all" ? PenaltyScope::all_selected : PenaltyScope::previous_partitions;
      opt.train = sel_train.cfg;
      const std::vector<NodeId> seed_set = seed_file.empty() ? std::vector<NodeId>{} : read_nodes(seed_file, data.num_nodes());
      const bool partitioned = strategy == "graphpart" || strategy == "graphpartfar";
      const Partition partition = partitioned ? sel_part.resolve(data) : single_partition(data.num_nodes());
      const auto result = run_strategy(strategy, data, partition, budget, seed, opt, seed_set);
      auto out = open_out(sel_out);
      for (NodeId v : result.selected) out << v << '\n';
      return 0;
    }

    if (*train) {
      const Dataset data = tr_data.load();
      const auto nodes = read_nodes(tr_nodes, data.num_nodes());
      const auto score = evaluate_selection(data, nodes, tr_seed, tr_opts.cfg, tr_test_only);
      // same inputs and seed as the scored run, so this is the scored model
      const GcnModel m = gcn_train(*data.gcn_input, nodes, data.graph.labels(), data.graph.class_count(), tr_opts.cfg, tr_seed);
      json j = {{"w1", matrix_json(m.w1)}, {"w2", matrix_json(m.w2)}, {"hidden", m.hidden}, {"seed", m.seed}};
      open_out(tr_out) << j.dump() << '\n';
      std::cout << "macro_f1 " << score.macro_f1 << "\nmicro_f1 " << score.micro_f1 << '\n';
      return 0;
    }

    if (*bench) {
      const Dataset data = b_data.load();
      BenchConfig cfg;
      cfg.strategies = b_strategies == "all" ? std::vector<std::string>(kStrategies.begin(), kStrategies.end())
                                             : split_list(b_strategies);
      if (b_budgets.empty()) {
        cfg.budgets = default_budgets(data.num_nodes());
      } else {
        for (const auto& s : split_list(b_budgets)) cfg.budgets.push_back(std::stoll(s));
      }
      cfg.seeds = b_seeds;
      cfg.reference = b_reference;
      cfg.strategy.representation = parse_representation(b_rep);
      cfg.strategy.gamma = b_gamma;
      cfg.strategy.train = b_train.cfg;
      cfg.record_time = b_timing;
      cfg.test_only = b_test_only;
      cfg.threads = b_threads;
      const Partition partition = b_part.resolve(data);
      const auto report = run_bench(data, partition, cfg);
      const std::filesystem::path dir(b_out);
      auto results = open_out(dir / "results.csv");
      write_results_csv(results, report);
      auto summary = open_out(dir / "summary.csv");
      write_summary_csv(summary, report);
      int failures = 0;
      for (const auto& r : report.rows) {
        if (!r.error.empty()) {
          ++failures;
          std::cerr << "cell " << r.strategy << " b=" << r.budget << " seed=" << r.seed << ": " << r.error << '\n';
        }
      }
      std::cout << "k " << partition.k << "\ncells " << report.rows.size() << "\nfailed " << failures << '\n';
      return failures ? 2 : 0;
    }

    if (*disparity) {
      const Dataset data = d_data.load();
      const auto nodes = read_nodes(d_nodes, data.num_nodes());
      const GcnModel m = gcn_train(*data.gcn_input, nodes, data.graph.labels(), data.graph.class_count(), d_train.cfg, d_seed);
      const auto pred = predict(gcn_forward(m, *data.gcn_input));
      const auto table = disparity_analysis(pred, data.graph.labels(), data.aggregated, nodes, d_bins);
      auto out = open_out(d_out);
      out << "bin_index,bin_lo_dist,bin_hi_dist,count,accuracy\n";
      for (const auto& b : table.bins) {
        out << b.index << ',' << detail::csv_number(b.lo_distance) << ',' << detail::csv_number(b.hi_distance) << ','
            << b.count << ',' << detail::csv_number(b.accuracy) << '\n';
      }
      std::cout << "spread " << table.spread() << '\n';
      return 0;
    }

    if (*bounds) {
      const Dataset data = bd_data.load();
      const auto nodes = read_nodes(bd_nodes, data.num_nodes());
      const Partition partition = bd_part.resolve(data);
      const MlpHead head =
          train_mlp_head(data.aggregated, nodes, data.graph.labels(), data.graph.class_count(), bd_train.cfg, bd_seed);
      const auto diag = bound_diagnostics(head, data.aggregated, partition, nodes);
      auto out = open_out(bd_out);
      out << "node,tau,epsilon,gamma,lhs,rhs,covered\n";
      for (const auto& b : diag.nodes) {
        out << b.node << ',' << b.tau << ',' << detail::csv_number(b.epsilon) << ',' << detail::csv_number(b.gamma)
            << ',' << detail::csv_number(b.lhs) << ',' << detail::csv_number(b.rhs) << ',' << (b.covered ? 1 : 0)
            << '\n';
      }
      const GcnModel gcn = gcn_train(*data.gcn_input, nodes, data.graph.labels(), data.graph.class_count(), bd_train.cfg, bd_seed);
      std::cout << "lipschitz " << diag.lipschitz << "\nlipschitz_power " << spectral_norm_power(head.w1) * spectral_norm_power(head.w2)
                << "\ncovered " << diag.covered_count() << "\nviolations " << diag.violations
                << "\ngcn_observed_ratio "
                << observed_gcn_ratio(gcn_forward(gcn, *data.gcn_input), data.aggregated, partition, nodes) << '\n';
      return diag.violations ? 3 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "gal: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
