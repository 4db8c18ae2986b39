#pragma once

// Budget sweeps: every (strategy, budget, seed) cell selects, trains a GCN
// and scores it; cells run on a bounded worker pool and are emitted in a
// fixed order so output does not depend on scheduling.

#include "gal/stats.hpp"
#include "gal/strategy.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <map>
#include <ostream>
#include <thread>

namespace gal {

struct BenchConfig {
  std::vector<std::string> strategies;
  std::vector<Index> budgets;
  int seeds = 10;
  std::string reference = "graphpart";
  StrategyOptions strategy;
  bool test_only = false;   // score only nodes outside the training set
  bool record_time = false; // otherwise wall_time_s is written as 0
  int threads = 0;          // 0: GAL_THREADS or hardware concurrency
};

struct ResultRow {
  std::string dataset;
  std::string strategy;
  Representation representation = Representation::aggregation;
  Index budget = 0;
  int seed = 0;
  double macro_f1 = std::numeric_limits<double>::quiet_NaN();
  double micro_f1 = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
  std::string error;
};

struct SummaryRow {
  std::string strategy;
  Index budget = 0;
  double mean_macro_f1 = 0.0;
  double stderr_macro_f1 = 0.0;
  double p_vs_reference = std::numeric_limits<double>::quiet_NaN();
  bool p_degenerate = false;
};

struct ExperimentReport {
  std::vector<ResultRow> rows;  // sorted by (strategy order, budget, seed)
  std::vector<SummaryRow> summary;
};

inline std::vector<Index> default_budgets(Index n) {
  const Index scale = n > 50000 ? 8 : 1;  // 2^{3..7} x 10 on large graphs
  std::vector<Index> out;
  for (int p = 0; p < 5; ++p) out.push_back(10 * scale * (Index{1} << p));
  return out;
}

inline int worker_count(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("GAL_THREADS"); env && *env) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

struct CellScore {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

// Trains the evaluation GCN on `train` with `seed` and scores it over all
// nodes (or only the non-training ones).
inline CellScore evaluate_selection(const Dataset& data, std::span<const NodeId> train, std::uint64_t seed,
                                    const TrainConfig& cfg, bool test_only) {
  const auto& labels = data.graph.labels();
  const GcnModel model = gcn_train(*data.gcn_input, train, labels, data.graph.class_count(), cfg, seed);
  const auto pred = predict(gcn_forward(model, *data.gcn_input));
  if (!test_only) {
    return {macro_f1(pred, labels, data.graph.class_count()), micro_f1(pred, labels)};
  }
  std::vector<bool> in_train(labels.size(), false);
  for (NodeId t : train) in_train[t] = true;
  std::vector<int> p, y;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (in_train[i]) continue;
    p.push_back(pred[i]);
    y.push_back(labels[i]);
  }
  return {macro_f1(p, y, data.graph.class_count()), micro_f1(p, y)};
}

inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, const std::vector<std::string>& strategies,
                                         const std::vector<Index>& budgets, const std::string& reference) {
  std::map<std::pair<std::string, Index>, std::map<int, double>> scores;
  for (const auto& r : rows) {
    if (r.error.empty()) scores[{r.strategy, r.budget}][r.seed] = r.macro_f1;
  }
  std::vector<SummaryRow> out;
  for (const auto& s : strategies) {
    for (Index b : budgets) {
      SummaryRow row;
      row.strategy = s;
      row.budget = b;
      const auto& mine = scores[{s, b}];
      std::vector<double> values;
      for (const auto& [seed, v] : mine) values.push_back(v);
      if (values.empty()) {
        row.mean_macro_f1 = row.stderr_macro_f1 = std::numeric_limits<double>::quiet_NaN();
        out.push_back(row);
        continue;
      }
      row.mean_macro_f1 = mean(values);
      row.stderr_macro_f1 = standard_error(values);
      const auto ref = scores.find({reference, b});
      if (ref != scores.end()) {
        std::vector<double> a, c;
        for (const auto& [seed, v] : mine) {
          if (auto it = ref->second.find(seed); it != ref->second.end()) {
            a.push_back(v);
            c.push_back(it->second);
          }
        }
        if (a.size() >= 2) {
          const auto t = paired_t_test(a, c);
          row.p_vs_reference = t.p_value;
          row.p_degenerate = t.degenerate;
        }
      }
      out.push_back(row);
    }
  }
  return out;
}

inline ExperimentReport run_bench(const Dataset& data, const Partition& partition, const BenchConfig& cfg) {
  struct Cell {
    std::size_t strategy_index;
    Index budget;
    int seed;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    if (!is_known_strategy(cfg.strategies[s])) throw Error("unknown strategy '" + cfg.strategies[s] + "'");
    for (Index b : cfg.budgets) {
      if (b > data.num_nodes()) throw Error("budget " + std::to_string(b) + " exceeds node count");
      for (int seed = 0; seed < cfg.seeds; ++seed) cells.push_back({s, b, seed});
    }
  }

  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      ResultRow& row = rows[i];
      row.dataset = data.name;
      row.strategy = cfg.strategies[c.strategy_index];
      row.representation = cfg.strategy.representation;
      row.budget = c.budget;
      row.seed = c.seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto sel = run_strategy(row.strategy, data, partition, c.budget, static_cast<std::uint64_t>(c.seed),
                                      cfg.strategy);
        const auto score = evaluate_selection(data, sel.selected, static_cast<std::uint64_t>(c.seed),
                                              cfg.strategy.train, cfg.test_only);
        row.macro_f1 = score.macro_f1;
        row.micro_f1 = score.micro_f1;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (cfg.record_time) {
        row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
  };
  const int workers = std::min<int>(worker_count(cfg.threads), static_cast<int>(std::max<std::size_t>(1, cells.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExperimentReport report;
  report.rows = std::move(rows);
  report.summary = summarize(report.rows, cfg.strategies, cfg.budgets, cfg.reference);
  return report;
}

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline void write_results_csv(std::ostream& out, const ExperimentReport& report) {
  out << "dataset,strategy,representation,budget,seed,macro_f1,micro_f1,wall_time_s\n";
  for (const auto& r : report.rows) {
    out << r.dataset << ',' << r.strategy << ',' << to_string(r.representation) << ',' << r.budget << ',' << r.seed
        << ',' << detail::csv_number(r.macro_f1) << ',' << detail::csv_number(r.micro_f1) << ','
        << detail::csv_number(r.wall_time_s) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "strategy,budget,mean_macro_f1,stderr_macro_f1,p_vs_reference\n";
  for (const auto& s : report.summary) {
    out << s.strategy << ',' << s.budget << ',' << detail::csv_number(s.mean_macro_f1) << ','
        << detail::csv_number(s.stderr_macro_f1) << ',' << detail::csv_number(s.p_vs_reference) << '\n';
  }
}

}  // namespace gal
