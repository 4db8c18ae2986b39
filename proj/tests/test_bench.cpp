#include "gal/bench.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace gal {
namespace {

struct Small {
  Dataset data;
  Partition part;
  BenchConfig cfg;

  Small() : data(Dataset::prepare("planted", testing::planted_clusters(60, 3, 0.3, 0.02, 1.0, 4, 3))) {
    part = choose_partition(data).partition;
    cfg.strategies = {"random", "graphpart", "coreset"};
    cfg.budgets = {6, 12};
    cfg.seeds = 3;
    cfg.strategy.train.epochs = 30;
    cfg.threads = 1;
  }
};

std::string results_text(const ExperimentReport& r) {
  std::ostringstream out;
  write_results_csv(out, r);
  return out.str();
}

std::string summary_text(const ExperimentReport& r) {
  std::ostringstream out;
  write_summary_csv(out, r);
  return out.str();
}

TEST(Bench, RowsInCellOrder) {
  Small s;
  const auto report = run_bench(s.data, s.part, s.cfg);
  ASSERT_EQ(report.rows.size(), 18u);
  std::size_t i = 0;
  for (const auto& st : s.cfg.strategies) {
    for (Index b : s.cfg.budgets) {
      for (int seed = 0; seed < 3; ++seed, ++i) {
        EXPECT_EQ(report.rows[i].strategy, st);
        EXPECT_EQ(report.rows[i].budget, b);
        EXPECT_EQ(report.rows[i].seed, seed);
        EXPECT_TRUE(report.rows[i].error.empty()) << report.rows[i].error;
        EXPECT_GE(report.rows[i].macro_f1, 0.0);
        EXPECT_LE(report.rows[i].macro_f1, 1.0);
        EXPECT_EQ(report.rows[i].wall_time_s, 0.0);
      }
    }
  }
  EXPECT_EQ(report.summary.size(), 6u);
}

TEST(Bench, OutputIsIndependentOfThreadCount) {
  Small s;
  const auto one = run_bench(s.data, s.part, s.cfg);
  s.cfg.threads = 3;
  const auto three = run_bench(s.data, s.part, s.cfg);
  EXPECT_EQ(results_text(one), results_text(three));
  EXPECT_EQ(summary_text(one), summary_text(three));
  EXPECT_EQ(results_text(one), results_text(run_bench(s.data, s.part, s.cfg)));
}

TEST(Bench, SummaryAggregatesRows) {
  Small s;
  const auto report = run_bench(s.data, s.part, s.cfg);
  for (const auto& row : report.summary) {
    std::vector<double> mine, ref;
    for (const auto& r : report.rows) {
      if (r.budget != row.budget) continue;
      if (r.strategy == row.strategy) mine.push_back(r.macro_f1);
      if (r.strategy == "graphpart") ref.push_back(r.macro_f1);
    }
    double mu = 0.0;
    for (double v : mine) mu += v;
    mu /= static_cast<double>(mine.size());
    double ss = 0.0;
    for (double v : mine) ss += (v - mu) * (v - mu);
    EXPECT_NEAR(row.mean_macro_f1, mu, 1e-12);
    EXPECT_NEAR(row.stderr_macro_f1, std::sqrt(ss / (mine.size() - 1)) / std::sqrt(double(mine.size())), 1e-12);
    if (row.strategy == "graphpart") {
      EXPECT_TRUE(row.p_degenerate);
      EXPECT_EQ(row.p_vs_reference, 1.0);
    } else {
      const auto t = paired_t_test(mine, ref);
      if (std::isnan(row.p_vs_reference)) {
        ADD_FAILURE() << "missing p-value";
      } else {
        EXPECT_NEAR(row.p_vs_reference, t.p_value, 1e-12);
      }
    }
  }
}

TEST(Bench, CsvLayout) {
  Small s;
  s.cfg.strategies = {"degree"};
  s.cfg.budgets = {5};
  s.cfg.seeds = 2;
  const auto report = run_bench(s.data, s.part, s.cfg);
  const std::string text = results_text(report);
  EXPECT_EQ(text.substr(0, text.find('\n')), "dataset,strategy,representation,budget,seed,macro_f1,micro_f1,wall_time_s");
  EXPECT_NE(text.find("\nplanted,degree,aggregation,5,0,"), std::string::npos);
  const std::string sum = summary_text(report);
  EXPECT_EQ(sum.substr(0, sum.find('\n')), "strategy,budget,mean_macro_f1,stderr_macro_f1,p_vs_reference");
  // no graphpart rows, so no reference
  EXPECT_NE(sum.find(",nan\n"), std::string::npos);
  std::istringstream in(text);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
  }
  EXPECT_EQ(lines, 3);
}

TEST(Bench, BadConfigurations) {
  Small s;
  s.cfg.strategies = {"seal"};
  EXPECT_THROW(run_bench(s.data, s.part, s.cfg), Error);
  s.cfg.strategies = {"random"};
  s.cfg.budgets = {61};
  EXPECT_THROW(run_bench(s.data, s.part, s.cfg), Error);
}

TEST(Bench, TimingIsOptIn) {
  Small s;
  s.cfg.strategies = {"graphpart"};
  s.cfg.budgets = {6};
  s.cfg.seeds = 1;
  s.cfg.record_time = true;
  EXPECT_GT(run_bench(s.data, s.part, s.cfg).rows[0].wall_time_s, 0.0);
}

TEST(Bench, DefaultBudgets) {
  EXPECT_EQ(default_budgets(2708), (std::vector<Index>{10, 20, 40, 80, 160}));
  EXPECT_EQ(default_budgets(169343), (std::vector<Index>{80, 160, 320, 640, 1280}));
}

TEST(Bench, TestOnlyScoring) {
  Small s;
  s.cfg.strategies = {"graphpart"};
  s.cfg.budgets = {60};
  s.cfg.seeds = 1;
  s.cfg.test_only = true;
  // every node trained: nothing left to score
  const auto r = run_bench(s.data, s.part, s.cfg);
  EXPECT_EQ(r.rows[0].micro_f1, 0.0);
}

}  // namespace
}  // namespace gal
