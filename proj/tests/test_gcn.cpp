#include "gal/gcn.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace gal {
namespace {

struct Fixture {
  AttributedGraph g;
  NormalizedAdjacency s;
  GcnInput input;
  std::vector<NodeId> train;

  explicit Fixture(std::uint64_t seed, Index n = 12, Index d = 4, int classes = 3)
      : g(testing::random_graph(n, 0.3, d, classes, seed)), s(normalized_adjacency(g)), input(s, g.features()) {
    for (NodeId v = 0; v < n; v += 2) train.push_back(v);
  }
};

double loss_at(const GcnModel& m, const Fixture& f, double wd) {
  return gcn_loss_and_gradient(m, f.input, f.train, f.g.labels(), wd).loss;
}

TEST(Gcn, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Fixture f(seed);
    GcnModel m = gcn_init(f.g.feature_dim(), 5, f.g.class_count(), seed);
    const double wd = 5e-4;
    const auto lg = gcn_loss_and_gradient(m, f.input, f.train, f.g.labels(), wd);
    const double h = 1e-6;
    auto check = [&](Matrix& w, const Matrix& grad) {
      for (Index i = 0; i < w.rows(); ++i) {
        for (Index j = 0; j < w.cols(); ++j) {
          const double keep = w(i, j);
          w(i, j) = keep + h;
          const double up = loss_at(m, f, wd);
          w(i, j) = keep - h;
          const double down = loss_at(m, f, wd);
          w(i, j) = keep;
          const double numeric = (up - down) / (2 * h);
          const double scale = std::max({std::abs(numeric), std::abs(grad(i, j)), 1e-6});
          EXPECT_LT(std::abs(numeric - grad(i, j)) / scale, 1e-4) << "seed " << seed << " (" << i << "," << j << ")";
        }
      }
    };
    check(m.w1, lg.grad_w1);
    check(m.w2, lg.grad_w2);
  }
}

TEST(Gcn, ZeroWeightsGiveUniformPrediction) {
  Fixture f(1);
  GcnModel m;
  m.w1 = Matrix::Zero(f.g.feature_dim(), 8);
  m.w2 = Matrix::Zero(8, 3);
  const Matrix logits = gcn_forward(m, f.input);
  EXPECT_EQ(logits, Matrix::Zero(12, 3));
  EXPECT_NEAR(loss_at(m, f, 5e-4), std::log(3.0), 1e-15);
  EXPECT_EQ(predict(logits), std::vector<int>(12, 0));
}

TEST(Gcn, ForwardMatchesDenseFormula) {
  Fixture f(2);
  const GcnModel m = gcn_init(f.g.feature_dim(), 6, 3, 9);
  const Matrix s = Matrix(f.s.s);
  const Matrix expected = s * (s * f.g.features() * m.w1).cwiseMax(0.0) * m.w2;
  EXPECT_LE((gcn_forward(m, f.input) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((gcn_forward(m, f.s, f.g.features()) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((gcn_embedding(m, f.input) - (s * f.g.features() * m.w1).cwiseMax(0.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gcn, SparseInputPathAgreesWithDense) {
  auto g = testing::random_graph(30, 0.1, 20, 3, 4);
  Matrix x = Matrix::Zero(30, 20);
  for (Index i = 0; i < 30; ++i) x(i, i % 20) = 1.0;  // one word per document
  const auto s = normalized_adjacency(g);
  const GcnInput input(s, x);
  const GcnModel m = gcn_init(20, 4, 3, 1);
  const Matrix sd = Matrix(s.s);
  const Matrix expected = sd * (sd * x * m.w1).cwiseMax(0.0) * m.w2;
  EXPECT_LE((gcn_forward(m, input) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gcn, GlorotInitBoundsAndDeterminism) {
  const GcnModel a = gcn_init(100, 16, 7, 3);
  const GcnModel b = gcn_init(100, 16, 7, 3);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.w2, b.w2);
  EXPECT_LE(a.w1.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 116.0));
  EXPECT_LE(a.w2.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 23.0));
  EXPECT_NE(a.w1, gcn_init(100, 16, 7, 4).w1);
}

// The first Adam step with bias correction moves every weight by lr * g / (|g| + eps).
TEST(Gcn, FirstAdamStep) {
  Fixture f(3);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.hidden = 5;
  const GcnModel start = gcn_init(f.g.feature_dim(), 5, 3, 11);
  const auto lg = gcn_loss_and_gradient(start, f.input, f.train, f.g.labels(), cfg.weight_decay);
  const GcnModel after = gcn_train(f.input, f.train, f.g.labels(), 3, cfg, 11);
  const Matrix step1 = cfg.learning_rate * lg.grad_w1.array() / (lg.grad_w1.array().abs() + cfg.epsilon);
  const Matrix step2 = cfg.learning_rate * lg.grad_w2.array() / (lg.grad_w2.array().abs() + cfg.epsilon);
  EXPECT_LE((start.w1 - step1 - after.w1).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((start.w2 - step2 - after.w2).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gcn, TrainingIsDeterministicAndLowersLoss) {
  Fixture f(4, 40, 6, 3);
  TrainConfig cfg;
  cfg.epochs = 100;
  TrainTrace trace;
  const GcnModel a = gcn_train(f.input, f.train, f.g.labels(), 3, cfg, 7, &trace);
  const GcnModel b = gcn_train(f.input, f.train, f.g.labels(), 3, cfg, 7);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.w2, b.w2);
  ASSERT_EQ(trace.loss.size(), 100u);
  EXPECT_LT(trace.loss.back(), 0.8 * trace.loss.front());
  EXPECT_NE(gcn_train(f.input, f.train, f.g.labels(), 3, cfg, 8).w1, a.w1);
}

TEST(Gcn, FitsSeparableData) {
  const auto base = testing::two_triangles();
  Matrix x(6, 2);
  x << 1, 0, 1, 0.1, 0.9, 0, 0, 1, 0.1, 1, 0, 0.9;
  const auto g = base.with_features(x);
  const GcnInput input(normalized_adjacency(g), x);
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.epochs = 500;
  const std::vector<NodeId> train{0, 1, 2, 3, 4, 5};
  TrainTrace trace;
  const auto m = gcn_train(input, train, g.labels(), 2, cfg, 0, &trace);
  const double final_loss = gcn_loss_and_gradient(m, input, train, g.labels(), 0.0).loss;
  EXPECT_LT(final_loss, 0.01);
  EXPECT_EQ(predict(gcn_forward(m, input)), g.labels());
}

// Relabelling the nodes permutes the logits and changes nothing else.
TEST(Gcn, PermutationEquivariance) {
  const auto g = testing::random_graph(25, 0.2, 5, 3, 21);
  std::vector<NodeId> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  std::vector<Edge> edges;
  for (Index u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) edges.emplace_back(perm[u], perm[v]);
    }
  }
  Matrix x(25, 5);
  for (Index i = 0; i < 25; ++i) x.row(perm[i]) = g.features().row(i);
  const auto h = AttributedGraph::from_edges(25, edges, x);
  const GcnModel m = gcn_init(5, 8, 3, 2);
  const Matrix a = gcn_forward(m, GcnInput(normalized_adjacency(g), g.features()));
  const Matrix b = gcn_forward(m, GcnInput(normalized_adjacency(h), x));
  for (Index i = 0; i < 25; ++i) EXPECT_LE((a.row(i) - b.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gcn, LossFallsOverFirstEpochsOnSeparableData) {
  const auto base = testing::two_triangles();
  Matrix x(6, 2);
  x << 1, 0, 1, 0.1, 0.9, 0, 0, 1, 0.1, 1, 0, 0.9;
  const GcnInput input(normalized_adjacency(base), x);
  TrainConfig cfg;
  cfg.epochs = 10;
  TrainTrace trace;
  gcn_train(input, std::vector<NodeId>{0, 3}, base.labels(), 2, cfg, 1, &trace);
  ASSERT_EQ(trace.loss.size(), 10u);
  for (std::size_t e = 1; e < trace.loss.size(); ++e) EXPECT_LT(trace.loss[e], trace.loss[e - 1]) << "epoch " << e;
}

TEST(Gcn, RejectsBadInput) {
  Fixture f(5);
  TrainConfig cfg;
  EXPECT_THROW(gcn_train(f.input, std::vector<NodeId>{}, f.g.labels(), 3, cfg, 0), Error);
  const GcnModel m = gcn_init(f.g.feature_dim() + 1, 4, 3, 0);
  EXPECT_THROW(gcn_forward(m, f.input), Error);
  std::vector<int> bad = f.g.labels();
  bad[0] = 5;
  EXPECT_THROW(gcn_train(f.input, f.train, bad, 3, cfg, 0), Error);
}

TEST(Metrics, MarginLoss) {
  const std::vector<double> l{2.0, 1.0};
  EXPECT_EQ(margin_loss(l, 0, 0.0), 0);
  EXPECT_EQ(margin_loss(l, 0, 0.5), 0);
  EXPECT_EQ(margin_loss(l, 0, 1.0), 1);
  EXPECT_EQ(margin_loss(l, 1, 0.0), 1);
  EXPECT_EQ(margin_loss(std::vector<double>{1.0, 1.0}, 0, 0.0), 1);
  EXPECT_THROW(margin_loss(l, 2, 0.0), Error);
  EXPECT_THROW(margin_loss(l, 0, -1.0), Error);
}

TEST(Metrics, F1Scores) {
  const std::vector<int> pred{0, 0, 1, 1}, truth{0, 1, 1, 1};
  EXPECT_NEAR(macro_f1(pred, truth, 2), (2.0 / 3.0 + 0.8) / 2.0, 1e-15);
  EXPECT_EQ(micro_f1(pred, truth), 0.75);
  // class 2 never occurs and is never predicted
  EXPECT_NEAR(macro_f1(pred, truth, 3), (2.0 / 3.0 + 0.8) / 3.0, 1e-15);
  EXPECT_EQ(macro_f1(truth, truth, 2), 1.0);
  const std::vector<int> wrong{1, 0, 0, 0};
  EXPECT_EQ(macro_f1(wrong, truth, 2), 0.0);
  EXPECT_THROW(macro_f1(pred, std::vector<int>{0}, 2), Error);
}

TEST(Metrics, PredictTiesToLowerClass) {
  Matrix logits(2, 3);
  logits << 1, 1, 0, 0, 2, 2;
  EXPECT_EQ(predict(logits), (std::vector<int>{0, 1}));
}

}  // namespace
}  // namespace gal
