#pragma once

// Two-layer GCN, logits = S ReLU(S X W1) W2, trained full-batch with Adam on
// softmax cross-entropy plus coupled L2 weight decay. Gradients are written
// out by hand.

#include "gal/graph.hpp"

namespace gal {

struct TrainConfig {
  double learning_rate = 1e-2;
  double weight_decay = 5e-4;
  int epochs = 300;
  int hidden = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct GcnModel {
  Matrix w1;  // d x h
  Matrix w2;  // h x C
  int hidden = 0;
  std::uint64_t seed = 0;

  Index input_dim() const { return w1.rows(); }
  Index classes() const { return w2.cols(); }
};

// Propagation operator plus the pre-propagated input S X, kept sparse when X
// is sparse (bag-of-words citation features are). Building one per dataset
// lets every training run skip the first propagation.
class GcnInput {
 public:
  GcnInput(NormalizedAdjacency adjacency, const Matrix& x) : adj_(std::move(adjacency)) {
    if (adj_.size() != x.rows()) throw Error("GcnInput: adjacency and feature row counts differ");
    const Matrix sx = adj_.s * x;
    const Index nnz = (sx.array() != 0.0).count();
    const double density = sx.size() == 0 ? 1.0 : static_cast<double>(nnz) / static_cast<double>(sx.size());
    if (density < 0.25) {
      sparse_ = sx.sparseView(0.0, 0.0);
      sparse_.makeCompressed();
      is_sparse_ = true;
      dense_.resize(sx.rows(), sx.cols());  // shape only
    } else {
      dense_ = sx;
    }
    rows_ = sx.rows();
    cols_ = sx.cols();
  }

  const NormalizedAdjacency& adjacency() const noexcept { return adj_; }
  Index num_nodes() const noexcept { return rows_; }
  Index feature_dim() const noexcept { return cols_; }

  // (S X) W
  Matrix propagate_times(const Matrix& w) const {
    if (is_sparse_) return sparse_ * w;
    return dense_ * w;
  }

  // (S X)^T G
  Matrix propagate_transpose_times(const Matrix& grad) const {
    if (is_sparse_) return sparse_.transpose() * grad;
    return dense_.transpose() * grad;
  }

 private:
  NormalizedAdjacency adj_;
  bool is_sparse_ = false;
  SparseMatrix sparse_;
  Matrix dense_;
  Index rows_ = 0, cols_ = 0;
};

struct GcnActivations {
  Matrix pre_hidden;   // S X W1
  Matrix hidden;       // ReLU(S X W1)
  Matrix propagated;   // S hidden
  Matrix logits;       // propagated W2
};

inline GcnActivations gcn_activations(const GcnModel& model, const GcnInput& input) {
  if (model.w1.rows() != input.feature_dim()) {
    throw Error("gcn_forward: model expects " + std::to_string(model.w1.rows()) + " features, input has " +
                std::to_string(input.feature_dim()));
  }
  GcnActivations a;
  a.pre_hidden = input.propagate_times(model.w1);
  a.hidden = a.pre_hidden.cwiseMax(0.0);
  a.propagated = input.adjacency().s * a.hidden;
  a.logits = a.propagated * model.w2;
  if (!a.logits.allFinite()) throw Error("gcn_forward: non-finite logits");
  return a;
}

inline Matrix gcn_forward(const GcnModel& model, const GcnInput& input) {
  return gcn_activations(model, input).logits;
}

inline Matrix gcn_forward(const GcnModel& model, const NormalizedAdjacency& s, const Matrix& x) {
  return gcn_forward(model, GcnInput(s, x));
}

// Last hidden layer, ReLU(S X W1).
inline Matrix gcn_embedding(const GcnModel& model, const GcnInput& input) {
  return input.propagate_times(model.w1).cwiseMax(0.0);
}

inline GcnModel gcn_init(Index input_dim, int hidden, int classes, std::uint64_t seed) {
  Rng rng(seed);
  auto glorot = [&](Index rows, Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) w(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    }
    return w;
  };
  GcnModel m;
  m.hidden = hidden;
  m.seed = seed;
  m.w1 = glorot(input_dim, hidden);
  m.w2 = glorot(hidden, classes);
  return m;
}

struct LossAndGradient {
  double loss = 0.0;  // mean cross-entropy + weight_decay/2 * (|W1|^2 + |W2|^2)
  Matrix grad_w1;
  Matrix grad_w2;
};

inline LossAndGradient gcn_loss_and_gradient(const GcnModel& model, const GcnInput& input,
                                             std::span<const NodeId> train, std::span<const int> labels,
                                             double weight_decay) {
  if (train.empty()) throw Error("gcn training: empty training set");
  const GcnActivations a = gcn_activations(model, input);
  const Index n = a.logits.rows();
  const Index classes = a.logits.cols();
  const double scale = 1.0 / static_cast<double>(train.size());

  LossAndGradient out;
  Matrix d_logits = Matrix::Zero(n, classes);
  for (NodeId v : train) {
    const int y = labels[v];
    if (y < 0 || y >= classes) throw Error("gcn training: label out of range on node " + std::to_string(v));
    const double mx = a.logits.row(v).maxCoeff();
    const Eigen::RowVectorXd e = (a.logits.row(v).array() - mx).exp().matrix();
    const double z = e.sum();
    out.loss += scale * (std::log(z) - (a.logits(v, y) - mx));
    d_logits.row(v) = scale * e / z;
    d_logits(v, y) -= scale;
  }
  out.loss += 0.5 * weight_decay * (model.w1.squaredNorm() + model.w2.squaredNorm());

  out.grad_w2 = a.propagated.transpose() * d_logits + weight_decay * model.w2;
  const Matrix d_propagated = d_logits * model.w2.transpose();
  Matrix d_hidden = input.adjacency().s.transpose() * d_propagated;
  d_hidden.array() *= (a.pre_hidden.array() > 0.0).cast<double>();
  out.grad_w1 = input.propagate_transpose_times(d_hidden) + weight_decay * model.w1;
  return out;
}

struct TrainTrace {
  std::vector<double> loss;  // per epoch, before the update
};

// Fixed-epoch full-batch Adam; no validation, no early stopping. Deterministic
// in (input, train, labels, config, seed).
inline GcnModel gcn_train(const GcnInput& input, std::span<const NodeId> train, std::span<const int> labels,
                          int classes, const TrainConfig& cfg, std::uint64_t seed, TrainTrace* trace = nullptr) {
  if (train.empty()) throw Error("gcn_train: empty training set");
  GcnModel model = gcn_init(input.feature_dim(), cfg.hidden, classes, seed);
  Matrix m1 = Matrix::Zero(model.w1.rows(), model.w1.cols()), v1 = m1;
  Matrix m2 = Matrix::Zero(model.w2.rows(), model.w2.cols()), v2 = m2;

  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const LossAndGradient lg = gcn_loss_and_gradient(model, input, train, labels, cfg.weight_decay);
    if (!std::isfinite(lg.loss)) throw Error("gcn_train: non-finite loss at epoch " + std::to_string(epoch));
    if (trace) trace->loss.push_back(lg.loss);
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double step = cfg.learning_rate / (1.0 - b1t);
    const double root_correction = std::sqrt(1.0 - b2t);
    auto adam = [&](Matrix& w, Matrix& m, Matrix& v, const Matrix& g) {
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      w.array() -= step * m.array() / (v.array().sqrt() / root_correction + cfg.epsilon);
    };
    adam(model.w1, m1, v1, lg.grad_w1);
    adam(model.w2, m2, v2, lg.grad_w2);
    if (!model.w1.allFinite() || !model.w2.allFinite()) {
      throw Error("gcn_train: non-finite weights after epoch " + std::to_string(epoch));
    }
  }
  return model;
}

// Argmax per row; ties go to the lower class id.
inline std::vector<int> predict(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best;
    logits.row(i).maxCoeff(&best);
    out[i] = static_cast<int>(best);
  }
  return out;
}

// 1 iff logits[y] <= gamma + max_{c != y} logits[c].
inline int margin_loss(std::span<const double> logits, int y, double gamma) {
  if (y < 0 || y >= static_cast<int>(logits.size())) throw Error("margin_loss: label out of range");
  if (gamma < 0.0) throw Error("margin_loss: negative margin");
  double rival = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (static_cast<int>(c) != y) rival = std::max(rival, logits[c]);
  }
  return logits[y] <= gamma + rival ? 1 : 0;
}

// Unweighted mean of per-class F1 over classes [0, C); a class with no true
// and no predicted members scores 0.
inline double macro_f1(std::span<const int> pred, std::span<const int> truth, int classes) {
  if (pred.size() != truth.size()) throw Error("macro_f1: length mismatch");
  if (classes <= 0) throw Error("macro_f1: no classes");
  std::vector<Index> tp(static_cast<std::size_t>(classes), 0), fp = tp, fn = tp;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++tp[truth[i]];
    } else {
      if (pred[i] >= 0 && pred[i] < classes) ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  double sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    const Index denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom > 0) sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  return sum / classes;
}

// Accuracy.
inline double micro_f1(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw Error("micro_f1: length mismatch");
  if (pred.empty()) return 0.0;
  Index hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace gal
