#pragma once

// Lloyd K-Means with K-Means++ seeding.

#include "gal/core.hpp"

namespace gal {

struct KMeansOptions {
  int max_iterations = 300;
  double tolerance = 1e-6;  // stop once no center moves farther than this
};

struct KMeansResult {
  Matrix centers;
  std::vector<int> assignment;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Squared distances from every point to every center, n x k.
inline Matrix pairwise_squared(const Matrix& points, const Matrix& centers) {
  Matrix d = -2.0 * (points * centers.transpose());
  const Vector pn = points.rowwise().squaredNorm();
  const Vector cn = centers.rowwise().squaredNorm();
  d.colwise() += pn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

}  // namespace detail

// D^2 sampling: the first center is uniform, each later one is drawn with
// probability proportional to its squared distance to the nearest chosen
// center. When every remaining distance is zero the lowest-index point not yet
// used as a center is taken.
inline Matrix kmeans_plus_plus(const Matrix& points, int k, Rng& rng) {
  const Index n = points.rows();
  if (k < 1 || k > n) throw Error("kmeans_plus_plus: k = " + std::to_string(k) + " with " + std::to_string(n) + " points");
  Matrix centers(k, points.cols());
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = points.row(first);
  used[first] = true;
  Vector closest(n);
  for (Index i = 0; i < n; ++i) closest[i] = squared_distance(points, i, centers, 0);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += closest[i];
    Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += closest[i];
        if (closest[i] > 0.0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // rounding left target at the very end
        for (Index i = n - 1; i >= 0; --i) {
          if (closest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      for (Index i = 0; i < n; ++i) {
        if (!used[i]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = points.row(pick);
    used[pick] = true;
    for (Index i = 0; i < n; ++i) closest[i] = std::min(closest[i], squared_distance(points, i, centers, c));
  }
  return centers;
}

// Empty clusters are re-seeded at the point farthest from its current
// center (ties: lowest index).
inline KMeansResult kmeans(const Matrix& points, int k, Rng& rng, const KMeansOptions& options = {}) {
  const Index n = points.rows();
  KMeansResult result;
  result.centers = kmeans_plus_plus(points, k, rng);
  result.assignment.assign(static_cast<std::size_t>(n), 0);

  Vector nearest(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Matrix dist = detail::pairwise_squared(points, result.centers);
    for (Index i = 0; i < n; ++i) {
      Index best;
      nearest[i] = dist.row(i).minCoeff(&best);
      result.assignment[i] = static_cast<int>(best);
    }

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += points.row(i);
      ++counts[result.assignment[i]];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        sums.row(c) /= static_cast<double>(counts[c]);
        continue;
      }
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (!taken[i] && (far < 0 || nearest[i] > nearest[far])) far = i;
      }
      taken[far] = true;
      sums.row(c) = points.row(far);
      nearest[far] = 0.0;
    }

    double shift = 0.0;
    for (int c = 0; c < k; ++c) shift = std::max(shift, (sums.row(c) - result.centers.row(c)).norm());
    result.centers.swap(sums);
    result.iterations = iter + 1;
    if (shift < options.tolerance) {
      result.converged = true;
      break;
    }
  }

  const Matrix dist = detail::pairwise_squared(points, result.centers);
  for (Index i = 0; i < n; ++i) {
    Index best;
    dist.row(i).minCoeff(&best);
    result.assignment[i] = static_cast<int>(best);
  }
  return result;
}

}  // namespace gal
