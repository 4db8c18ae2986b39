#pragma once

// Shared numeric types, errors and the deterministic random source used by
// every gal module.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gal {

using Index = std::int64_t;
using NodeId = std::int32_t;

// Row-major so that a node's feature vector is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by loaders; message carries "<file>:<line>: <reason>".
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// mt19937_64 with hand-rolled draws: std distributions are implementation
// defined, which would make selections differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw Error("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Independent child stream; used so that one stage's draw count does not
  // shift another stage's randomness.
  Rng fork(std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(next()), static_cast<std::uint32_t>(salt),
                      static_cast<std::uint32_t>(salt >> 32)};
    std::mt19937_64 child(seq);
    return Rng(child());
  }

 private:
  std::mt19937_64 engine_;
};

inline double squared_distance(const Matrix& a, Index i, const Matrix& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

inline double distance(const Matrix& a, Index i, const Matrix& b, Index j) {
  return std::sqrt(squared_distance(a, i, b, j));
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace gal
