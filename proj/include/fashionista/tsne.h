#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fashionista/matrix.h"

namespace fashionista {

struct TsneParams {
  double perplexity = 30.0;  // clamped to (n - 1) / 3 for small inputs
  double learning_rate = 200.0;
  std::size_t iterations = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;  // from exaggeration_iterations onwards
  std::uint64_t seed = 1;

  /// Throws InvalidSpec.
  void validate() const;
};

struct Embedding2D {
  Matrix coords;                 // n x 2
  std::vector<double> kl_trace;  // KL(P || Q) at the start of each iteration
};

/// Symmetric n x n matrix with zero diagonal, stored as the packed strict
/// upper triangle.
class PairMatrix {
 public:
  PairMatrix() = default;
  explicit PairMatrix(std::size_t n) : n_(n), data_(n * (n - 1) / 2, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  /// Offset of row i's first entry (column i + 1).
  std::size_t row_offset(std::size_t i) const noexcept {
    return i * n_ - i * (i + 1) / 2;
  }
  double at(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return data_[row_offset(i) + (j - i - 1)];
  }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Reads the upper triangle of a dense symmetric matrix.
  static PairMatrix from_dense(const Matrix& dense);
  Matrix to_dense() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct PerplexityCalibration {
  Matrix conditional;   // P_{j|i}, rows sum to 1, zero diagonal
  Matrix joint;         // (P_{j|i} + P_{i|j}) / 2n
  std::vector<double> row_perplexity;
  std::vector<std::size_t> degenerate_rows;  // all distances zero, set uniform
};

Matrix squared_distances(const Matrix& points);

/// The perplexity actually used for n points.
double effective_perplexity(std::size_t n, double perplexity);

/// Per-row bisection on the log Gaussian precision until the row's perplexity
/// is within 1e-5 of the target (at most 50 steps), then symmetrisation.
PerplexityCalibration perplexity_calibrate(const Matrix& sq_distances, double perplexity);

/// Student-t joint similarities of a 2D layout (dense, zero diagonal).
Matrix student_t_joint(const Matrix& coords);

/// sum p log(p / q) over entries with p > 0, q clamped to >= 1e-12.
/// Throws ShapeMismatch.
double kl_divergence(const Matrix& p, const Matrix& q);

/// Gradient of KL(exaggeration * P || Q(Y)) with respect to Y. Writes it into
/// `grad` (n x 2) and returns KL(P || Q(Y)) for the unexaggerated P.
/// `kernel` is scratch space for the pairwise Student-t numerators.
double tsne_gradient(const PairMatrix& p, const Matrix& coords, double exaggeration,
                     Matrix& grad, PairMatrix& kernel);

/// Exact O(n^2) t-SNE. Deterministic given params.seed.
/// Throws TooFewPoints (n < 4), NonFiniteInput.
Embedding2D tsne_embed(const Matrix& points, const TsneParams& params);

}  // namespace fashionista
