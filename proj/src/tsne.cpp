#include "fashionista/tsne.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fashionista/error.h"
#include "fashionista/rng.h"

namespace fashionista {
namespace {

constexpr double kPerplexityTolerance = 1e-5;
constexpr int kMaxBisectionSteps = 50;
// Search range for ln(beta * mean shifted distance).
constexpr double kLogBetaLo = -40.0;
constexpr double kLogBetaHi = 40.0;
constexpr double kMinQ = 1e-12;
constexpr double kMinGain = 0.01;

struct RowResult {
  double perplexity = 0.0;
  bool degenerate = false;
};

// Fills out[j] = P_{j|i} for one row. `dist` is the full distance row.
RowResult calibrate_row(std::span<const double> dist, std::size_t self, double target,
                        std::span<double> out) {
  const std::size_t n = dist.size();
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = -d_min;
  double d_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == self) continue;
    d_min = std::min(d_min, dist[j]);
    d_max = std::max(d_max, dist[j]);
    d_sum += dist[j];
  }
  RowResult result;
  if (d_max == d_min) {
    for (std::size_t j = 0; j < n; ++j) out[j] = j == self ? 0.0 : 1.0 / static_cast<double>(n - 1);
    result.perplexity = static_cast<double>(n - 1);
    result.degenerate = d_max == 0.0;
    return result;
  }
  // Shifting by the row minimum leaves the normalised row unchanged.
  const double scale = (d_sum - d_min * static_cast<double>(n - 1)) / static_cast<double>(n - 1);
  auto evaluate = [&](double log_beta) {
    const double beta = std::exp(log_beta) / scale;
    double z = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) {
        out[j] = 0.0;
        continue;
      }
      const double shifted = dist[j] - d_min;
      out[j] = std::exp(-beta * shifted);
      z += out[j];
      weighted += shifted * out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= z;
    const double entropy = std::log(z) + beta * weighted / z;
    return std::exp(entropy);
  };

  double lo = kLogBetaLo;
  double hi = kLogBetaHi;
  double mid = 0.0;
  double perplexity = evaluate(mid);
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    if (std::abs(perplexity - target) < kPerplexityTolerance) break;
    // Perplexity falls as beta grows.
    if (perplexity > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    mid = 0.5 * (lo + hi);
    perplexity = evaluate(mid);
  }
  result.perplexity = perplexity;
  return result;
}

void check_points(const Matrix& points) {
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "t-SNE input has non-finite values");
  }
}

}  // namespace

void TsneParams::validate() const {
  if (!(perplexity >= 2.0)) throw Error(ErrorCode::kInvalidSpec, "perplexity must be >= 2");
  if (iterations < 1) throw Error(ErrorCode::kInvalidSpec, "iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidSpec, "learning_rate must be positive");
  if (!(early_exaggeration >= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "early_exaggeration must be >= 1");
  }
}

PairMatrix PairMatrix::from_dense(const Matrix& dense) {
  if (dense.rows() != dense.cols() || dense.rows() < 2) {
    throw Error(ErrorCode::kShapeMismatch, "pair matrix needs a square matrix with n >= 2");
  }
  PairMatrix out(dense.rows());
  auto* p = out.data_.data();
  for (std::size_t i = 0; i < out.n_; ++i) {
    for (std::size_t j = i + 1; j < out.n_; ++j) *p++ = dense(i, j);
  }
  return out;
}

Matrix PairMatrix::to_dense() const {
  Matrix dense(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) dense(i, j) = dense(j, i) = at(i, j);
  }
  return dense;
}

Matrix squared_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = squared_distance(points.row(i), points.row(j));
    }
  }
  return d;
}

double effective_perplexity(std::size_t n, double perplexity) {
  if (n < 2) return perplexity;
  return std::min(perplexity, static_cast<double>(n - 1) / 3.0);
}

PerplexityCalibration perplexity_calibrate(const Matrix& sq_distances, double perplexity) {
  const std::size_t n = sq_distances.rows();
  if (sq_distances.cols() != n || n < 2) {
    throw Error(ErrorCode::kShapeMismatch, "distance matrix must be square with n >= 2");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = sq_distances(i, j);
      if (!std::isfinite(d) || d < 0.0 || (i == j && d != 0.0)) {
        throw Error(ErrorCode::kNonFiniteInput,
                    "distances must be finite, non-negative, with a zero diagonal");
      }
    }
  }
  PerplexityCalibration out;
  out.conditional = Matrix(n, n);
  out.joint = Matrix(n, n);
  out.row_perplexity.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = calibrate_row(sq_distances.row(i), i, perplexity, out.conditional.row(i));
    out.row_perplexity[i] = r.perplexity;
    if (r.degenerate) out.degenerate_rows.push_back(i);
  }
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.joint(i, j) = (out.conditional(i, j) + out.conditional(j, i)) / denom;
    }
  }
  return out;
}

Matrix student_t_joint(const Matrix& coords) {
  const std::size_t n = coords.rows();
  Matrix q(n, n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double num = 1.0 / (1.0 + squared_distance(coords.row(i), coords.row(j)));
      q(i, j) = q(j, i) = num;
      z += 2.0 * num;
    }
  }
  for (double& v : q.data()) v /= z;
  return q;
}

double kl_divergence(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "KL divergence needs matrices of equal shape");
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = p.data()[k];
    if (pk > 0.0) kl += pk * std::log(pk / std::max(q.data()[k], kMinQ));
  }
  return kl;
}

double tsne_gradient(const PairMatrix& p, const Matrix& coords, double exaggeration,
                     Matrix& grad, PairMatrix& kernel) {
  const std::size_t n = p.n();
  if (coords.rows() != n || coords.cols() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "coordinates must be n x 2");
  }
  if (kernel.n() != n) kernel = PairMatrix(n);
  if (grad.rows() != n || grad.cols() != 2) grad = Matrix(n, 2);
  std::fill(grad.data().begin(), grad.data().end(), 0.0);

  const double* y = coords.data().data();
  double* num = kernel.data().data();
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = y[2 * i];
    const double yi = y[2 * i + 1];
    double* row = num + kernel.row_offset(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xi - y[2 * j];
      const double dy = yi - y[2 * j + 1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      row[j - i - 1] = v;
      z += v;
    }
  }
  z *= 2.0;
  const double log_z = std::log(z);

  const double* pp = p.data().data();
  double* g = grad.data().data();
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = y[2 * i];
    const double yi = y[2 * i + 1];
    const std::size_t off = kernel.row_offset(i);
    const double* prow = pp + off;
    const double* krow = num + off;
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = krow[j - i - 1];
      const double pij = prow[j - i - 1];
      const double q = v / z;
      const double m = (exaggeration * pij - q) * v;
      const double fx = m * (xi - y[2 * j]);
      const double fy = m * (yi - y[2 * j + 1]);
      gx += fx;
      gy += fy;
      g[2 * j] -= fx;
      g[2 * j + 1] -= fy;
      if (pij > 0.0) {
        const double log_q = q >= kMinQ ? std::log(v) - log_z : std::log(kMinQ);
        kl += pij * (std::log(pij) - log_q);
      }
    }
    g[2 * i] += gx;
    g[2 * i + 1] += gy;
  }
  for (double& v : grad.data()) v *= 4.0;
  // Each unordered pair stands for two ordered entries of P and Q.
  return 2.0 * kl;
}

Embedding2D tsne_embed(const Matrix& points, const TsneParams& params) {
  params.validate();
  const std::size_t n = points.rows();
  if (n < 4) throw Error(ErrorCode::kTooFewPoints, "t-SNE needs at least 4 points");
  check_points(points);
  const double perplexity = effective_perplexity(n, params.perplexity);

  PairMatrix p(n);
  {
    std::vector<double> dist(n), cond(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dist[j] = squared_distance(points.row(i), points.row(j));
      calibrate_row(dist, i, perplexity, cond);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::size_t a = std::min(i, j);
        const std::size_t b = std::max(i, j);
        p.data()[p.row_offset(a) + (b - a - 1)] += cond[j];
      }
    }
    const double denom = 2.0 * static_cast<double>(n);
    for (double& v : p.data()) v /= denom;
  }

  Embedding2D out;
  out.coords = Matrix(n, 2);
  Rng rng(params.seed);
  for (double& v : out.coords.data()) v = rng.normal() * 1e-4;
  out.kl_trace.reserve(params.iterations);

  Matrix grad(n, 2);
  Matrix update(n, 2);
  Matrix gains(n, 2, 1.0);
  PairMatrix kernel(n);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    const bool early = it < params.exaggeration_iterations;
    const double exaggeration = early ? params.early_exaggeration : 1.0;
    const double momentum = early ? params.initial_momentum : params.final_momentum;
    out.kl_trace.push_back(tsne_gradient(p, out.coords, exaggeration, grad, kernel));

    auto& y = out.coords.data();
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double gk = grad.data()[k];
      double& gain = gains.data()[k];
      double& up = update.data()[k];
      gain = (gk > 0.0) != (up > 0.0) ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, kMinGain);
      up = momentum * up - params.learning_rate * gain * gk;
      y[k] += up;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }
  return out;
}

}  // namespace fashionista
