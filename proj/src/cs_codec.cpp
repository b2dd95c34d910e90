#include "obcsaa/cs_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "obcsaa/errors.hpp"
#include "obcsaa/parallel.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::cs_codec {

namespace {

void check_sparse(const SparseGradient& g, std::size_t expected_dim,
                  const char* where) {
  if (g.dimension != expected_dim) {
    fail(ErrorCode::Dimension,
         std::string(where) + ": sparse vector has dimension " +
             std::to_string(g.dimension) + ", expected " +
             std::to_string(expected_dim));
  }
  if (g.indices.size() != g.values.size()) {
    fail(ErrorCode::Argument,
         std::string(where) + ": index/value length mismatch");
  }
  std::size_t prev = 0;
  bool first = true;
  for (std::size_t idx : g.indices) {
    if (idx >= g.dimension || (!first && idx <= prev)) {
      fail(ErrorCode::Argument,
           std::string(where) + ": indices must be strictly increasing and "
                                "within the dimension");
    }
    prev = idx;
    first = false;
  }
}

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

std::vector<double> SparseGradient::to_dense() const {
  check_sparse(*this, dimension, "to_dense");
  std::vector<double> out(dimension, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = values[i];
  return out;
}

SparseGradient top_k_sparsify(const std::vector<double>& dense,
                              std::size_t k) {
  if (dense.empty()) fail(ErrorCode::Argument, "top_k_sparsify: empty input");
  if (k == 0) fail(ErrorCode::Argument, "top_k_sparsify: k must be >= 1");
  if (k > dense.size()) {
    fail(ErrorCode::Dimension, "top_k_sparsify: k=" + std::to_string(k) +
                                   " exceeds dimension " +
                                   std::to_string(dense.size()));
  }

  std::vector<std::size_t> order(dense.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto keeps_before = [&dense](std::size_t a, std::size_t b) {
    double ma = std::fabs(dense[a]);
    double mb = std::fabs(dense[b]);
    if (ma != mb) return ma > mb;
    return a < b;  // deterministic tie-break toward the smaller index
  };
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   keeps_before);
  order.resize(k);
  std::sort(order.begin(), order.end());

  SparseGradient out;
  out.dimension = dense.size();
  out.indices = std::move(order);
  out.values.reserve(k);
  for (std::size_t idx : out.indices) out.values.push_back(dense[idx]);
  return out;
}

MeasurementMatrix MeasurementMatrix::gaussian(std::size_t rows,
                                              std::size_t cols,
                                              std::uint64_t seed) {
  if (rows == 0 || cols == 0) {
    fail(ErrorCode::Argument, "measurement matrix needs positive dimensions");
  }
  MeasurementMatrix m(rows, cols);
  Rng rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(rows));
  for (float& e : m.entries_) {
    e = static_cast<float>(rng.normal(0.0, stddev));
  }
  return m;
}

MeasurementMatrix MeasurementMatrix::identity(std::size_t n) {
  if (n == 0) fail(ErrorCode::Argument, "identity matrix needs n >= 1");
  MeasurementMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.entries_[i * n + i] = 1.0f;
  return m;
}

std::vector<double> MeasurementMatrix::multiply_sparse(
    const SparseGradient& g) const {
  check_sparse(g, cols_, "multiply_sparse");
  std::vector<double> out(rows_, 0.0);
  const std::size_t nnz = g.indices.size();
  for (std::size_t r = 0; r < rows_; ++r) {
    const float* row = entries_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t i = 0; i < nnz; ++i) {
      acc += static_cast<double>(row[g.indices[i]]) * g.values[i];
    }
    out[r] = acc;
  }
  return out;
}

std::vector<double> MeasurementMatrix::multiply_dense(
    const std::vector<double>& x) const {
  if (x.size() != cols_) {
    fail(ErrorCode::Dimension, "multiply_dense: vector length " +
                                   std::to_string(x.size()) +
                                   " does not match " + std::to_string(cols_) +
                                   " columns");
  }
  std::vector<double> out(rows_, 0.0);
  // Rows are independent, so block-parallel execution is bitwise identical to
  // the serial loop for any thread count.
  parallel_blocks(rows_, 64, [&](std::size_t, std::size_t begin,
                                 std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const float* row = entries_.data() + r * cols_;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      std::size_t j = 0;
      for (; j + 4 <= cols_; j += 4) {
        s0 += static_cast<double>(row[j]) * x[j];
        s1 += static_cast<double>(row[j + 1]) * x[j + 1];
        s2 += static_cast<double>(row[j + 2]) * x[j + 2];
        s3 += static_cast<double>(row[j + 3]) * x[j + 3];
      }
      for (; j < cols_; ++j) s0 += static_cast<double>(row[j]) * x[j];
      out[r] = (s0 + s1) + (s2 + s3);
    }
  });
  return out;
}

std::vector<double> MeasurementMatrix::multiply_transpose(
    const std::vector<double>& r) const {
  if (r.size() != rows_) {
    fail(ErrorCode::Dimension, "multiply_transpose: vector length " +
                                   std::to_string(r.size()) +
                                   " does not match " + std::to_string(rows_) +
                                   " rows");
  }
  std::vector<double> out(cols_, 0.0);
  for (std::size_t s = 0; s < rows_; ++s) {
    const double w = r[s];
    if (w == 0.0) continue;
    const float* row = entries_.data() + s * cols_;
    for (std::size_t j = 0; j < cols_; ++j) {
      out[j] += w * static_cast<double>(row[j]);
    }
  }
  return out;
}

CompressedUpdate compress_1bit(const std::vector<double>& measurements) {
  if (measurements.empty()) {
    fail(ErrorCode::Argument, "compress_1bit: empty measurement vector");
  }
  CompressedUpdate out;
  out.signs.reserve(measurements.size());
  bool any_nonzero = false;
  for (double v : measurements) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::Numeric, "compress_1bit: non-finite measurement");
    }
    any_nonzero = any_nonzero || v != 0.0;
    out.signs.push_back(v < 0.0 ? -1.0 : 1.0);
  }
  out.all_zero_input = !any_nonzero;
  return out;
}

namespace {

void scatter_into(std::vector<double>& dense, const SparseGradient& prev,
                  const SparseGradient& next) {
  for (std::size_t idx : prev.indices) dense[idx] = 0.0;
  for (std::size_t i = 0; i < next.indices.size(); ++i) {
    dense[next.indices[i]] = next.values[i];
  }
}

RecoveryResult recover_iht(const MeasurementMatrix& matrix,
                           const std::vector<double>& y,
                           const RecoveryConfig& cfg) {
  const std::size_t dim = matrix.cols();
  SparseGradient current;
  current.dimension = dim;
  std::vector<double> x_dense(dim, 0.0);
  std::vector<double> residual = y;
  double rnorm = l2_norm(residual);
  const double y_norm = rnorm;

  RecoveryResult result;
  result.estimate = current;
  result.residual_norm = rnorm;
  if (rnorm <= 1e-14) {
    result.converged = true;
    return result;
  }

  SparseGradient best = current;
  double best_rnorm = rnorm;
  std::vector<double> work(dim, 0.0);

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    result.iterations = it;
    std::vector<double> grad = matrix.multiply_transpose(residual);

    // Adaptive step: exact line search for the gradient restricted to the
    // active support (the gradient's own top-k support on the first step).
    SparseGradient gamma;
    gamma.dimension = dim;
    if (current.indices.empty()) {
      gamma = top_k_sparsify(grad, cfg.sparsity);
    } else {
      gamma.indices = current.indices;
      for (std::size_t idx : gamma.indices) gamma.values.push_back(grad[idx]);
    }
    double num = 0.0;
    for (double v : gamma.values) num += v * v;
    double den = 0.0;
    for (double v : matrix.multiply_sparse(gamma)) den += v * v;
    const double mu_base =
        (num > 0.0 && den > 0.0) ? num / den : 1.0;

    bool accepted = false;
    double mu_try = cfg.step_size * mu_base;
    SparseGradient candidate;
    std::vector<double> cand_measure;
    double cand_rnorm = rnorm;
    for (int halving = 0; halving < 30; ++halving) {
      for (std::size_t j = 0; j < dim; ++j) {
        work[j] = x_dense[j] + mu_try * grad[j];
      }
      candidate = top_k_sparsify(work, cfg.sparsity);
      cand_measure = matrix.multiply_sparse(candidate);
      double acc = 0.0;
      for (std::size_t s = 0; s < y.size(); ++s) {
        double d = y[s] - cand_measure[s];
        acc += d * d;
      }
      cand_rnorm = std::sqrt(acc);
      if (cand_rnorm < rnorm) {
        accepted = true;
        break;
      }
      mu_try *= 0.5;
    }
    if (!accepted) {
      // No descent step exists at this point; treat it as a fixed point.
      result.converged = true;
      break;
    }

    scatter_into(x_dense, current, candidate);
    current = std::move(candidate);
    const double improvement = (rnorm - cand_rnorm) / rnorm;
    rnorm = cand_rnorm;
    for (std::size_t s = 0; s < y.size(); ++s) {
      residual[s] = y[s] - cand_measure[s];
    }
    if (rnorm < best_rnorm) {
      best = current;
      best_rnorm = rnorm;
    }

    if (rnorm <= 1e-12 * y_norm || improvement <= cfg.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.estimate = std::move(best);
  result.residual_norm = best_rnorm;
  return result;
}

RecoveryResult recover_biht(const MeasurementMatrix& matrix,
                            const std::vector<double>& y,
                            const RecoveryConfig& cfg) {
  const std::size_t dim = matrix.cols();
  const std::size_t n_meas = matrix.rows();
  const CompressedUpdate target = compress_1bit(y);

  SparseGradient current;
  current.dimension = dim;
  std::vector<double> x_dense(dim, 0.0);
  std::vector<double> work(dim, 0.0);
  std::vector<double> diff(n_meas, 0.0);

  SparseGradient best = current;
  std::size_t best_mismatches = n_meas + 1;

  RecoveryResult result;
  const double tau = 0.5 * cfg.step_size;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    result.iterations = it;
    std::vector<double> predicted = matrix.multiply_sparse(current);
    std::size_t mismatches = 0;
    for (std::size_t s = 0; s < n_meas; ++s) {
      double sign = predicted[s] < 0.0 ? -1.0 : 1.0;
      diff[s] = target.signs[s] - sign;
      if (diff[s] != 0.0) ++mismatches;
    }
    if (mismatches < best_mismatches) {
      best = current;
      best_mismatches = mismatches;
    }
    if (mismatches == 0) {
      result.converged = true;
      break;
    }

    std::vector<double> grad = matrix.multiply_transpose(diff);
    for (std::size_t j = 0; j < dim; ++j) {
      work[j] = x_dense[j] + tau * grad[j];
    }
    SparseGradient candidate = top_k_sparsify(work, cfg.sparsity);
    double norm = 0.0;
    for (double v : candidate.values) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : candidate.values) v /= norm;
    }
    scatter_into(x_dense, current, candidate);
    current = std::move(candidate);
  }

  const double scale =
      cfg.magnitude_estimate > 0.0 ? cfg.magnitude_estimate : l2_norm(y);
  for (double& v : best.values) v *= scale;
  result.estimate = std::move(best);
  // For the sign-based decoder the natural residual is the fraction of
  // measurement signs the estimate still gets wrong.
  result.residual_norm =
      static_cast<double>(best_mismatches > n_meas ? n_meas : best_mismatches) /
      static_cast<double>(n_meas);
  return result;
}

RecoveryResult recover_passthrough(const MeasurementMatrix& matrix,
                                   const std::vector<double>& y) {
  if (matrix.rows() != matrix.cols()) {
    fail(ErrorCode::Argument,
         "passthrough recovery requires a square (identity) operator");
  }
  RecoveryResult result;
  result.estimate.dimension = matrix.cols();
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] != 0.0) {
      result.estimate.indices.push_back(j);
      result.estimate.values.push_back(y[j]);
    }
  }
  result.converged = true;
  return result;
}

}  // namespace

RecoveryResult reconstruct_sparse(const MeasurementMatrix& matrix,
                                  const std::vector<double>& input,
                                  const RecoveryConfig& config) {
  if (input.size() != matrix.rows()) {
    fail(ErrorCode::Dimension, "reconstruct_sparse: input length " +
                                   std::to_string(input.size()) +
                                   " does not match " +
                                   std::to_string(matrix.rows()) + " rows");
  }
  for (double v : input) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::Numeric, "reconstruct_sparse: non-finite input");
    }
  }
  if (config.mode == RecoveryMode::PASSTHROUGH) {
    return recover_passthrough(matrix, input);
  }
  if (config.sparsity == 0 || config.sparsity > matrix.cols()) {
    fail(ErrorCode::Argument,
         "reconstruct_sparse: sparsity must be in [1, cols]");
  }
  if (config.max_iterations == 0) {
    fail(ErrorCode::Argument, "reconstruct_sparse: max_iterations must be >= 1");
  }
  if (!(config.step_size > 0.0) || !(config.tolerance >= 0.0)) {
    fail(ErrorCode::Argument,
         "reconstruct_sparse: step_size must be > 0 and tolerance >= 0");
  }
  if (config.mode == RecoveryMode::BIHT_SIGN) {
    return recover_biht(matrix, input, config);
  }
  return recover_iht(matrix, input, config);
}

}  // namespace obcsaa::cs_codec
