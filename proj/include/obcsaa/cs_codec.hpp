#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace obcsaa::cs_codec {

// A k-sparse view of a dense vector: `indices` is strictly increasing and
// `values[i]` is the entry at `indices[i]`; everything else is zero.
struct SparseGradient {
  std::size_t dimension = 0;
  std::vector<std::size_t> indices;
  std::vector<double> values;

  std::size_t support_size() const { return indices.size(); }
  std::vector<double> to_dense() const;
};

// Keeps the k entries with the largest magnitude. Ties are broken toward the
// smaller index so the result never depends on evaluation order.
SparseGradient top_k_sparsify(const std::vector<double>& dense, std::size_t k);

// Dense random measurement operator. Entries are stored as float to halve the
// memory traffic of the big matrix-vector products; accumulation is always
// done in double.
class MeasurementMatrix {
 public:
  static MeasurementMatrix gaussian(std::size_t rows, std::size_t cols,
                                    std::uint64_t seed);
  // Square identity used by the lossless debug path (no dimension reduction).
  static MeasurementMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  float at(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  // y = A g using only the stored support of g.
  std::vector<double> multiply_sparse(const SparseGradient& g) const;
  // y = A x for dense x.
  std::vector<double> multiply_dense(const std::vector<double>& x) const;
  // out = A^T r.
  std::vector<double> multiply_transpose(const std::vector<double>& r) const;

 private:
  MeasurementMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0f) {}

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> entries_;
};

// One-bit quantised measurement vector (entries are exactly +1 or -1).
struct CompressedUpdate {
  std::vector<double> signs;
  bool all_zero_input = false;
};

// Elementwise sign with sign(0) := +1 so the payload is always a valid
// antipodal codeword.
CompressedUpdate compress_1bit(const std::vector<double>& measurements);

enum class RecoveryMode {
  IHT_REAL,     // iterative hard thresholding on the real-valued input
  BIHT_SIGN,    // binary IHT driven only by the signs of the input
  PASSTHROUGH,  // identity decode for the lossless debug configuration
};

struct RecoveryConfig {
  RecoveryMode mode = RecoveryMode::IHT_REAL;
  std::size_t sparsity = 0;       // target support size, must be >= 1
  std::size_t max_iterations = 60;
  double step_size = 1.0;         // initial IHT step, halved on backtracking
  double tolerance = 1e-7;        // relative residual-improvement stop
  double magnitude_estimate = 0;  // BIHT output scale; <= 0 picks ||y||
};

struct RecoveryResult {
  SparseGradient estimate;
  std::size_t iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
};

// Estimates a sparse vector from (possibly noisy) linear measurements.
RecoveryResult reconstruct_sparse(const MeasurementMatrix& matrix,
                                  const std::vector<double>& input,
                                  const RecoveryConfig& config);

}  // namespace obcsaa::cs_codec
