#include "obcsaa/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obcsaa/errors.hpp"

namespace obcsaa::bounds {

namespace {

const double kAmplificationPole = std::sqrt(2.0) - 1.0;

// Total scheduled data volume; throws if the schedule is empty or malformed.
double scheduled_weight(const BoundParams& params,
                        const std::vector<int>& schedule, const char* where) {
  if (schedule.size() != params.data_sizes.size()) {
    fail(ErrorCode::Dimension,
         std::string(where) + ": schedule length " +
             std::to_string(schedule.size()) + " does not match " +
             std::to_string(params.data_sizes.size()) + " workers");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] != 0 && schedule[i] != 1) {
      fail(ErrorCode::Argument,
           std::string(where) + ": schedule entries must be 0 or 1");
    }
    if (schedule[i] == 1) total += params.data_sizes[i];
  }
  if (!(total > 0.0)) {
    fail(ErrorCode::Infeasible,
         std::string(where) + ": schedule selects no worker");
  }
  return total;
}

void check_gain_factor(double gain_factor, const char* where) {
  if (!(gain_factor > 0.0) || !std::isfinite(gain_factor)) {
    fail(ErrorCode::Argument,
         std::string(where) + ": power scaling factor must be positive");
  }
}

}  // namespace

double BoundParams::total_data() const {
  double total = 0.0;
  for (double k : data_sizes) total += k;
  return total;
}

void validate(const BoundParams& params) {
  if (!(params.lipschitz > 0.0)) {
    fail(ErrorCode::Argument, "bound params: lipschitz constant must be > 0");
  }
  if (!(params.rho1 >= 0.0)) {
    fail(ErrorCode::Argument, "bound params: rho1 must be >= 0");
  }
  if (!(params.rho2 >= 0.0) || params.rho2 >= 1.0) {
    fail(ErrorCode::Argument, "bound params: rho2 must be in [0,1)");
  }
  if (!(params.gradient_bound > 0.0)) {
    fail(ErrorCode::Argument, "bound params: gradient bound must be > 0");
  }
  if (!(params.delta > 0.0) || params.delta >= 1.0 ||
      params.delta == kAmplificationPole) {
    fail(ErrorCode::Argument,
         "bound params: delta must lie in (0,1) away from sqrt(2)-1");
  }
  if (params.sparsity == 0 || params.sparsity > params.dimension) {
    fail(ErrorCode::Argument,
         "bound params: sparsity must be in [1, dimension]");
  }
  if (params.measurements == 0 || params.measurements >= params.dimension) {
    fail(ErrorCode::Argument,
         "bound params: measurement count must be in [1, dimension)");
  }
  if (!(params.noise_variance >= 0.0)) {
    fail(ErrorCode::Argument, "bound params: noise variance must be >= 0");
  }
  if (params.data_sizes.empty()) {
    fail(ErrorCode::Argument, "bound params: need at least one worker");
  }
  for (double k : params.data_sizes) {
    if (!(k > 0.0)) {
      fail(ErrorCode::Argument, "bound params: data sizes must be positive");
    }
  }
  if (!(params.learning_rate > 0.0)) {
    fail(ErrorCode::Argument, "bound params: learning rate must be > 0");
  }
}

RipConstants rip_constants(double delta) {
  if (!(delta > 0.0) || delta >= kAmplificationPole) {
    fail(ErrorCode::Argument,
         "rip_constants: delta must lie in (0, sqrt(2)-1)");
  }
  RipConstants out;
  out.varpi = 2.0 * std::sqrt(1.0 + delta) / std::sqrt(1.0 - delta);
  out.varrho = std::sqrt(2.0) * delta / (1.0 - delta);
  out.amplification = 2.0 * out.varpi / (1.0 - out.varrho);
  return out;
}

double c_squared(double delta) {
  if (!(delta > 0.0) || delta >= 1.0 || delta == kAmplificationPole) {
    fail(ErrorCode::Argument,
         "c_squared: delta must lie in (0,1) away from sqrt(2)-1");
  }
  const double varpi = 2.0 * std::sqrt(1.0 + delta) / std::sqrt(1.0 - delta);
  const double varrho = std::sqrt(2.0) * delta / (1.0 - delta);
  const double c = 2.0 * varpi / (1.0 - varrho);
  return c * c;
}

double sparsification_error_bound(const BoundParams& params) {
  validate(params);
  const double d = static_cast<double>(params.dimension);
  const double kept = static_cast<double>(params.sparsity);
  const double g2 = params.gradient_bound * params.gradient_bound;
  return (1.0 + params.delta) * ((d - kept) / d) * g2;
}

double quantization_error_bound(const BoundParams& params) {
  return static_cast<double>(params.measurements) +
         sparsification_error_bound(params);
}

double epsilon_bound(const BoundParams& params,
                     const std::vector<int>& schedule, double gain_factor) {
  validate(params);
  check_gain_factor(gain_factor, "epsilon_bound");
  const double weight =
      scheduled_weight(params, schedule, "epsilon_bound") * gain_factor;
  const double s = static_cast<double>(params.measurements);
  return quantization_error_bound(params) +
         s * params.noise_variance / (weight * weight);
}

double total_error_bound(const BoundParams& params,
                         const std::vector<int>& schedule, double gain_factor) {
  validate(params);
  check_gain_factor(gain_factor, "total_error_bound");
  const double weight =
      scheduled_weight(params, schedule, "total_error_bound") * gain_factor;
  const double d = static_cast<double>(params.dimension);
  const double s = static_cast<double>(params.measurements);
  const double kept = static_cast<double>(params.sparsity);
  const double g2 = params.gradient_bound * params.gradient_bound;
  const double c2 = c_squared(params.delta);

  double scheduled_count = 0.0;
  for (int b : schedule) scheduled_count += b;

  const double recovery_part =
      c2 * (1.0 + (1.0 + params.delta) * (d - kept) * g2 / (s * d) +
            params.noise_variance / (weight * weight));
  const double sparsify_part =
      scheduled_count * (1.0 + params.delta) * ((d - kept) / d) * g2;
  return recovery_part + sparsify_part;
}

double bt_term(const BoundParams& params, const std::vector<int>& schedule,
               double gain_factor) {
  validate(params);
  check_gain_factor(gain_factor, "bt_term");
  const double weight =
      scheduled_weight(params, schedule, "bt_term") * gain_factor;
  const double d = static_cast<double>(params.dimension);
  const double s = static_cast<double>(params.measurements);
  const double kept = static_cast<double>(params.sparsity);
  const double g2 = params.gradient_bound * params.gradient_bound;
  const double c2 = c_squared(params.delta);
  const double two_l = 2.0 * params.lipschitz;
  const double total = params.total_data();

  double unscheduled_data = 0.0;
  double scheduled_count = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] == 0) {
      unscheduled_data += params.data_sizes[i];
    } else {
      scheduled_count += 1.0;
    }
  }

  const double dropout_part = unscheduled_data * params.rho1 / (two_l * total);
  const double recovery_part =
      (c2 / two_l) * (1.0 + (1.0 + params.delta) * (d - kept) * g2 / (s * d) +
                      params.noise_variance / (weight * weight));
  const double sparsify_part =
      scheduled_count * (1.0 + params.delta) * (d - kept) * g2 / (two_l * d);
  return dropout_part + recovery_part + sparsify_part;
}

double a_term(const BoundParams& params, const std::vector<int>& schedule) {
  validate(params);
  if (schedule.size() != params.data_sizes.size()) {
    fail(ErrorCode::Dimension, "a_term: schedule length mismatch");
  }
  double unscheduled_data = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] != 0 && schedule[i] != 1) {
      fail(ErrorCode::Argument, "a_term: schedule entries must be 0 or 1");
    }
    if (schedule[i] == 0) unscheduled_data += params.data_sizes[i];
  }
  const double two_l = 2.0 * params.lipschitz;
  return 1.0 / two_l -
         unscheduled_data * params.rho2 / (two_l * params.total_data());
}

double convergence_rhs(const BoundParams& params, double initial_gap,
                       const std::vector<double>& bt_series) {
  validate(params);
  if (bt_series.empty()) {
    fail(ErrorCode::Argument, "convergence_rhs: need at least one round term");
  }
  if (!(initial_gap >= 0.0)) {
    fail(ErrorCode::Argument, "convergence_rhs: initial gap must be >= 0");
  }
  double bt_sum = 0.0;
  for (double b : bt_series) bt_sum += b;
  const double t = static_cast<double>(bt_series.size());
  const double scale =
      2.0 * params.lipschitz / (t * (1.0 - params.rho2));
  return scale * initial_gap + scale * bt_sum;
}

RoundBoundReport round_report(const BoundParams& params,
                              const std::vector<int>& schedule,
                              double gain_factor) {
  RoundBoundReport report;
  report.sparsify_bound = sparsification_error_bound(params);
  report.quantize_bound = quantization_error_bound(params);
  report.epsilon = epsilon_bound(params, schedule, gain_factor);
  report.total_error = total_error_bound(params, schedule, gain_factor);
  report.b_term = bt_term(params, schedule, gain_factor);
  return report;
}

double estimate_rip_delta(const cs_codec::MeasurementMatrix& matrix,
                          std::size_t sparsity, std::size_t trials, Rng& rng) {
  if (sparsity == 0 || sparsity > matrix.cols()) {
    fail(ErrorCode::Argument,
         "estimate_rip_delta: sparsity must be in [1, cols]");
  }
  if (trials == 0) {
    fail(ErrorCode::Argument, "estimate_rip_delta: need at least one trial");
  }
  const std::size_t dim = matrix.cols();
  double worst = 0.0;
  std::vector<std::size_t> pool(dim);
  for (std::size_t i = 0; i < dim; ++i) pool[i] = i;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    rng.shuffle(pool);
    cs_codec::SparseGradient probe;
    probe.dimension = dim;
    probe.indices.assign(pool.begin(), pool.begin() + sparsity);
    std::sort(probe.indices.begin(), probe.indices.end());
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < sparsity; ++i) {
      probe.values.push_back(rng.normal());
      norm_sq += probe.values[i] * probe.values[i];
    }
    if (norm_sq == 0.0) continue;
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (double& v : probe.values) v *= inv_norm;
    double measured = 0.0;
    for (double y : matrix.multiply_sparse(probe)) measured += y * y;
    worst = std::max(worst, std::fabs(measured - 1.0));
  }
  return worst;
}

}  // namespace obcsaa::bounds
