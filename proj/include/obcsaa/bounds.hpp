#pragma once

#include <cstddef>
#include <vector>

#include "obcsaa/cs_codec.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::bounds {

// Constants of the convergence analysis. The RIP constant delta is accepted
// on (0,1) excluding the point where the recovery amplification blows up;
// rip_constants() below enforces the narrower domain needed for the
// closed-form amplification factor to be a valid recovery guarantee.
struct BoundParams {
  double lipschitz = 1.0;        // smoothness constant of the loss
  double rho1 = 0.0;             // additive worker-gradient divergence
  double rho2 = 0.0;             // multiplicative divergence, in [0,1)
  double gradient_bound = 1.0;   // uniform bound G on local gradient norms
  double delta = 0.1;            // RIP constant of the measurement matrix
  std::size_t sparsity = 1;      // kept coordinates per local update
  std::size_t measurements = 1;  // compressed payload length
  std::size_t dimension = 2;     // model parameter count
  double noise_variance = 0.0;   // receiver noise power
  std::vector<double> data_sizes;  // per-worker sample counts
  double learning_rate = 0.1;

  double total_data() const;
};

// Throws Error unless every field satisfies its documented range.
void validate(const BoundParams& params);

struct RipConstants {
  double varpi = 0.0;
  double varrho = 0.0;
  double amplification = 0.0;  // the constant usually written C
};

// Closed-form recovery constants; requires delta in (0, sqrt(2)-1) where the
// amplification factor is a positive, finite guarantee.
RipConstants rip_constants(double delta);

// Squared amplification factor on the relaxed domain (0,1) minus the pole at
// sqrt(2)-1. The bound formulas below stay positive and finite there even
// though the recovery guarantee itself no longer formally applies.
double c_squared(double delta);

// Expected squared sparsification error of one worker's top-k truncation.
double sparsification_error_bound(const BoundParams& params);

// Expected squared one-bit quantisation error of one compressed payload.
double quantization_error_bound(const BoundParams& params);

// Norm limit on the reconstruction input error for a given schedule and
// power scaling factor.
double epsilon_bound(const BoundParams& params,
                     const std::vector<int>& schedule, double gain_factor);

// Expected squared error between the recovered and the ideal aggregated
// gradient for one round.
double total_error_bound(const BoundParams& params,
                         const std::vector<int>& schedule, double gain_factor);

// Per-round term of the convergence guarantee; 2 * lipschitz * bt_term
// equals the scheduler objective for the same inputs.
double bt_term(const BoundParams& params, const std::vector<int>& schedule,
               double gain_factor);

// Diagnostic-only coefficient of the squared gradient norm in the descent
// inequality; never feeds back into any decision.
double a_term(const BoundParams& params, const std::vector<int>& schedule);

// Right-hand side of the convergence guarantee after T rounds; with a zero
// initial-gap argument it is the error floor.
double convergence_rhs(const BoundParams& params, double initial_gap,
                       const std::vector<double>& bt_series);

struct RoundBoundReport {
  double sparsify_bound = 0.0;
  double quantize_bound = 0.0;
  double epsilon = 0.0;
  double total_error = 0.0;
  double b_term = 0.0;
};

RoundBoundReport round_report(const BoundParams& params,
                              const std::vector<int>& schedule,
                              double gain_factor);

// Empirical RIP diagnostic: the largest observed deviation of the squared
// measurement norm from 1 over random unit-norm sparse probes. Reported for
// inspection only; bound formulas always use the configured delta.
double estimate_rip_delta(const cs_codec::MeasurementMatrix& matrix,
                          std::size_t sparsity, std::size_t trials, Rng& rng);

}  // namespace obcsaa::bounds
