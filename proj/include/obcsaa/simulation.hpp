#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "obcsaa/bounds.hpp"
#include "obcsaa/cs_codec.hpp"
#include "obcsaa/learner.hpp"
#include "obcsaa/scheduler.hpp"

namespace obcsaa::learner {

enum class Mode { PERFECT, OBCSAA };

enum class SolverChoice {
  AUTO,         // enumeration when it fits under the cap, otherwise ADMM
  ENUMERATION,
  ADMM,
};

enum class GradientScale {
  IDEAL_NORM,  // rescale the recovered direction to the ideal aggregate norm
  RAW,         // use the recovered vector as-is
};

struct SimulationConfig {
  std::size_t sparsity = 10;        // top-k kept per worker
  std::size_t measurements = 1000;  // compressed payload length
  double learning_rate = 0.1;
  double max_power = 1.0;           // per-worker transmit power budget
  double noise_variance = 0.0;      // receiver noise power

  // Constants of the error/convergence expressions.
  double lipschitz = 1.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double delta = 0.1;
  bool compute_bounds = true;

  SolverChoice solver = SolverChoice::AUTO;
  scheduler::AdmmOptions admm;
  cs_codec::RecoveryConfig recovery;  // sparsity 0 picks the automatic rule
  GradientScale gradient_scale = GradientScale::IDEAL_NORM;

  // Bypasses quantisation, noise, and dimension reduction so the round
  // degenerates to exact gradient descent (requires measurements == D).
  bool lossless_debug = false;
};

struct RoundMetrics {
  std::size_t round = 0;       // 1-based
  double train_loss = 0.0;     // weighted mean local loss before the update
  double test_accuracy = 0.0;  // after the update
  double grad_error_sq = 0.0;  // ||recovered - exact scheduled aggregate||^2

  bool has_decision = false;   // false in PERFECT mode
  scheduler::SchedulingDecision decision;
  bool has_objective = false;  // solver objective available
  double objective = 0.0;

  bool has_bounds = false;
  bounds::RoundBoundReport bound_report;
};

// One mode's training trajectory: owns the model, the measurement operator,
// and the running gradient-norm envelope used by the bound expressions.
class Simulation {
 public:
  Simulation(Mode mode, Model initial, std::vector<LocalDataset> workers,
             LocalDataset test_set, SimulationConfig config,
             std::uint64_t replicate_seed);

  RoundMetrics run_round();

  const Model& model() const { return model_; }
  Mode mode() const { return mode_; }
  std::size_t rounds_completed() const { return round_; }
  double gradient_bound() const { return gradient_bound_; }
  std::size_t worker_count() const { return workers_.size(); }

 private:
  Mode mode_;
  Model model_;
  std::vector<LocalDataset> workers_;
  LocalDataset test_;
  SimulationConfig config_;
  std::uint64_t seed_;
  std::size_t round_ = 0;
  double gradient_bound_ = 0.0;
  std::vector<double> data_sizes_;
  std::unique_ptr<cs_codec::MeasurementMatrix> matrix_;  // OBCSAA only
};

}  // namespace obcsaa::learner
