#include "obcsaa/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "obcsaa/channel.hpp"
#include "obcsaa/errors.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::learner {

namespace {

double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

Simulation::Simulation(Mode mode, Model initial,
                       std::vector<LocalDataset> workers,
                       LocalDataset test_set, SimulationConfig config,
                       std::uint64_t replicate_seed)
    : mode_(mode),
      model_(std::move(initial)),
      workers_(std::move(workers)),
      test_(std::move(test_set)),
      config_(std::move(config)),
      seed_(replicate_seed) {
  validate(model_);
  const Architecture& arch = model_.architecture;
  if (workers_.empty()) {
    fail(ErrorCode::Argument, "simulation: at least one worker required");
  }
  for (const LocalDataset& w : workers_) {
    validate(w, arch.input, arch.output);
  }
  validate(test_, arch.input, arch.output);

  const std::size_t dim = arch.param_count();
  if (config_.sparsity < 1 || config_.sparsity > dim) {
    fail(ErrorCode::Argument,
         "simulation: sparsity must lie in [1, " + std::to_string(dim) + "]");
  }
  if (config_.measurements < 1) {
    fail(ErrorCode::Argument, "simulation: need at least one measurement");
  }
  if (!(config_.learning_rate > 0.0) || !(config_.max_power > 0.0) ||
      config_.noise_variance < 0.0) {
    fail(ErrorCode::Argument,
         "simulation: learning rate and power budget must be positive, noise "
         "variance nonnegative");
  }

  data_sizes_.reserve(workers_.size());
  for (const LocalDataset& w : workers_) {
    data_sizes_.push_back(static_cast<double>(w.size()));
  }

  if (mode_ == Mode::OBCSAA) {
    if (config_.lossless_debug) {
      if (config_.measurements != dim) {
        fail(ErrorCode::Argument,
             "simulation: the lossless debug path needs measurements == "
             "parameter count (identity operator)");
      }
      matrix_ = std::make_unique<cs_codec::MeasurementMatrix>(
          cs_codec::MeasurementMatrix::identity(dim));
    } else {
      if (config_.measurements >= dim) {
        fail(ErrorCode::Argument,
             "simulation: measurements must be below the parameter count "
             "(use lossless_debug for the degenerate setup)");
      }
      matrix_ = std::make_unique<cs_codec::MeasurementMatrix>(
          cs_codec::MeasurementMatrix::gaussian(
              config_.measurements, dim, derive_seed(seed_, "measurement")));
    }
  }
}

RoundMetrics Simulation::run_round() {
  ++round_;
  try {
    const std::size_t n_workers = workers_.size();
    const Architecture& arch = model_.architecture;
    const std::size_t dim = arch.param_count();

    std::vector<std::vector<double>> locals(n_workers);
    double loss_weighted = 0.0;
    double total_data = 0.0;
    for (std::size_t u = 0; u < n_workers; ++u) {
      GradientResult r = local_gradient(model_, workers_[u]);
      locals[u] = std::move(r.gradient);
      loss_weighted += data_sizes_[u] * r.loss;
      total_data += data_sizes_[u];
      gradient_bound_ = std::max(gradient_bound_, norm2(locals[u]));
    }
    gradient_bound_ = std::max(gradient_bound_, 1e-12);

    RoundMetrics metrics;
    metrics.round = round_;
    metrics.train_loss = loss_weighted / total_data;

    if (mode_ == Mode::PERFECT) {
      const std::vector<double> global =
          exact_global_gradient(locals, data_sizes_);
      model_ = apply_update(std::move(model_), global, config_.learning_rate);
      const EvalResult eval = evaluate(model_, test_);
      metrics.test_accuracy = eval.accuracy;
      return metrics;
    }

    // Per-round channel realisation.
    Rng gain_rng(derive_seed(seed_, "channel", round_));
    const std::vector<double> gains =
        channel::draw_channel_gains(n_workers, gain_rng);

    // Joint selection and power scaling.
    scheduler::SchedulingDecision decision;
    if (config_.lossless_debug) {
      // The selection objective is undefined without dimension reduction;
      // with an ideal channel keeping everyone is optimal anyway.
      decision.schedule.assign(n_workers, 1);
      double cap = std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < n_workers; ++u) {
        cap = std::min(cap, gains[u] * std::sqrt(config_.max_power) /
                                data_sizes_[u]);
      }
      decision.gain_factor = cap;
    } else {
      scheduler::SchedulerInstance instance;
      instance.gains = gains;
      instance.workers.resize(n_workers);
      for (std::size_t u = 0; u < n_workers; ++u) {
        instance.workers[u].data_size = data_sizes_[u];
        instance.workers[u].max_power = config_.max_power;
      }
      bounds::BoundParams& bp = instance.bound_params;
      bp.lipschitz = config_.lipschitz;
      bp.rho1 = config_.rho1;
      bp.rho2 = config_.rho2;
      bp.gradient_bound = gradient_bound_;
      bp.delta = config_.delta;
      bp.sparsity = config_.sparsity;
      bp.measurements = config_.measurements;
      bp.dimension = dim;
      bp.noise_variance = config_.noise_variance;
      bp.data_sizes = data_sizes_;
      bp.learning_rate = config_.learning_rate;

      const bool enumerate =
          config_.solver == SolverChoice::ENUMERATION ||
          (config_.solver == SolverChoice::AUTO &&
           n_workers <= scheduler::kEnumerationCap);
      const scheduler::SchedulerResult solved =
          enumerate ? scheduler::solve_enumeration(instance)
                    : scheduler::solve_admm(instance, config_.admm);
      decision = solved.decision;
      metrics.has_objective = true;
      metrics.objective = solved.objective;

      if (config_.compute_bounds) {
        metrics.has_bounds = true;
        metrics.bound_report = bounds::round_report(
            instance.bound_params, decision.schedule, decision.gain_factor);
      }
    }
    metrics.has_decision = true;
    metrics.decision = decision;

    // Sparsify the scheduled updates.
    std::size_t scheduled_count = 0;
    std::vector<cs_codec::SparseGradient> sparsified(n_workers);
    for (std::size_t u = 0; u < n_workers; ++u) {
      if (decision.schedule[u] == 1) {
        sparsified[u] = cs_codec::top_k_sparsify(locals[u], config_.sparsity);
        ++scheduled_count;
      }
    }

    // Aggregate over the channel and post-process to an average estimate.
    std::vector<double> averaged;
    if (config_.lossless_debug) {
      const std::vector<double> received = channel::aggregate_payloads(
          sparsified, data_sizes_, decision.schedule);
      averaged = channel::post_process(received, data_sizes_,
                                       decision.schedule, 1.0);
    } else {
      std::vector<cs_codec::CompressedUpdate> payloads(n_workers);
      for (std::size_t u = 0; u < n_workers; ++u) {
        if (decision.schedule[u] == 1) {
          payloads[u] =
              cs_codec::compress_1bit(matrix_->multiply_sparse(sparsified[u]));
        }
      }
      Rng noise_rng(derive_seed(seed_, "noise", round_));
      const std::vector<double> received = channel::aggregate_over_air(
          payloads, data_sizes_, decision.schedule, decision.gain_factor,
          gains, std::vector<double>(n_workers, config_.max_power),
          std::sqrt(config_.noise_variance), noise_rng);
      averaged = channel::post_process(received, data_sizes_,
                                       decision.schedule,
                                       decision.gain_factor);
    }

    // Sparse recovery back to parameter space.
    cs_codec::RecoveryConfig rcfg = config_.recovery;
    if (config_.lossless_debug) rcfg.mode = cs_codec::RecoveryMode::PASSTHROUGH;
    if (rcfg.sparsity == 0) {
      rcfg.sparsity = std::min(
          {config_.sparsity * scheduled_count, dim,
           std::max<std::size_t>(config_.measurements / 2, 1)});
    }
    const cs_codec::RecoveryResult recovered =
        cs_codec::reconstruct_sparse(*matrix_, averaged, rcfg);
    std::vector<double> estimate = recovered.estimate.to_dense();

    // The target the receiver is trying to reproduce: the exact data-weighted
    // aggregate over the scheduled subset.
    std::vector<std::vector<double>> scheduled_grads;
    std::vector<double> scheduled_sizes;
    for (std::size_t u = 0; u < n_workers; ++u) {
      if (decision.schedule[u] == 1) {
        scheduled_grads.push_back(std::move(locals[u]));
        scheduled_sizes.push_back(data_sizes_[u]);
      }
    }
    const std::vector<double> target =
        exact_global_gradient(scheduled_grads, scheduled_sizes);

    if (config_.gradient_scale == GradientScale::IDEAL_NORM) {
      // Rescale the recovered direction to the norm of the ideal sparsified
      // aggregate; one scalar of side information per round.
      std::vector<double> ideal(dim, 0.0);
      double weight = 0.0;
      for (std::size_t u = 0, s = 0; u < n_workers; ++u) {
        if (decision.schedule[u] != 1) continue;
        for (std::size_t k = 0; k < sparsified[u].indices.size(); ++k) {
          ideal[sparsified[u].indices[k]] +=
              scheduled_sizes[s] * sparsified[u].values[k];
        }
        weight += scheduled_sizes[s];
        ++s;
      }
      for (double& v : ideal) v /= weight;
      const double target_norm = norm2(ideal);
      const double current_norm = norm2(estimate);
      if (current_norm > 0.0 && target_norm > 0.0) {
        const double scale = target_norm / current_norm;
        for (double& v : estimate) v *= scale;
      }
    }

    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = estimate[i] - target[i];
      err += d * d;
    }
    metrics.grad_error_sq = err;

    model_ = apply_update(std::move(model_), estimate, config_.learning_rate);
    const EvalResult eval = evaluate(model_, test_);
    metrics.test_accuracy = eval.accuracy;
    return metrics;
  } catch (const Error& e) {
    fail(e.code(),
         "round " + std::to_string(round_) + ": " + std::string(e.what()));
  }
}

}  // namespace obcsaa::learner
