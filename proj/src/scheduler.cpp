#include "obcsaa/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "obcsaa/errors.hpp"

namespace obcsaa::scheduler {

namespace {

constexpr double kPositivityFloor = 1e-12;

struct ObjectiveConstants {
  double c2 = 0.0;             // squared amplification factor
  double fixed = 0.0;          // C^2 (1 + (1+delta)(D-kappa) G^2 / (S D))
  double per_worker = 0.0;     // (1+delta)((D-kappa)/D) G^2
  double noise = 0.0;          // C^2 sigma^2
  double rho1_over_k = 0.0;    // rho1 / K
  double total_data = 0.0;     // K
};

ObjectiveConstants objective_constants(const bounds::BoundParams& p) {
  ObjectiveConstants c;
  c.c2 = bounds::c_squared(p.delta);
  const double d = static_cast<double>(p.dimension);
  const double s = static_cast<double>(p.measurements);
  const double kept = static_cast<double>(p.sparsity);
  const double g2 = p.gradient_bound * p.gradient_bound;
  c.per_worker = (1.0 + p.delta) * ((d - kept) / d) * g2;
  c.fixed = c.c2 * (1.0 + (1.0 + p.delta) * (d - kept) * g2 / (s * d));
  c.noise = c.c2 * p.noise_variance;
  c.total_data = p.total_data();
  c.rho1_over_k = p.rho1 / c.total_data;
  return c;
}

}  // namespace

void validate(const SchedulerInstance& instance) {
  bounds::validate(instance.bound_params);
  const std::size_t n = instance.gains.size();
  if (n == 0) {
    fail(ErrorCode::Argument, "scheduler instance: need at least one worker");
  }
  if (instance.workers.size() != n ||
      instance.bound_params.data_sizes.size() != n) {
    fail(ErrorCode::Dimension,
         "scheduler instance: per-worker arrays must all have length " +
             std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(instance.gains[i] > 0.0)) {
      fail(ErrorCode::Argument,
           "scheduler instance: channel gains must be positive");
    }
    if (!(instance.workers[i].data_size > 0.0) ||
        !(instance.workers[i].max_power > 0.0)) {
      fail(ErrorCode::Argument,
           "scheduler instance: worker data sizes and power budgets must be "
           "positive");
    }
    if (instance.workers[i].data_size !=
        instance.bound_params.data_sizes[i]) {
      fail(ErrorCode::Argument,
           "scheduler instance: worker " + std::to_string(i) +
               " data size disagrees with the bound parameters");
    }
  }
}

double objective_R(const SchedulerInstance& instance,
                   const std::vector<int>& schedule, double gain_factor) {
  validate(instance);
  if (schedule.size() != instance.gains.size()) {
    fail(ErrorCode::Dimension, "objective_R: schedule length mismatch");
  }
  if (!(gain_factor > 0.0)) {
    fail(ErrorCode::Argument, "objective_R: power scaling must be positive");
  }
  const ObjectiveConstants c = objective_constants(instance.bound_params);

  double dropped_data = 0.0;
  double scheduled_count = 0.0;
  double scheduled_weight = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] != 0 && schedule[i] != 1) {
      fail(ErrorCode::Argument, "objective_R: schedule entries must be 0 or 1");
    }
    if (schedule[i] == 1) {
      scheduled_count += 1.0;
      scheduled_weight += instance.workers[i].data_size * gain_factor;
    } else {
      dropped_data += instance.workers[i].data_size;
    }
  }
  if (!(scheduled_weight > 0.0)) {
    fail(ErrorCode::Infeasible,
         "objective_R: schedule selects no worker (noise term unbounded)");
  }
  return dropped_data * c.rho1_over_k + c.fixed +
         c.noise / (scheduled_weight * scheduled_weight) +
         scheduled_count * c.per_worker;
}

double feasible_b_max(const SchedulerInstance& instance,
                      const std::vector<int>& schedule) {
  validate(instance);
  if (schedule.size() != instance.gains.size()) {
    fail(ErrorCode::Dimension, "feasible_b_max: schedule length mismatch");
  }
  double b_max = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] == 0) continue;
    any = true;
    const double cap = instance.gains[i] *
                       std::sqrt(instance.workers[i].max_power) /
                       instance.workers[i].data_size;
    b_max = std::min(b_max, cap);
  }
  if (!any) {
    fail(ErrorCode::Infeasible, "feasible_b_max: schedule selects no worker");
  }
  return b_max;
}

SchedulerResult solve_enumeration(const SchedulerInstance& instance) {
  validate(instance);
  const std::size_t n = instance.gains.size();
  if (n > kEnumerationCap) {
    fail(ErrorCode::Argument,
         "solve_enumeration: " + std::to_string(n) +
             " workers exceed the exhaustive-search cap of " +
             std::to_string(kEnumerationCap) + "; use the ADMM solver");
  }

  SchedulerResult result;
  result.solver = SolverKind::ENUMERATION;
  result.objective = std::numeric_limits<double>::infinity();

  std::vector<int> schedule(n, 0);
  const std::size_t total = (std::size_t{1} << n) - 1;
  for (std::size_t mask = 1; mask <= total; ++mask) {
    for (std::size_t i = 0; i < n; ++i) {
      schedule[i] = (mask >> i) & 1u ? 1 : 0;
    }
    const double b = feasible_b_max(instance, schedule);
    const double value = objective_R(instance, schedule, b);
    if (value < result.objective) {
      result.objective = value;
      result.decision.schedule = schedule;
      result.decision.gain_factor = b;
    }
  }
  result.iterations = total;
  result.converged = true;
  return result;
}

namespace {

// Nondimensionalized view of the decomposition: iterates live in units of the
// all-ones feasible power factor, so a unit step size and absolute tolerances
// behave identically across instances of any physical scale.
struct ScaledProblem {
  double scale = 1.0;             // all-ones feasible factor, the unit of r/q/b
  std::vector<double> caps;       // per-worker power caps in scaled units (>= 1)
  double noise = 0.0;             // C^2 sigma^2 / scale^2
  std::vector<double> data;       // worker data sizes
};

// Value of the r-part of the augmented Lagrangian (terms that depend on r).
double r_objective(const std::vector<double>& r, const DualState& state,
                   const ScaledProblem& sp) {
  double weighted = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) weighted += sp.data[i] * r[i];
  double value = sp.noise / (weighted * weighted);
  for (std::size_t i = 0; i < r.size(); ++i) {
    value += state.nu[i] * r[i] * r[i];
    const double gap =
        r[i] - static_cast<double>(state.schedule[i]) * state.q[i];
    value += state.xi[i] * gap + 0.5 * state.step_c * gap * gap;
  }
  return value;
}

// Damped projected Newton on the strictly convex r-subproblem. The Hessian is
// diagonal plus a rank-one term from the noise expression, so the Newton
// direction comes from the Sherman-Morrison identity.
void minimize_r(DualState& state, const ScaledProblem& sp) {
  const std::size_t n = state.r.size();
  std::vector<double> grad(n), diag(n), dir(n), trial(n);

  for (int newton = 0; newton < 60; ++newton) {
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) weighted += sp.data[i] * state.r[i];
    weighted = std::max(weighted, kPositivityFloor);
    const double inv3 = 1.0 / (weighted * weighted * weighted);

    double grad_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = static_cast<double>(state.schedule[i]) * state.q[i];
      grad[i] = -2.0 * sp.noise * sp.data[i] * inv3 +
                2.0 * state.nu[i] * state.r[i] + state.xi[i] +
                state.step_c * (state.r[i] - target);
      diag[i] = 2.0 * state.nu[i] + state.step_c;
      grad_norm = std::max(grad_norm, std::fabs(grad[i]));
    }
    if (grad_norm < 1e-9) break;

    // H = diag + gamma k k^T with gamma = 6 C^2 sigma^2 / weighted^4.
    const double gamma = 6.0 * sp.noise * inv3 / weighted;
    double k_dinv_g = 0.0, k_dinv_k = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      k_dinv_g += sp.data[i] * grad[i] / diag[i];
      k_dinv_k += sp.data[i] * sp.data[i] / diag[i];
    }
    const double correction = gamma * k_dinv_g / (1.0 + gamma * k_dinv_k);
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = (grad[i] - correction * sp.data[i]) / diag[i];
    }

    const double before = r_objective(state.r, state, sp);
    double step = 1.0;
    bool moved = false;
    for (int damp = 0; damp < 40; ++damp) {
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::max(kPositivityFloor, state.r[i] - step * dir[i]);
      }
      if (r_objective(trial, state, sp) < before) {
        state.r = trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // numerically converged
  }
}

}  // namespace

namespace {

std::pair<double, int> worker_subproblem(std::size_t worker,
                                         const DualState& state,
                                         const ObjectiveConstants& c,
                                         double data_size) {
  const double cc = state.step_c;
  const double b = state.b;
  const double r_i = state.r[worker];
  const double xi = state.xi[worker];
  const double vs = state.varsigma[worker];
  const double k_i = data_size;

  // Branch beta = 0: only the consensus terms depend on q.
  const double q0 = std::max(kPositivityFloor, b - vs / cc);
  const double value0 = k_i * c.rho1_over_k + xi * r_i + 0.5 * cc * r_i * r_i +
                        vs * (q0 - b) + 0.5 * cc * (q0 - b) * (q0 - b);

  // Branch beta = 1: both coupling terms are quadratics in q.
  const double q1 =
      std::max(kPositivityFloor, (xi - vs) / (2.0 * cc) + 0.5 * (r_i + b));
  const double value1 = c.per_worker + xi * (r_i - q1) +
                        0.5 * cc * (r_i - q1) * (r_i - q1) + vs * (q1 - b) +
                        0.5 * cc * (q1 - b) * (q1 - b);

  if (value1 <= value0) return {q1, 1};  // ties prefer participation
  return {q0, 0};
}

}  // namespace

std::pair<double, int> admm_worker_subproblem(std::size_t worker,
                                              const DualState& state,
                                              const SchedulerInstance& instance) {
  if (worker >= instance.gains.size()) {
    fail(ErrorCode::Argument,
         "admm_worker_subproblem: worker index out of range");
  }
  const ObjectiveConstants c = objective_constants(instance.bound_params);
  return worker_subproblem(worker, state, c,
                           instance.workers[worker].data_size);
}

SchedulerResult solve_admm(
    const SchedulerInstance& instance, const AdmmOptions& options,
    const std::function<void(const DualState&)>& observer) {
  validate(instance);
  if (!(options.step_c > 0.0)) {
    fail(ErrorCode::Argument, "solve_admm: step size must be positive");
  }
  if (!(options.abs_tol > 0.0) || !(options.rel_tol > 0.0) ||
      options.max_iter == 0) {
    fail(ErrorCode::Argument, "solve_admm: tolerances and max_iter must be positive");
  }

  const std::size_t n = instance.gains.size();
  const ObjectiveConstants c = objective_constants(instance.bound_params);

  ScaledProblem sp;
  sp.scale = feasible_b_max(instance, std::vector<int>(n, 1));
  sp.noise = c.noise / (sp.scale * sp.scale);
  sp.caps.resize(n);
  sp.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sp.data[i] = instance.workers[i].data_size;
    sp.caps[i] = instance.gains[i] * std::sqrt(instance.workers[i].max_power) /
                 (instance.workers[i].data_size * sp.scale);
  }

  DualState state;
  state.step_c = options.step_c;
  state.schedule.assign(n, 1);
  state.b = 1.0;  // the all-ones feasible factor is the unit of the iterates
  state.r.assign(n, 1.0);
  state.q.assign(n, 1.0);
  state.nu.assign(n, 0.0);
  state.xi.assign(n, 0.0);
  state.varsigma.assign(n, 0.0);

  // Start the power multipliers near (but not at) the values that make the
  // initial point stationary for the r-block; starting from zero lets the
  // first r-update overshoot far into infeasibility, while starting exactly
  // at stationarity parks the iteration at the all-ones fixed point.
  {
    double w0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) w0 += sp.data[i];
    for (std::size_t i = 0; i < n; ++i) {
      state.nu[i] = 0.5 * sp.noise * sp.data[i] / (w0 * w0 * w0);
    }
  }

  SchedulerResult result;
  result.solver = SolverKind::ADMM;
  bool converged = false;
  double incumbent_value = std::numeric_limits<double>::infinity();
  std::vector<int> incumbent_schedule;

  std::size_t iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const double b_prev = state.b;

    // Step 1: minimise over (r, b). The two blocks are separable given the
    // consensus copies: b has a closed form, r needs the Newton solve.
    double q_sum = 0.0, vs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q_sum += state.q[i];
      vs_sum += state.varsigma[i];
    }
    state.b = std::max(kPositivityFloor,
                       (q_sum + vs_sum / state.step_c) / static_cast<double>(n));
    minimize_r(state, sp);

    // Step 2: per-worker selection and consensus updates (order-independent).
    for (std::size_t i = 0; i < n; ++i) {
      auto [q_i, beta_i] = worker_subproblem(i, state, c, sp.data[i]);
      state.q[i] = q_i;
      state.schedule[i] = beta_i;
    }

    // Step 3: multiplier ascent; the power multiplier stays nonnegative.
    for (std::size_t i = 0; i < n; ++i) {
      state.nu[i] = std::max(
          0.0, state.nu[i] + state.step_c * (state.r[i] * state.r[i] -
                                             sp.caps[i] * sp.caps[i]));
      state.xi[i] += state.step_c *
                     (state.r[i] - static_cast<double>(state.schedule[i]) *
                                       state.q[i]);
      state.varsigma[i] += state.step_c * (state.q[i] - state.b);
    }
    if (observer) observer(state);

    {
      bool nonzero = false;
      for (int s : state.schedule) nonzero = nonzero || s == 1;
      if (nonzero) {
        const double value = objective_R(
            instance, state.schedule, feasible_b_max(instance, state.schedule));
        if (value < incumbent_value) {
          incumbent_value = value;
          incumbent_schedule = state.schedule;
        }
      }
    }

    double consensus_residual = 0.0;
    double coupling_residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      consensus_residual += std::fabs(state.q[i] - state.b);
      coupling_residual +=
          std::fabs(state.r[i] -
                    static_cast<double>(state.schedule[i]) * state.q[i]);
    }
    if (consensus_residual < options.abs_tol &&
        coupling_residual < options.abs_tol &&
        std::fabs(state.b - b_prev) < options.rel_tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  // Repair to hard feasibility: keep the rounded schedule, recompute the
  // scaling factor from it. An empty schedule falls back to the best single
  // worker, the nearest nonempty selection.
  std::vector<int> schedule =
      incumbent_schedule.empty() ? state.schedule : incumbent_schedule;
  bool any = false;
  for (int s : schedule) any = any || s == 1;
  if (!any) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_worker = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> single(n, 0);
      single[i] = 1;
      const double value =
          objective_R(instance, single, feasible_b_max(instance, single));
      if (value < best) {
        best = value;
        best_worker = i;
      }
    }
    schedule.assign(n, 0);
    schedule[best_worker] = 1;
  }

  result.decision.schedule = schedule;
  result.decision.gain_factor = feasible_b_max(instance, schedule);
  result.objective =
      objective_R(instance, schedule, result.decision.gain_factor);
  result.iterations = iter;
  result.converged = converged;
  return result;
}

}  // namespace obcsaa::scheduler
