#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "obcsaa/bounds.hpp"

namespace obcsaa::scheduler {

struct WorkerProfile {
  double data_size = 0.0;  // local sample count
  double max_power = 0.0;  // transmit power budget
};

// Everything the per-round joint selection/power problem needs.
struct SchedulerInstance {
  std::vector<double> gains;           // channel magnitudes, one per worker
  std::vector<WorkerProfile> workers;  // sample counts and power budgets
  bounds::BoundParams bound_params;    // objective constants
};

void validate(const SchedulerInstance& instance);

struct SchedulingDecision {
  std::vector<int> schedule;  // binary participation vector
  double gain_factor = 0.0;   // common power scaling factor b
};

enum class SolverKind { ENUMERATION, ADMM };

struct SchedulerResult {
  SchedulingDecision decision;
  double objective = 0.0;
  SolverKind solver = SolverKind::ENUMERATION;
  std::size_t iterations = 0;
  bool converged = false;
};

// The per-round objective being minimised (2L times the convergence term).
double objective_R(const SchedulerInstance& instance,
                   const std::vector<int>& schedule, double gain_factor);

// Largest power scaling factor every scheduled worker can afford; for a fixed
// schedule the objective is strictly decreasing in the factor, so this value
// is also the optimal one.
double feasible_b_max(const SchedulerInstance& instance,
                      const std::vector<int>& schedule);

// Exhaustive search refuses above this many workers.
inline constexpr std::size_t kEnumerationCap = 20;

// Exact optimum over all nonempty schedules, each paired with its largest
// feasible power scaling factor.
SchedulerResult solve_enumeration(const SchedulerInstance& instance);

struct AdmmOptions {
  double step_c = 1.0;
  double abs_tol = 1e-4;   // on the consensus residual sum |q_i - b|
  double rel_tol = 1e-4;   // on the change of b between iterations
  std::size_t max_iter = 500;
};

// Iterate state of the dual decomposition. The solver nondimensionalizes the
// problem: r, q and b are expressed in units of the all-ones feasible power
// factor, so the unit step size and the absolute tolerances behave the same
// way on instances of any physical scale.
struct DualState {
  std::vector<double> r;         // per-worker share of the power scaling
  std::vector<double> q;         // consensus copies of the scaling factor
  double b = 0.0;                // common power scaling factor
  std::vector<int> schedule;     // current binary selection
  std::vector<double> nu;        // power-budget multipliers, kept >= 0
  std::vector<double> xi;        // multipliers of r_i = beta_i q_i
  std::vector<double> varsigma;  // multipliers of q_i = b
  double step_c = 1.0;
};

// Closed-form minimiser of worker i's augmented-Lagrangian subproblem;
// returns the new consensus value and selection bit (ties pick 1).
std::pair<double, int> admm_worker_subproblem(std::size_t worker,
                                              const DualState& state,
                                              const SchedulerInstance& instance);

// Scalable (suboptimal) solver; the final decision is always repaired to hard
// feasibility by recomputing the scaling factor from the rounded schedule.
// The observer, when set, sees the state after every multiplier update.
SchedulerResult solve_admm(
    const SchedulerInstance& instance, const AdmmOptions& options = {},
    const std::function<void(const DualState&)>& observer = nullptr);

}  // namespace obcsaa::scheduler
