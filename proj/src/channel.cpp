#include "obcsaa/channel.hpp"

#include <cmath>
#include <string>

#include "obcsaa/errors.hpp"

namespace obcsaa::channel {

namespace {

constexpr double kPowerSlack = 1e-12;

void check_worker_arrays(std::size_t n, const std::vector<double>& data_sizes,
                         const std::vector<int>& schedule, const char* where) {
  if (data_sizes.size() != n || schedule.size() != n) {
    fail(ErrorCode::Dimension,
         std::string(where) + ": per-worker arrays must all have length " +
             std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(data_sizes[i] > 0.0)) {
      fail(ErrorCode::Argument,
           std::string(where) + ": data sizes must be positive");
    }
    if (schedule[i] != 0 && schedule[i] != 1) {
      fail(ErrorCode::Argument,
           std::string(where) + ": schedule entries must be 0 or 1");
    }
  }
}

}  // namespace

std::vector<double> draw_channel_gains(std::size_t n_workers, Rng& rng) {
  if (n_workers == 0) {
    fail(ErrorCode::Argument, "draw_channel_gains: need at least one worker");
  }
  std::vector<double> gains;
  gains.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) {
    double g = std::fabs(rng.normal());
    while (g == 0.0) g = std::fabs(rng.normal());
    gains.push_back(g);
  }
  return gains;
}

double power_control_factor(double data_size, int scheduled,
                            double gain_factor, double channel_gain) {
  if (scheduled != 0 && scheduled != 1) {
    fail(ErrorCode::Argument, "power_control_factor: schedule must be 0 or 1");
  }
  if (scheduled == 0) return 0.0;
  if (!(data_size > 0.0)) {
    fail(ErrorCode::Argument, "power_control_factor: data size must be > 0");
  }
  if (!(gain_factor > 0.0)) {
    fail(ErrorCode::Argument, "power_control_factor: gain factor must be > 0");
  }
  if (!(channel_gain > 0.0)) {
    fail(ErrorCode::Argument,
         "power_control_factor: channel gain must be > 0");
  }
  return data_size * gain_factor / channel_gain;
}

std::vector<double> aggregate_over_air(
    const std::vector<cs_codec::CompressedUpdate>& payloads,
    const std::vector<double>& data_sizes, const std::vector<int>& schedule,
    double gain_factor, const std::vector<double>& channel_gains,
    const std::vector<double>& max_powers, double noise_std, Rng& noise_rng) {
  const std::size_t n = payloads.size();
  check_worker_arrays(n, data_sizes, schedule, "aggregate_over_air");
  if (channel_gains.size() != n || max_powers.size() != n) {
    fail(ErrorCode::Dimension,
         "aggregate_over_air: per-worker arrays must all have length " +
             std::to_string(n));
  }
  if (!(gain_factor > 0.0)) {
    fail(ErrorCode::Argument, "aggregate_over_air: gain factor must be > 0");
  }
  if (!(noise_std >= 0.0)) {
    fail(ErrorCode::Argument, "aggregate_over_air: noise level must be >= 0");
  }

  std::size_t payload_len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (schedule[i] == 0) continue;  // silent workers are never validated
    if (!(channel_gains[i] > 0.0)) {
      fail(ErrorCode::Argument,
           "aggregate_over_air: scheduled worker " + std::to_string(i) +
               " has a non-positive channel gain");
    }
    const double amplitude =
        power_control_factor(data_sizes[i], 1, gain_factor, channel_gains[i]);
    if (amplitude * amplitude > max_powers[i] * (1.0 + kPowerSlack)) {
      fail(ErrorCode::Infeasible,
           "aggregate_over_air: worker " + std::to_string(i) +
               " would exceed its transmit power budget");
    }
    if (payload_len == 0) {
      payload_len = payloads[i].signs.size();
      if (payload_len == 0) {
        fail(ErrorCode::Argument,
             "aggregate_over_air: scheduled worker " + std::to_string(i) +
                 " has an empty payload");
      }
    } else if (payloads[i].signs.size() != payload_len) {
      fail(ErrorCode::Dimension,
           "aggregate_over_air: scheduled payloads disagree on length");
    }
  }
  if (payload_len == 0) {
    fail(ErrorCode::Infeasible, "aggregate_over_air: empty schedule");
  }

  std::vector<double> received(payload_len, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (schedule[i] == 0) continue;
    const double weight = data_sizes[i] * gain_factor;
    for (std::size_t s = 0; s < payload_len; ++s) {
      received[s] += weight * payloads[i].signs[s];
    }
  }
  if (noise_std > 0.0) {
    for (double& v : received) v += noise_rng.normal(0.0, noise_std);
  }
  return received;
}

std::vector<double> aggregate_payloads(
    const std::vector<cs_codec::SparseGradient>& updates,
    const std::vector<double>& data_sizes, const std::vector<int>& schedule) {
  const std::size_t n = updates.size();
  check_worker_arrays(n, data_sizes, schedule, "aggregate_payloads");

  std::size_t dim = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (schedule[i] == 0) continue;
    if (dim == 0) {
      dim = updates[i].dimension;
    } else if (updates[i].dimension != dim) {
      fail(ErrorCode::Dimension,
           "aggregate_payloads: scheduled updates disagree on dimension");
    }
  }
  if (dim == 0) {
    fail(ErrorCode::Infeasible, "aggregate_payloads: empty schedule");
  }

  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (schedule[i] == 0) continue;
    const cs_codec::SparseGradient& g = updates[i];
    for (std::size_t j = 0; j < g.indices.size(); ++j) {
      out[g.indices[j]] += data_sizes[i] * g.values[j];
    }
  }
  return out;
}

std::vector<double> post_process(const std::vector<double>& received,
                                 const std::vector<double>& data_sizes,
                                 const std::vector<int>& schedule,
                                 double gain_factor) {
  check_worker_arrays(data_sizes.size(), data_sizes, schedule, "post_process");
  if (!(gain_factor > 0.0)) {
    fail(ErrorCode::Argument, "post_process: gain factor must be > 0");
  }
  double total_weight = 0.0;
  for (std::size_t i = 0; i < data_sizes.size(); ++i) {
    if (schedule[i] == 1) total_weight += data_sizes[i] * gain_factor;
  }
  if (!(total_weight > 0.0)) {
    fail(ErrorCode::Infeasible, "post_process: no scheduled weight");
  }
  std::vector<double> out(received.size(), 0.0);
  for (std::size_t s = 0; s < received.size(); ++s) {
    out[s] = received[s] / total_weight;
  }
  return out;
}

}  // namespace obcsaa::channel
