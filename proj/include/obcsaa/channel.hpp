#pragma once

#include <cstddef>
#include <vector>

#include "obcsaa/cs_codec.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::channel {

// Per-round fading magnitudes: |N(0,1)| draws, strictly positive.
std::vector<double> draw_channel_gains(std::size_t n_workers, Rng& rng);

// Transmit scaling a scheduled worker applies so that all scheduled payloads
// arrive with amplitude data_size * gain_factor. Returns 0 for unscheduled
// workers.
double power_control_factor(double data_size, int scheduled,
                            double gain_factor, double channel_gain);

// Sums the scheduled antipodal payloads as the receiver would see them after
// channel inversion, adds i.i.d. Gaussian receiver noise, and enforces every
// scheduled worker's transmit-power budget (with a tiny slack for rounding).
std::vector<double> aggregate_over_air(
    const std::vector<cs_codec::CompressedUpdate>& payloads,
    const std::vector<double>& data_sizes, const std::vector<int>& schedule,
    double gain_factor, const std::vector<double>& channel_gains,
    const std::vector<double>& max_powers, double noise_std, Rng& noise_rng);

// Noise-free debug aggregation that bypasses quantisation: sums the scheduled
// sparse updates as dense vectors weighted by data size.
std::vector<double> aggregate_payloads(
    const std::vector<cs_codec::SparseGradient>& updates,
    const std::vector<double>& data_sizes, const std::vector<int>& schedule);

// Rescales the received superposition by the total scheduled weight so the
// result estimates a weighted average instead of a weighted sum.
std::vector<double> post_process(const std::vector<double>& received,
                                 const std::vector<double>& data_sizes,
                                 const std::vector<int>& schedule,
                                 double gain_factor);

}  // namespace obcsaa::channel
