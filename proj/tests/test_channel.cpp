#include "obcsaa/channel.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "obcsaa/errors.hpp"

using namespace obcsaa;
using namespace obcsaa::channel;
using obcsaa::cs_codec::CompressedUpdate;
using obcsaa::cs_codec::SparseGradient;

TEST_CASE("channel gains follow the folded standard normal") {
  Rng rng(11);
  const std::size_t n = 50000;
  std::vector<double> h = draw_channel_gains(n, rng);
  double sum = 0.0, sum_sq = 0.0;
  for (double g : h) {
    CHECK(g > 0.0);
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / static_cast<double>(n);
  const double second = sum_sq / static_cast<double>(n);
  // E|Z| = sqrt(2/pi), E[Z^2] = 1 for Z ~ N(0,1).
  CHECK(mean == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.02));
  CHECK(second == doctest::Approx(1.0).epsilon(0.03));
  CHECK_THROWS_AS(draw_channel_gains(0, rng), Error);
}

TEST_CASE("channel gains are reproducible by seed") {
  Rng a(99), b(99), c(100);
  CHECK(draw_channel_gains(16, a) == draw_channel_gains(16, b));
  Rng a2(99);
  CHECK(draw_channel_gains(16, a2) != draw_channel_gains(16, c));
}

TEST_CASE("power control inverts the channel") {
  CHECK(power_control_factor(3.0, 1, 2.0, 0.5) == doctest::Approx(12.0));
  CHECK(power_control_factor(3.0, 0, 2.0, 0.5) == 0.0);
  CHECK_THROWS_AS(power_control_factor(3.0, 1, 2.0, 0.0), Error);
  CHECK_THROWS_AS(power_control_factor(3.0, 1, 2.0, -1.0), Error);
  CHECK_THROWS_AS(power_control_factor(0.0, 1, 2.0, 0.5), Error);
  CHECK_THROWS_AS(power_control_factor(3.0, 2, 2.0, 0.5), Error);
}

TEST_CASE("noise-free aggregation matches the hand-computed superposition") {
  std::vector<CompressedUpdate> payloads(3);
  payloads[0].signs = {1, -1, 1, 1};
  payloads[1].signs = {-1, -1, 1, -1};
  payloads[2].signs = {1, 1, 1, 1};  // unscheduled, must be ignored
  std::vector<double> data_sizes{2.0, 3.0, 5.0};
  std::vector<int> schedule{1, 1, 0};
  std::vector<double> gains{1.0, 0.5, 2.0};
  std::vector<double> powers{100.0, 400.0, 0.0};
  const double b = 1.5;
  Rng rng(1);

  std::vector<double> y = aggregate_over_air(payloads, data_sizes, schedule, b,
                                             gains, powers, 0.0, rng);
  // Expected: sum over scheduled of K_i * b * sign, computed by hand.
  std::vector<double> expected{2 * 1.5 * 1 + 3 * 1.5 * -1,
                               2 * 1.5 * -1 + 3 * 1.5 * -1,
                               2 * 1.5 * 1 + 3 * 1.5 * 1,
                               2 * 1.5 * 1 + 3 * 1.5 * -1};
  REQUIRE(y.size() == expected.size());
  for (std::size_t s = 0; s < y.size(); ++s) {
    CHECK(y[s] == doctest::Approx(expected[s]).epsilon(1e-15));
  }
}

TEST_CASE("aggregation noise has the configured variance") {
  const std::size_t len = 20000;
  std::vector<CompressedUpdate> payloads(1);
  payloads[0].signs.assign(len, 1.0);
  std::vector<double> data_sizes{1.0};
  std::vector<int> schedule{1};
  std::vector<double> gains{1.0};
  std::vector<double> powers{1e6};
  Rng rng(77);

  const double sigma = 0.3;
  std::vector<double> y = aggregate_over_air(payloads, data_sizes, schedule,
                                             1.0, gains, powers, sigma, rng);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : y) {
    double z = v - 1.0;  // subtract the deterministic signal part
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / static_cast<double>(len);
  const double var = sum_sq / static_cast<double>(len) - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("aggregation enforces per-worker power budgets") {
  std::vector<CompressedUpdate> payloads(2);
  payloads[0].signs = {1, -1};
  payloads[1].signs = {1, 1};
  std::vector<double> data_sizes{2.0, 4.0};
  std::vector<int> schedule{1, 1};
  std::vector<double> gains{1.0, 2.0};
  Rng rng(5);

  // Worker 0 needs (K*b/h)^2 = (2*1.5/1)^2 = 9, worker 1 needs (4*1.5/2)^2 = 9.
  std::vector<double> exact{9.0, 9.0};
  CHECK_NOTHROW(aggregate_over_air(payloads, data_sizes, schedule, 1.5, gains,
                                   exact, 0.0, rng));
  std::vector<double> tight{9.0, 8.9};
  CHECK_THROWS_AS(aggregate_over_air(payloads, data_sizes, schedule, 1.5,
                                     gains, tight, 0.0, rng),
                  Error);
  try {
    aggregate_over_air(payloads, data_sizes, schedule, 1.5, gains, tight, 0.0,
                       rng);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
}

TEST_CASE("aggregation validates payload shapes and the schedule") {
  std::vector<CompressedUpdate> payloads(2);
  payloads[0].signs = {1, -1};
  payloads[1].signs = {1, 1, -1};
  std::vector<double> data_sizes{1.0, 1.0};
  std::vector<int> both{1, 1};
  std::vector<double> gains{1.0, 1.0};
  std::vector<double> powers{100.0, 100.0};
  Rng rng(3);

  CHECK_THROWS_AS(aggregate_over_air(payloads, data_sizes, both, 1.0, gains,
                                     powers, 0.0, rng),
                  Error);
  std::vector<int> none{0, 0};
  CHECK_THROWS_AS(aggregate_over_air(payloads, data_sizes, none, 1.0, gains,
                                     powers, 0.0, rng),
                  Error);
  std::vector<int> bad{1, 2};
  CHECK_THROWS_AS(aggregate_over_air(payloads, data_sizes, bad, 1.0, gains,
                                     powers, 0.0, rng),
                  Error);
  // Mismatched payload on an unscheduled worker is fine.
  std::vector<int> only_first{1, 0};
  CHECK_NOTHROW(aggregate_over_air(payloads, data_sizes, only_first, 1.0,
                                   gains, powers, 0.0, rng));
}

TEST_CASE("lossless aggregation sums scheduled sparse updates") {
  SparseGradient g0;
  g0.dimension = 5;
  g0.indices = {0, 3};
  g0.values = {1.0, -2.0};
  SparseGradient g1;
  g1.dimension = 5;
  g1.indices = {3, 4};
  g1.values = {0.5, 4.0};
  SparseGradient g2;
  g2.dimension = 5;
  g2.indices = {1};
  g2.values = {9.0};  // unscheduled

  std::vector<double> data_sizes{2.0, 10.0, 7.0};
  std::vector<int> schedule{1, 1, 0};
  std::vector<double> y =
      aggregate_payloads({g0, g1, g2}, data_sizes, schedule);
  CHECK(y == std::vector<double>{2.0, 0.0, 0.0, -4.0 + 5.0, 40.0});

  SparseGradient wrong_dim;
  wrong_dim.dimension = 4;
  CHECK_THROWS_AS(
      aggregate_payloads({g0, wrong_dim, g2}, data_sizes, schedule), Error);
  CHECK_THROWS_AS(
      aggregate_payloads({g0, g1, g2}, data_sizes, {0, 0, 0}), Error);
}

TEST_CASE("post processing divides by the scheduled weight") {
  std::vector<double> y{6.0, -12.0};
  std::vector<double> data_sizes{1.0, 2.0, 3.0};
  std::vector<int> schedule{1, 0, 1};
  // Denominator: (1 + 3) * 1.5 = 6.
  std::vector<double> out = post_process(y, data_sizes, schedule, 1.5);
  CHECK(out == std::vector<double>{1.0, -2.0});

  CHECK_THROWS_AS(post_process(y, data_sizes, {0, 0, 0}, 1.5), Error);
  CHECK_THROWS_AS(post_process(y, data_sizes, schedule, 0.0), Error);
  try {
    post_process(y, data_sizes, {0, 0, 0}, 1.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
}
