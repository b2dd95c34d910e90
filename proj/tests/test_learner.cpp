#include "obcsaa/learner.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "obcsaa/errors.hpp"
#include "obcsaa/rng.hpp"

using namespace obcsaa;
using learner::Architecture;
using learner::LocalDataset;
using learner::Model;

namespace {

LocalDataset random_dataset(std::size_t n, std::size_t features,
                            std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  LocalDataset data;
  data.feature_dim = features;
  data.features.resize(n * features);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n * features; ++i) {
    data.features[i] = static_cast<float>(rng.uniform(0.0, 1.0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    data.labels[i] = static_cast<int>(rng.below(classes));
  }
  return data;
}

double loss_at(const Model& model, const LocalDataset& data) {
  return learner::local_gradient(model, data).loss;
}

// Central finite differences on every coordinate.
void check_gradient_against_differences(Model model, const LocalDataset& data,
                                        double step, double rel_tol) {
  const auto analytic = learner::local_gradient(model, data);
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    const double saved = model.weights[i];
    model.weights[i] = saved + step;
    const double up = loss_at(model, data);
    model.weights[i] = saved - step;
    const double down = loss_at(model, data);
    model.weights[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::fabs(numeric),
                                   std::fabs(analytic.gradient[i]), 1e-8});
    CHECK(std::fabs(numeric - analytic.gradient[i]) / scale <= rel_tol);
  }
}

}  // namespace

TEST_CASE("parameter counts match the architectures") {
  CHECK(Architecture::mlp(784, 64, 10).param_count() == 50890);
  CHECK(Architecture::mlp(784, 16, 10).param_count() == 12730);
  CHECK(Architecture::logistic(199, 10).param_count() == 2000);
  CHECK(Architecture::logistic(3, 4).param_count() == 16);

  CHECK_THROWS_AS(Architecture::mlp(0, 4, 2), Error);
  CHECK_THROWS_AS(Architecture::mlp(4, 0, 2), Error);
  CHECK_THROWS_AS(Architecture::logistic(0, 2), Error);
}

TEST_CASE("initialization is seeded, bounded, and biases start at zero") {
  const auto arch = Architecture::mlp(12, 5, 3);
  const Model a = learner::init_model(arch, 42);
  const Model b = learner::init_model(arch, 42);
  const Model c = learner::init_model(arch, 43);
  CHECK(a.weights == b.weights);
  CHECK(a.weights != c.weights);
  CHECK(a.weights.size() == arch.param_count());

  const double limit1 = std::sqrt(6.0 / (12 + 5));
  const double limit2 = std::sqrt(6.0 / (5 + 3));
  const std::size_t b1 = 5 * 12;
  for (std::size_t i = 0; i < b1; ++i) {
    CHECK(std::fabs(a.weights[i]) <= limit1);
  }
  for (std::size_t h = 0; h < 5; ++h) CHECK(a.weights[b1 + h] == 0.0);
  const std::size_t w2 = b1 + 5;
  for (std::size_t i = 0; i < 3 * 5; ++i) {
    CHECK(std::fabs(a.weights[w2 + i]) <= limit2);
  }
  for (std::size_t o = 0; o < 3; ++o) CHECK(a.weights[w2 + 15 + o] == 0.0);

  bool some_nonzero = false;
  for (std::size_t i = 0; i < b1; ++i) some_nonzero |= a.weights[i] != 0.0;
  CHECK(some_nonzero);
}

TEST_CASE("logistic gradient matches central finite differences") {
  const auto arch = Architecture::logistic(3, 4);  // 16 parameters
  Model model = learner::init_model(arch, 7);
  const auto data = random_dataset(40, 3, 4, 11);
  check_gradient_against_differences(model, data, 1e-5, 1e-6);
}

TEST_CASE("MLP gradient matches central finite differences") {
  const auto arch = Architecture::mlp(3, 2, 3);  // 17 parameters
  Model model = learner::init_model(arch, 19);
  // Bias the hidden units away from the ReLU kink so the loss is smooth in a
  // neighbourhood of the test point.
  model.weights[3 * 2] = 0.8;
  model.weights[3 * 2 + 1] = 0.9;
  const auto data = random_dataset(25, 3, 3, 13);
  check_gradient_against_differences(model, data, 1e-5, 1e-6);
}

TEST_CASE("output-layer gradient at uniform prediction is p minus onehot") {
  const auto arch = Architecture::logistic(5, 4);
  Model model;
  model.architecture = arch;
  model.weights.assign(arch.param_count(), 0.0);  // uniform predictor

  LocalDataset data = random_dataset(80, 5, 4, 23);
  const auto result = learner::local_gradient(model, data);

  std::vector<double> freq(4, 0.0);
  for (int y : data.labels) freq[static_cast<std::size_t>(y)] += 1.0 / 80.0;
  const double* gb = result.gradient.data() + 4 * 5;
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(gb[c] == doctest::Approx(0.25 - freq[c]).epsilon(1e-12));
  }
  CHECK(result.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("duplicating every sample leaves the gradient unchanged") {
  const auto arch = Architecture::mlp(4, 3, 2);
  const Model model = learner::init_model(arch, 31);
  const auto data = random_dataset(15, 4, 2, 37);

  LocalDataset doubled = data;
  doubled.features.insert(doubled.features.end(), data.features.begin(),
                          data.features.end());
  doubled.labels.insert(doubled.labels.end(), data.labels.begin(),
                        data.labels.end());

  const auto once = learner::local_gradient(model, data);
  const auto twice = learner::local_gradient(model, doubled);
  CHECK(once.loss == doctest::Approx(twice.loss).epsilon(1e-12));
  for (std::size_t i = 0; i < once.gradient.size(); ++i) {
    CHECK(once.gradient[i] == doctest::Approx(twice.gradient[i]).epsilon(1e-12));
  }
}

TEST_CASE("global gradient is the data-size weighted mean") {
  const std::vector<std::vector<double>> grads = {
      {1.0, 2.0, 3.0}, {4.0, -2.0, 0.0}, {0.5, 0.5, 0.5}};

  SUBCASE("equal sizes give the arithmetic mean") {
    const auto g = learner::exact_global_gradient(grads, {5.0, 5.0, 5.0});
    CHECK(g[0] == doctest::Approx((1.0 + 4.0 + 0.5) / 3.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx((2.0 - 2.0 + 0.5) / 3.0).epsilon(1e-15));
  }

  SUBCASE("single worker passes through") {
    const auto g = learner::exact_global_gradient({grads[0]}, {7.0});
    CHECK(g == grads[0]);
  }

  SUBCASE("weighted case matches an element-wise oracle") {
    const std::vector<double> sizes = {2.0, 3.0, 5.0};
    const auto g = learner::exact_global_gradient(grads, sizes);
    for (std::size_t i = 0; i < 3; ++i) {
      const double want =
          (2.0 * grads[0][i] + 3.0 * grads[1][i] + 5.0 * grads[2][i]) / 10.0;
      CHECK(g[i] == doctest::Approx(want).epsilon(1e-12));
    }
  }

  SUBCASE("shape and sign errors") {
    CHECK_THROWS_AS(learner::exact_global_gradient(grads, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(learner::exact_global_gradient(grads, {1.0, 2.0, 0.0}),
                    Error);
    CHECK_THROWS_AS(
        learner::exact_global_gradient({{1.0, 2.0}, {1.0}}, {1.0, 1.0}),
        Error);
  }
}

TEST_CASE("updates are linear in the gradient") {
  const auto arch = Architecture::logistic(4, 3);
  const Model model = learner::init_model(arch, 47);
  std::vector<double> g1(arch.param_count()), g2(arch.param_count());
  Rng rng(53);
  for (auto& v : g1) v = rng.normal();
  for (auto& v : g2) v = rng.normal();

  const Model zero_step =
      learner::apply_update(model, std::vector<double>(arch.param_count(), 0.0),
                            0.1);
  CHECK(zero_step.weights == model.weights);

  Model sequential = learner::apply_update(model, g1, 0.1);
  sequential = learner::apply_update(sequential, g2, 0.1);
  std::vector<double> combined(arch.param_count());
  for (std::size_t i = 0; i < combined.size(); ++i) combined[i] = g1[i] + g2[i];
  const Model joint = learner::apply_update(model, combined, 0.1);
  for (std::size_t i = 0; i < combined.size(); ++i) {
    CHECK(sequential.weights[i] == doctest::Approx(joint.weights[i]).epsilon(1e-15));
  }

  CHECK_THROWS_AS(learner::apply_update(model, g1, 0.0), Error);
  CHECK_THROWS_AS(learner::apply_update(model, {1.0}, 0.1), Error);
}

TEST_CASE("evaluation reports exact loss and accuracy on analytic cases") {
  SUBCASE("uniform ten-class predictor") {
    const auto arch = Architecture::logistic(6, 10);
    Model model;
    model.architecture = arch;
    model.weights.assign(arch.param_count(), 0.0);

    LocalDataset data;
    data.feature_dim = 6;
    for (int rep = 0; rep < 5; ++rep) {
      for (int c = 0; c < 10; ++c) {
        for (int i = 0; i < 6; ++i) {
          data.features.push_back(0.5f);
        }
        data.labels.push_back(c);
      }
    }
    const auto eval = learner::evaluate(model, data);
    CHECK(eval.loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    CHECK(eval.accuracy == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("confident correct prediction") {
    const auto arch = Architecture::logistic(2, 3);
    Model model;
    model.architecture = arch;
    model.weights.assign(arch.param_count(), 0.0);
    // Class 1 bias dominates -> always predicts class 1 with p ~ 1.
    model.weights[3 * 2 + 1] = 60.0;

    LocalDataset data;
    data.feature_dim = 2;
    data.features = {0.1f, 0.2f, 0.3f, 0.4f};
    data.labels = {1, 1};
    const auto eval = learner::evaluate(model, data);
    CHECK(eval.accuracy == 1.0);
    CHECK(eval.loss == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("accuracy equals a recount oracle") {
    const auto arch = Architecture::mlp(5, 4, 3);
    const Model model = learner::init_model(arch, 61);
    const auto data = random_dataset(64, 5, 3, 67);
    const auto eval = learner::evaluate(model, data);

    // Recount by running the model one sample at a time.
    std::size_t correct = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
      LocalDataset single;
      single.feature_dim = 5;
      single.features.assign(data.features.begin() + k * 5,
                             data.features.begin() + (k + 1) * 5);
      single.labels = {data.labels[k]};
      if (learner::evaluate(model, single).accuracy == 1.0) ++correct;
    }
    CHECK(eval.accuracy ==
          doctest::Approx(static_cast<double>(correct) / 64.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient descent reduces the training loss") {
  const auto arch = Architecture::mlp(6, 5, 3);
  Model model = learner::init_model(arch, 71);
  const auto data = random_dataset(90, 6, 3, 73);

  double previous = loss_at(model, data);
  for (int step = 0; step < 25; ++step) {
    const auto g = learner::local_gradient(model, data);
    model = learner::apply_update(std::move(model), g.gradient, 0.1);
    const double current = g.loss;
    CHECK(current <= previous + 1e-9);
    previous = current;
  }
  CHECK(loss_at(model, data) < previous);
}

TEST_CASE("non-finite activations raise numeric errors") {
  const auto arch = Architecture::logistic(2, 2);
  Model model;
  model.architecture = arch;
  model.weights.assign(arch.param_count(), 0.0);
  model.weights[2 * 2] = 900.0;  // class-0 bias so large p(class 1) underflows

  LocalDataset data;
  data.feature_dim = 2;
  data.features = {0.0f, 0.0f};
  data.labels = {1};
  try {
    learner::local_gradient(model, data);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
  }
}

TEST_CASE("dataset and model validation reject inconsistent shapes") {
  const auto arch = Architecture::logistic(3, 2);
  Model model = learner::init_model(arch, 83);

  LocalDataset wrong_dim = random_dataset(4, 5, 2, 89);
  CHECK_THROWS_AS(learner::local_gradient(model, wrong_dim), Error);

  LocalDataset bad_label = random_dataset(4, 3, 2, 97);
  bad_label.labels[0] = 2;
  CHECK_THROWS_AS(learner::local_gradient(model, bad_label), Error);

  LocalDataset empty;
  empty.feature_dim = 3;
  CHECK_THROWS_AS(learner::local_gradient(model, empty), Error);

  Model truncated = model;
  truncated.weights.pop_back();
  const auto ok = random_dataset(4, 3, 2, 101);
  CHECK_THROWS_AS(learner::local_gradient(truncated, ok), Error);
}
