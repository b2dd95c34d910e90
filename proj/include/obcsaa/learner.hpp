#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace obcsaa::learner {

enum class ArchKind { MLP, LOGISTIC };

// Network shape. MLP is input -> ReLU hidden -> softmax output; LOGISTIC is
// multinomial logistic regression (features -> softmax classes).
struct Architecture {
  ArchKind kind = ArchKind::MLP;
  std::size_t input = 0;   // feature count
  std::size_t hidden = 0;  // hidden width (MLP only)
  std::size_t output = 0;  // class count

  static Architecture mlp(std::size_t input, std::size_t hidden,
                          std::size_t output);
  static Architecture logistic(std::size_t features, std::size_t classes);

  std::size_t param_count() const;
};

void validate(const Architecture& arch);

// Flat parameter vector. MLP layout: hidden-layer weights (hidden x input,
// row-major), hidden biases, output weights (output x hidden), output biases.
// LOGISTIC layout: weights (classes x features), biases.
struct Model {
  Architecture architecture;
  std::vector<double> weights;
};

void validate(const Model& model);

// Feature rows are stored contiguously (row n at [n*feature_dim,
// (n+1)*feature_dim)); labels are class indices.
struct LocalDataset {
  std::size_t feature_dim = 0;
  std::vector<float> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

void validate(const LocalDataset& data, std::size_t expected_features,
              std::size_t class_count);

// Seeded Glorot-uniform weights, zero biases.
Model init_model(const Architecture& arch, std::uint64_t seed);

struct GradientResult {
  std::vector<double> gradient;  // d(mean cross-entropy)/d(weights)
  double loss = 0.0;             // mean cross-entropy at the current weights
};

// Full-batch mean cross-entropy gradient over the worker's local data.
GradientResult local_gradient(const Model& model, const LocalDataset& data);

// Data-size weighted average (1/sum K_i) * sum K_i g_i.
std::vector<double> exact_global_gradient(
    const std::vector<std::vector<double>>& gradients,
    const std::vector<double>& data_sizes);

// One gradient-descent step: weights - learning_rate * gradient.
Model apply_update(Model model, const std::vector<double>& gradient,
                   double learning_rate);

struct EvalResult {
  double loss = 0.0;      // mean cross-entropy
  double accuracy = 0.0;  // top-1, in [0, 1]
};

EvalResult evaluate(const Model& model, const LocalDataset& data);

}  // namespace obcsaa::learner
