#include "obcsaa/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obcsaa/errors.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::learner {

Architecture Architecture::mlp(std::size_t input, std::size_t hidden,
                               std::size_t output) {
  Architecture a;
  a.kind = ArchKind::MLP;
  a.input = input;
  a.hidden = hidden;
  a.output = output;
  validate(a);
  return a;
}

Architecture Architecture::logistic(std::size_t features,
                                    std::size_t classes) {
  Architecture a;
  a.kind = ArchKind::LOGISTIC;
  a.input = features;
  a.hidden = 0;
  a.output = classes;
  validate(a);
  return a;
}

std::size_t Architecture::param_count() const {
  if (kind == ArchKind::MLP) {
    return hidden * input + hidden + output * hidden + output;
  }
  return output * input + output;
}

void validate(const Architecture& arch) {
  if (arch.input == 0 || arch.output == 0) {
    fail(ErrorCode::Argument,
         "architecture: input and output widths must be positive");
  }
  if (arch.kind == ArchKind::MLP && arch.hidden == 0) {
    fail(ErrorCode::Argument, "architecture: MLP hidden width must be positive");
  }
  if (arch.kind == ArchKind::LOGISTIC && arch.hidden != 0) {
    fail(ErrorCode::Argument,
         "architecture: logistic models have no hidden layer");
  }
}

void validate(const Model& model) {
  validate(model.architecture);
  if (model.weights.size() != model.architecture.param_count()) {
    fail(ErrorCode::Dimension,
         "model: weight vector has " + std::to_string(model.weights.size()) +
             " entries, architecture needs " +
             std::to_string(model.architecture.param_count()));
  }
}

void validate(const LocalDataset& data, std::size_t expected_features,
              std::size_t class_count) {
  if (data.feature_dim != expected_features) {
    fail(ErrorCode::Dimension,
         "dataset: feature dimension " + std::to_string(data.feature_dim) +
             " does not match the architecture input " +
             std::to_string(expected_features));
  }
  if (data.labels.empty()) {
    fail(ErrorCode::Argument, "dataset: at least one sample required");
  }
  if (data.features.size() != data.labels.size() * data.feature_dim) {
    fail(ErrorCode::Dimension, "dataset: feature storage size mismatch");
  }
  for (int label : data.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_count) {
      fail(ErrorCode::Argument,
           "dataset: label " + std::to_string(label) + " outside 0.." +
               std::to_string(class_count - 1));
    }
  }
}

Model init_model(const Architecture& arch, std::uint64_t seed) {
  validate(arch);
  Model model;
  model.architecture = arch;
  model.weights.assign(arch.param_count(), 0.0);
  Rng rng(seed);

  auto fill_glorot = [&](std::size_t offset, std::size_t fan_out,
                         std::size_t fan_in) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) {
      model.weights[offset + i] = rng.uniform(-limit, limit);
    }
  };

  if (arch.kind == ArchKind::MLP) {
    fill_glorot(0, arch.hidden, arch.input);
    fill_glorot(arch.hidden * arch.input + arch.hidden, arch.output,
                arch.hidden);
  } else {
    fill_glorot(0, arch.output, arch.input);
  }
  return model;
}

namespace {

// Row-wise softmax cross-entropy on precomputed logits; returns the summed
// loss and overwrites logits with (p - onehot(y)) rows.
double softmax_loss_and_delta(std::vector<double>& logits, std::size_t n,
                              std::size_t classes,
                              const std::vector<int>& labels) {
  double loss_sum = 0.0;
  for (std::size_t row = 0; row < n; ++row) {
    double* z = logits.data() + row * classes;
    double zmax = z[0];
    for (std::size_t c = 1; c < classes; ++c) zmax = std::max(zmax, z[c]);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] = std::exp(z[c] - zmax);
      denom += z[c];
    }
    const int y = labels[row];
    loss_sum -= std::log(z[static_cast<std::size_t>(y)] / denom);
    for (std::size_t c = 0; c < classes; ++c) z[c] /= denom;
    z[static_cast<std::size_t>(y)] -= 1.0;
  }
  if (!std::isfinite(loss_sum)) {
    fail(ErrorCode::Numeric, "learner: non-finite loss (diverged weights?)");
  }
  return loss_sum;
}

// logits[n][c] = sum_i weights[c][i] x[n][i] + bias[c], accumulated in double.
void dense_forward(const float* x, std::size_t n, std::size_t in_dim,
                   const double* weights, const double* bias,
                   std::size_t out_dim, std::vector<double>& out) {
  out.assign(n * out_dim, 0.0);
  for (std::size_t row = 0; row < n; ++row) {
    const float* xr = x + row * in_dim;
    double* or_ = out.data() + row * out_dim;
    for (std::size_t c = 0; c < out_dim; ++c) {
      const double* w = weights + c * in_dim;
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) {
        acc += w[i] * static_cast<double>(xr[i]);
      }
      or_[c] = acc + bias[c];
    }
  }
}

}  // namespace

GradientResult local_gradient(const Model& model, const LocalDataset& data) {
  validate(model);
  const Architecture& arch = model.architecture;
  validate(data, arch.input, arch.output);
  const std::size_t n = data.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  GradientResult result;
  result.gradient.assign(model.weights.size(), 0.0);

  if (arch.kind == ArchKind::LOGISTIC) {
    const double* w = model.weights.data();
    const double* b = w + arch.output * arch.input;
    std::vector<double> logits;
    dense_forward(data.features.data(), n, arch.input, w, b, arch.output,
                  logits);
    const double loss_sum =
        softmax_loss_and_delta(logits, n, arch.output, data.labels);
    result.loss = loss_sum * inv_n;

    double* gw = result.gradient.data();
    double* gb = gw + arch.output * arch.input;
    for (std::size_t row = 0; row < n; ++row) {
      const float* xr = data.features.data() + row * arch.input;
      const double* delta = logits.data() + row * arch.output;
      for (std::size_t c = 0; c < arch.output; ++c) {
        const double d = delta[c] * inv_n;
        double* grow = gw + c * arch.input;
        for (std::size_t i = 0; i < arch.input; ++i) {
          grow[i] += d * static_cast<double>(xr[i]);
        }
        gb[c] += d;
      }
    }
    return result;
  }

  // MLP: input -> ReLU hidden -> softmax output.
  const std::size_t w1_off = 0;
  const std::size_t b1_off = arch.hidden * arch.input;
  const std::size_t w2_off = b1_off + arch.hidden;
  const std::size_t b2_off = w2_off + arch.output * arch.hidden;
  const double* w1 = model.weights.data() + w1_off;
  const double* b1 = model.weights.data() + b1_off;
  const double* w2 = model.weights.data() + w2_off;
  const double* b2 = model.weights.data() + b2_off;

  std::vector<double> hidden_act;
  dense_forward(data.features.data(), n, arch.input, w1, b1, arch.hidden,
                hidden_act);
  for (double& v : hidden_act) v = std::max(v, 0.0);

  std::vector<double> logits(n * arch.output);
  for (std::size_t row = 0; row < n; ++row) {
    const double* hr = hidden_act.data() + row * arch.hidden;
    double* zr = logits.data() + row * arch.output;
    for (std::size_t c = 0; c < arch.output; ++c) {
      const double* w = w2 + c * arch.hidden;
      double acc = 0.0;
      for (std::size_t h = 0; h < arch.hidden; ++h) acc += w[h] * hr[h];
      zr[c] = acc + b2[c];
    }
  }
  const double loss_sum =
      softmax_loss_and_delta(logits, n, arch.output, data.labels);
  result.loss = loss_sum * inv_n;

  double* g_w1 = result.gradient.data() + w1_off;
  double* g_b1 = result.gradient.data() + b1_off;
  double* g_w2 = result.gradient.data() + w2_off;
  double* g_b2 = result.gradient.data() + b2_off;
  std::vector<double> hidden_delta(arch.hidden);

  for (std::size_t row = 0; row < n; ++row) {
    const float* xr = data.features.data() + row * arch.input;
    const double* hr = hidden_act.data() + row * arch.hidden;
    const double* delta = logits.data() + row * arch.output;

    std::fill(hidden_delta.begin(), hidden_delta.end(), 0.0);
    for (std::size_t c = 0; c < arch.output; ++c) {
      const double d = delta[c] * inv_n;
      const double* w = w2 + c * arch.hidden;
      double* grow = g_w2 + c * arch.hidden;
      for (std::size_t h = 0; h < arch.hidden; ++h) {
        grow[h] += d * hr[h];
        hidden_delta[h] += d * w[h];
      }
      g_b2[c] += d;
    }
    for (std::size_t h = 0; h < arch.hidden; ++h) {
      if (hr[h] <= 0.0) continue;  // ReLU gate (inactive units pass nothing)
      const double d = hidden_delta[h];
      double* grow = g_w1 + h * arch.input;
      for (std::size_t i = 0; i < arch.input; ++i) {
        grow[i] += d * static_cast<double>(xr[i]);
      }
      g_b1[h] += d;
    }
  }
  return result;
}

std::vector<double> exact_global_gradient(
    const std::vector<std::vector<double>>& gradients,
    const std::vector<double>& data_sizes) {
  if (gradients.empty() || gradients.size() != data_sizes.size()) {
    fail(ErrorCode::Dimension,
         "exact_global_gradient: need one data size per gradient");
  }
  const std::size_t dim = gradients.front().size();
  double total = 0.0;
  for (double k : data_sizes) {
    if (!(k > 0.0)) {
      fail(ErrorCode::Argument,
           "exact_global_gradient: data sizes must be positive");
    }
    total += k;
  }
  std::vector<double> combined(dim, 0.0);
  for (std::size_t u = 0; u < gradients.size(); ++u) {
    if (gradients[u].size() != dim) {
      fail(ErrorCode::Dimension,
           "exact_global_gradient: gradient length mismatch at worker " +
               std::to_string(u));
    }
    const double w = data_sizes[u] / total;
    for (std::size_t i = 0; i < dim; ++i) combined[i] += w * gradients[u][i];
  }
  return combined;
}

Model apply_update(Model model, const std::vector<double>& gradient,
                   double learning_rate) {
  validate(model);
  if (gradient.size() != model.weights.size()) {
    fail(ErrorCode::Dimension, "apply_update: gradient length mismatch");
  }
  if (!(learning_rate > 0.0)) {
    fail(ErrorCode::Argument, "apply_update: learning rate must be positive");
  }
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    model.weights[i] -= learning_rate * gradient[i];
  }
  return model;
}

EvalResult evaluate(const Model& model, const LocalDataset& data) {
  validate(model);
  const Architecture& arch = model.architecture;
  validate(data, arch.input, arch.output);
  const std::size_t n = data.size();

  std::vector<double> logits;
  if (arch.kind == ArchKind::LOGISTIC) {
    const double* w = model.weights.data();
    const double* b = w + arch.output * arch.input;
    dense_forward(data.features.data(), n, arch.input, w, b, arch.output,
                  logits);
  } else {
    const double* w1 = model.weights.data();
    const double* b1 = w1 + arch.hidden * arch.input;
    const double* w2 = b1 + arch.hidden;
    const double* b2 = w2 + arch.output * arch.hidden;
    std::vector<double> hidden_act;
    dense_forward(data.features.data(), n, arch.input, w1, b1, arch.hidden,
                  hidden_act);
    for (double& v : hidden_act) v = std::max(v, 0.0);
    logits.resize(n * arch.output);
    for (std::size_t row = 0; row < n; ++row) {
      const double* hr = hidden_act.data() + row * arch.hidden;
      double* zr = logits.data() + row * arch.output;
      for (std::size_t c = 0; c < arch.output; ++c) {
        const double* w = w2 + c * arch.hidden;
        double acc = 0.0;
        for (std::size_t h = 0; h < arch.hidden; ++h) acc += w[h] * hr[h];
        zr[c] = acc + b2[c];
      }
    }
  }

  std::size_t correct = 0;
  for (std::size_t row = 0; row < n; ++row) {
    const double* z = logits.data() + row * arch.output;
    std::size_t best = 0;
    for (std::size_t c = 1; c < arch.output; ++c) {
      if (z[c] > z[best]) best = c;
    }
    if (best == static_cast<std::size_t>(data.labels[row])) ++correct;
  }
  const double loss_sum =
      softmax_loss_and_delta(logits, n, arch.output, data.labels);

  EvalResult result;
  result.loss = loss_sum / static_cast<double>(n);
  result.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return result;
}

}  // namespace obcsaa::learner
