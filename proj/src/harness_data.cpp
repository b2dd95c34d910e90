#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "obcsaa/errors.hpp"
#include "obcsaa/harness.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::harness {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) {
    fail(ErrorCode::Io, "failed while reading '" + path + "'");
  }
  return bytes;
}

void write_file(const std::string& path,
                const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    fail(ErrorCode::Io, "failed while writing '" + path + "'");
  }
}

std::uint32_t be32(const std::vector<unsigned char>& bytes,
                   std::size_t offset) {
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void push_be32(std::vector<unsigned char>& bytes, std::uint32_t value) {
  bytes.push_back(static_cast<unsigned char>(value >> 24));
  bytes.push_back(static_cast<unsigned char>(value >> 16));
  bytes.push_back(static_cast<unsigned char>(value >> 8));
  bytes.push_back(static_cast<unsigned char>(value));
}

}  // namespace

learner::LocalDataset load_mnist_idx(const std::string& images_path,
                                     const std::string& labels_path) {
  const auto image_bytes = read_file(images_path);
  if (image_bytes.size() < 16) {
    fail(ErrorCode::Format, "image file header truncated: " + images_path);
  }
  if (be32(image_bytes, 0) != kImageMagic) {
    fail(ErrorCode::Format, "bad image magic in " + images_path);
  }
  const std::size_t count = be32(image_bytes, 4);
  const std::size_t rows = be32(image_bytes, 8);
  const std::size_t cols = be32(image_bytes, 12);
  if (rows == 0 || cols == 0) {
    fail(ErrorCode::Format, "zero image dimensions in " + images_path);
  }
  const std::size_t pixels = count * rows * cols;
  if (image_bytes.size() != 16 + pixels) {
    fail(ErrorCode::Format, "image data truncated in " + images_path);
  }

  const auto label_bytes = read_file(labels_path);
  if (label_bytes.size() < 8) {
    fail(ErrorCode::Format, "label file header truncated: " + labels_path);
  }
  if (be32(label_bytes, 0) != kLabelMagic) {
    fail(ErrorCode::Format, "bad label magic in " + labels_path);
  }
  const std::size_t label_count = be32(label_bytes, 4);
  if (label_bytes.size() != 8 + label_count) {
    fail(ErrorCode::Format, "label data truncated in " + labels_path);
  }
  if (label_count != count) {
    fail(ErrorCode::Format,
         "count mismatch between images and labels: " +
             std::to_string(count) + " vs " + std::to_string(label_count));
  }

  learner::LocalDataset data;
  data.feature_dim = rows * cols;
  data.features.resize(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    data.features[i] = static_cast<float>(image_bytes[16 + i]) / 255.0f;
  }
  data.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    data.labels[i] = static_cast<int>(label_bytes[8 + i]);
  }
  return data;
}

void save_mnist_idx(const learner::LocalDataset& data, std::size_t rows,
                    std::size_t cols, const std::string& images_path,
                    const std::string& labels_path) {
  if (rows * cols != data.feature_dim) {
    fail(ErrorCode::Dimension,
         "image shape " + std::to_string(rows) + "x" + std::to_string(cols) +
             " does not match feature length " +
             std::to_string(data.feature_dim));
  }
  const std::size_t count = data.size();

  std::vector<unsigned char> image_bytes;
  image_bytes.reserve(16 + data.features.size());
  push_be32(image_bytes, kImageMagic);
  push_be32(image_bytes, static_cast<std::uint32_t>(count));
  push_be32(image_bytes, static_cast<std::uint32_t>(rows));
  push_be32(image_bytes, static_cast<std::uint32_t>(cols));
  for (const float value : data.features) {
    const double clamped = std::clamp(static_cast<double>(value), 0.0, 1.0);
    image_bytes.push_back(
        static_cast<unsigned char>(std::llround(clamped * 255.0)));
  }
  write_file(images_path, image_bytes);

  std::vector<unsigned char> label_bytes;
  label_bytes.reserve(8 + count);
  push_be32(label_bytes, kLabelMagic);
  push_be32(label_bytes, static_cast<std::uint32_t>(count));
  for (const int label : data.labels) {
    if (label < 0 || label > 255) {
      fail(ErrorCode::Format,
           "label " + std::to_string(label) + " does not fit in one byte");
    }
    label_bytes.push_back(static_cast<unsigned char>(label));
  }
  write_file(labels_path, label_bytes);
}

learner::LocalDataset synthetic_dataset(const DatasetSpec& spec,
                                        std::size_t count,
                                        std::uint64_t sample_seed) {
  if (spec.kind != DatasetSpec::Kind::SYNTHETIC) {
    fail(ErrorCode::Argument, "dataset spec does not describe synthetic data");
  }
  if (spec.feature_dim == 0 || spec.classes == 0) {
    fail(ErrorCode::Argument, "synthetic dataset needs features and classes");
  }
  if (spec.class_noise < 0.0) {
    fail(ErrorCode::Argument, "class noise must be non-negative");
  }

  // Prototypes depend only on the generator seed, so the train pool and the
  // test set describe the same classification problem. Like handwritten-digit
  // images, all classes share one global foreground: only a quarter of the
  // coordinates ever carry signal, the rest stay exactly zero. Models trained
  // on such data concentrate their gradient energy on a small support, the
  // property that makes top-k compression of image classifiers effective.
  Rng proto_rng(derive_seed(spec.generator_seed, "prototypes"));
  const std::size_t active = std::max<std::size_t>(1, spec.feature_dim / 4);
  std::vector<std::size_t> order(spec.feature_dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  proto_rng.shuffle(order);
  std::vector<char> foreground(spec.feature_dim, 0);
  for (std::size_t i = 0; i < active; ++i) {
    foreground[order[i]] = 1;
  }
  std::vector<double> prototypes(spec.classes * spec.feature_dim, 0.0);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t i = 0; i < spec.feature_dim; ++i) {
      if (foreground[i]) {
        prototypes[c * spec.feature_dim + i] = proto_rng.uniform(0.0, 1.0);
      }
    }
  }

  Rng rng(sample_seed);
  learner::LocalDataset data;
  data.feature_dim = spec.feature_dim;
  data.features.resize(count * spec.feature_dim);
  data.labels.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t label = rng.below(spec.classes);
    data.labels[k] = static_cast<int>(label);
    const double* proto = prototypes.data() + label * spec.feature_dim;
    float* out = data.features.data() + k * spec.feature_dim;
    for (std::size_t i = 0; i < spec.feature_dim; ++i) {
      if (!foreground[i]) {
        out[i] = 0.0f;
        continue;
      }
      const double value = proto[i] + spec.class_noise * rng.normal();
      out[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
    }
  }
  return data;
}

std::vector<learner::LocalDataset> partition_dataset(
    const learner::LocalDataset& data, std::size_t workers,
    std::size_t per_worker, std::uint64_t seed) {
  if (workers == 0 || per_worker == 0) {
    fail(ErrorCode::Argument, "partition needs workers and samples per worker");
  }
  const std::size_t needed = workers * per_worker;
  if (data.size() < needed) {
    fail(ErrorCode::Argument,
         "insufficient samples: need " + std::to_string(needed) + ", have " +
             std::to_string(data.size()));
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<learner::LocalDataset> parts(workers);
  for (std::size_t u = 0; u < workers; ++u) {
    learner::LocalDataset& part = parts[u];
    part.feature_dim = data.feature_dim;
    part.features.resize(per_worker * data.feature_dim);
    part.labels.resize(per_worker);
    for (std::size_t k = 0; k < per_worker; ++k) {
      const std::size_t src = order[u * per_worker + k];
      std::copy_n(data.features.data() + src * data.feature_dim,
                  data.feature_dim,
                  part.features.data() + k * data.feature_dim);
      part.labels[k] = data.labels[src];
    }
  }
  return parts;
}

}  // namespace obcsaa::harness
