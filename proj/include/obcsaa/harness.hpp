#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "obcsaa/bounds.hpp"
#include "obcsaa/scheduler.hpp"
#include "obcsaa/simulation.hpp"

namespace obcsaa::harness {

// Where the training and test samples come from.
struct DatasetSpec {
  enum class Kind { SYNTHETIC, MNIST };
  Kind kind = Kind::SYNTHETIC;

  // Synthetic source: one prototype vector per class, samples are the
  // prototype plus Gaussian per-pixel noise clamped to [0, 1].  The noise
  // level is the difficulty knob.  The generator seed is independent of the
  // replicate seeds so every replicate sees the same dataset.
  std::size_t feature_dim = 784;
  std::size_t classes = 10;
  std::size_t test_samples = 1000;
  double class_noise = 0.8;
  std::uint64_t generator_seed = 7;

  // MNIST IDX source.
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
};

// A full experiment: a model, a data source, channel and solver settings,
// and the list of aggregation modes and replicate seeds to sweep.
struct ExperimentConfig {
  std::string label = "run";
  std::vector<learner::Mode> modes{learner::Mode::PERFECT,
                                   learner::Mode::OBCSAA};
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t master_seed = 1;

  std::size_t rounds = 200;
  std::size_t workers = 10;
  std::size_t samples_per_worker = 3000;
  double learning_rate = 0.05;

  std::size_t sparsity = 10;
  std::size_t measurements = 1000;
  double max_power = 1.0;
  bool has_snr_db = false;
  double snr_db = 0.0;
  double noise_variance = 0.0;  // resolved from snr_db when that is given

  learner::Architecture architecture = learner::Architecture::mlp(784, 64, 10);

  double lipschitz = 1.0;
  double rho1 = 1.0;
  double rho2 = 0.1;
  double delta = 0.2;
  bool compute_bounds = true;

  learner::SolverChoice solver = learner::SolverChoice::AUTO;
  scheduler::AdmmOptions admm;
  cs_codec::RecoveryConfig recovery;
  learner::GradientScale gradient_scale = learner::GradientScale::IDEAL_NORM;
  bool lossless_debug = false;

  DatasetSpec dataset;
  std::string output_dir = "out";
};

// Throws on out-of-range values, duplicate seeds or modes, and
// architecture/dataset shape mismatches.
void validate(const ExperimentConfig& config);

// Strict JSON: unknown keys are hard errors, `snr_db` and `noise_variance`
// are mutually exclusive, and every enum value must match exactly.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Every field the run will actually use, defaults included.
std::string resolved_json(const ExperimentConfig& config);

// Canonical mode spellings: "PERFECT"/"OBCSAA" in tables, lowercase in ids.
std::string mode_name(learner::Mode mode);
std::string mode_id(learner::Mode mode);

// ---------------------------------------------------------------------------
// Data ingestion.

learner::LocalDataset load_mnist_idx(const std::string& images_path,
                                     const std::string& labels_path);
void save_mnist_idx(const learner::LocalDataset& data, std::size_t rows,
                    std::size_t cols, const std::string& images_path,
                    const std::string& labels_path);

learner::LocalDataset synthetic_dataset(const DatasetSpec& spec,
                                        std::size_t count,
                                        std::uint64_t sample_seed);

// Seeded shuffle, then contiguous blocks of `per_worker` samples.  The
// resulting datasets are disjoint.
std::vector<learner::LocalDataset> partition_dataset(
    const learner::LocalDataset& data, std::size_t workers,
    std::size_t per_worker, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metrics persistence.

struct MetricsRow {
  std::string run_id;
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t round = 0;

  // A failure marker row keeps only the identity columns; everything below
  // is absent in the CSV.
  bool failed = false;

  double train_loss = 0.0;
  double test_acc = 0.0;
  double grad_err_sq = 0.0;
  bool has_err_bound = false;
  double err_bound = 0.0;
  std::size_t beta_count = 0;
  bool has_gain = false;
  double gain = 0.0;  // the b_t column
  bool has_objective = false;
  double objective = 0.0;  // the R_t column
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
};

extern const char kMetricsHeader[];

std::string to_csv(const MetricsTable& table);
void save_csv(const MetricsTable& table, const std::string& path);
MetricsTable load_csv(const std::string& path);

// Runs every (seed, mode) pair for the configured number of rounds, writing
// `metrics.csv` and `config.resolved.json` into the output directory.  A
// sub-module error aborts the run: the partial CSV is retained with a final
// failure marker row and the error is rethrown.
MetricsTable run_experiment(const ExperimentConfig& config);

// Writes loss.svg and accuracy.svg: one polyline per run group (the run id
// minus its seed suffix), averaged over seeds at each round.
std::vector<std::string> emit_plots(const MetricsTable& table,
                                    const std::string& out_dir);

// ---------------------------------------------------------------------------
// Standalone JSON front-ends used by the command-line tool.

scheduler::SchedulerInstance instance_from_json(const std::string& text);
std::string solve_to_json(const std::string& text);

std::string bound_report_json(const std::string& text);

}  // namespace obcsaa::harness
