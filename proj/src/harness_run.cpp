#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "obcsaa/errors.hpp"
#include "obcsaa/harness.hpp"
#include "obcsaa/rng.hpp"

namespace obcsaa::harness {

namespace {

std::string format_double(double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& field, std::size_t line) {
  double value = 0.0;
  const auto result =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc{} ||
      result.ptr != field.data() + field.size()) {
    fail(ErrorCode::Format, "metrics line " + std::to_string(line) +
                                ": bad number '" + field + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& field, std::size_t line) {
  std::uint64_t value = 0;
  const auto result =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc{} ||
      result.ptr != field.data() + field.size()) {
    fail(ErrorCode::Format, "metrics line " + std::to_string(line) +
                                ": bad integer '" + field + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

MetricsRow row_from_metrics(const learner::RoundMetrics& metrics,
                            const std::string& run_id, learner::Mode mode,
                            std::uint64_t seed, std::size_t workers) {
  MetricsRow row;
  row.run_id = run_id;
  row.mode = mode_name(mode);
  row.seed = seed;
  row.round = metrics.round;
  row.train_loss = metrics.train_loss;
  row.test_acc = metrics.test_accuracy;
  row.grad_err_sq = metrics.grad_error_sq;
  if (metrics.has_decision) {
    std::size_t scheduled = 0;
    for (const int bit : metrics.decision.schedule) {
      scheduled += static_cast<std::size_t>(bit);
    }
    row.beta_count = scheduled;
    row.has_gain = true;
    row.gain = metrics.decision.gain_factor;
  } else {
    row.beta_count = workers;  // perfect aggregation hears everyone
  }
  if (metrics.has_bounds) {
    row.has_err_bound = true;
    row.err_bound = metrics.bound_report.total_error;
  }
  if (metrics.has_objective) {
    row.has_objective = true;
    row.objective = metrics.objective;
  }
  return row;
}

}  // namespace

const char kMetricsHeader[] =
    "run_id,mode,seed,round,train_loss,test_acc,grad_err_sq,err_bound,"
    "beta_count,b_t,R_t";

std::string to_csv(const MetricsTable& table) {
  std::string out = kMetricsHeader;
  out.push_back('\n');
  for (const MetricsRow& row : table.rows) {
    out += row.run_id;
    out.push_back(',');
    out += row.mode;
    out.push_back(',');
    out += std::to_string(row.seed);
    out.push_back(',');
    out += std::to_string(row.round);
    out.push_back(',');
    if (!row.failed) {
      out += format_double(row.train_loss);
      out.push_back(',');
      out += format_double(row.test_acc);
      out.push_back(',');
      out += format_double(row.grad_err_sq);
      out.push_back(',');
      if (row.has_err_bound) out += format_double(row.err_bound);
      out.push_back(',');
      out += std::to_string(row.beta_count);
      out.push_back(',');
      if (row.has_gain) out += format_double(row.gain);
      out.push_back(',');
      if (row.has_objective) out += format_double(row.objective);
    } else {
      out += ",,,,,,";  // marker row: identity columns only
    }
    out.push_back('\n');
  }
  return out;
}

void save_csv(const MetricsTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  }
  const std::string text = to_csv(table);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    fail(ErrorCode::Io, "failed while writing '" + path + "'");
  }
}

MetricsTable load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  }
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    fail(ErrorCode::Format, "unexpected metrics header in " + path);
  }
  MetricsTable table;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 11) {
      fail(ErrorCode::Format, "metrics line " + std::to_string(line_number) +
                                  ": expected 11 columns, found " +
                                  std::to_string(fields.size()));
    }
    MetricsRow row;
    row.run_id = fields[0];
    row.mode = fields[1];
    row.seed = parse_u64(fields[2], line_number);
    row.round = parse_u64(fields[3], line_number);
    if (fields[4].empty()) {
      row.failed = true;
      table.rows.push_back(row);
      continue;
    }
    row.train_loss = parse_double(fields[4], line_number);
    row.test_acc = parse_double(fields[5], line_number);
    row.grad_err_sq = parse_double(fields[6], line_number);
    if (!fields[7].empty()) {
      row.has_err_bound = true;
      row.err_bound = parse_double(fields[7], line_number);
    }
    row.beta_count = parse_u64(fields[8], line_number);
    if (!fields[9].empty()) {
      row.has_gain = true;
      row.gain = parse_double(fields[9], line_number);
    }
    if (!fields[10].empty()) {
      row.has_objective = true;
      row.objective = parse_double(fields[10], line_number);
    }
    table.rows.push_back(row);
  }
  return table;
}

MetricsTable run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::filesystem::create_directories(config.output_dir);
  {
    const std::string path = config.output_dir + "/config.resolved.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
    }
    out << resolved_json(config);
  }

  bool uses_channel = false;
  for (const learner::Mode mode : config.modes) {
    uses_channel = uses_channel || mode == learner::Mode::OBCSAA;
  }
  if (uses_channel && !config.lossless_debug &&
      config.sparsity * config.workers > config.measurements) {
    std::cerr << "warning: sparsity * workers ("
              << config.sparsity * config.workers << ") exceeds measurements ("
              << config.measurements
              << "); sparse recovery may be inaccurate\n";
  }

  learner::LocalDataset pool;
  learner::LocalDataset test;
  if (config.dataset.kind == DatasetSpec::Kind::SYNTHETIC) {
    pool = synthetic_dataset(
        config.dataset, config.workers * config.samples_per_worker,
        derive_seed(config.dataset.generator_seed, "train"));
    test = synthetic_dataset(config.dataset, config.dataset.test_samples,
                             derive_seed(config.dataset.generator_seed,
                                         "test"));
  } else {
    pool = load_mnist_idx(config.dataset.train_images,
                          config.dataset.train_labels);
    test = load_mnist_idx(config.dataset.test_images,
                          config.dataset.test_labels);
  }
  if (pool.feature_dim != config.architecture.input ||
      test.feature_dim != config.architecture.input) {
    fail(ErrorCode::Dimension,
         "dataset feature length does not match the architecture input");
  }

  learner::SimulationConfig sim_config;
  sim_config.sparsity = config.sparsity;
  sim_config.measurements = config.measurements;
  sim_config.learning_rate = config.learning_rate;
  sim_config.max_power = config.max_power;
  sim_config.noise_variance = config.noise_variance;
  sim_config.lipschitz = config.lipschitz;
  sim_config.rho1 = config.rho1;
  sim_config.rho2 = config.rho2;
  sim_config.delta = config.delta;
  sim_config.compute_bounds = config.compute_bounds;
  sim_config.solver = config.solver;
  sim_config.admm = config.admm;
  sim_config.recovery = config.recovery;
  sim_config.gradient_scale = config.gradient_scale;
  sim_config.lossless_debug = config.lossless_debug;

  const std::string csv_path = config.output_dir + "/metrics.csv";
  MetricsTable table;
  std::string current_run_id = config.label;
  std::string current_mode;
  std::uint64_t current_seed = 0;
  std::size_t current_round = 0;
  try {
    for (const std::uint64_t seed : config.seeds) {
      const std::uint64_t replicate =
          derive_seed(config.master_seed, "replicate", seed);
      current_seed = seed;
      const auto parts =
          partition_dataset(pool, config.workers, config.samples_per_worker,
                            derive_seed(replicate, "partition"));
      const learner::Model initial = learner::init_model(
          config.architecture, derive_seed(replicate, "init"));
      for (const learner::Mode mode : config.modes) {
        current_run_id =
            config.label + "_" + mode_id(mode) + "_s" + std::to_string(seed);
        current_mode = mode_name(mode);
        current_round = 0;
        learner::Simulation sim(mode, initial, parts, test, sim_config,
                                derive_seed(replicate, "simulation"));
        for (std::size_t t = 0; t < config.rounds; ++t) {
          current_round = sim.rounds_completed() + 1;
          const learner::RoundMetrics metrics = sim.run_round();
          table.rows.push_back(row_from_metrics(metrics, current_run_id, mode,
                                                seed, config.workers));
        }
      }
    }
  } catch (const Error&) {
    MetricsRow marker;
    marker.run_id = current_run_id;
    marker.mode = current_mode;
    marker.seed = current_seed;
    marker.round = current_round;
    marker.failed = true;
    table.rows.push_back(marker);
    save_csv(table, csv_path);
    throw;
  }
  save_csv(table, csv_path);
  return table;
}

}  // namespace obcsaa::harness
