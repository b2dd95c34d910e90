#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "obcsaa/errors.hpp"
#include "obcsaa/harness.hpp"

namespace obcsaa::harness {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* context,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(ErrorCode::Format,
           std::string(context) + ": unknown key '" + item.key() + "'");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_double(const json& obj, const char* key, double fallback) {
  const json* value = find(obj, key);
  if (value == nullptr) return fallback;
  if (!value->is_number()) {
    fail(ErrorCode::Format, std::string("'") + key + "' must be a number");
  }
  return value->get<double>();
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback) {
  const json* value = find(obj, key);
  if (value == nullptr) return fallback;
  if (!value->is_number_unsigned()) {
    fail(ErrorCode::Format,
         std::string("'") + key + "' must be a non-negative integer");
  }
  return value->get<std::size_t>();
}

std::uint64_t get_u64(const json& obj, const char* key,
                      std::uint64_t fallback) {
  const json* value = find(obj, key);
  if (value == nullptr) return fallback;
  if (!value->is_number_unsigned()) {
    fail(ErrorCode::Format,
         std::string("'") + key + "' must be a non-negative integer");
  }
  return value->get<std::uint64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  const json* value = find(obj, key);
  if (value == nullptr) return fallback;
  if (!value->is_boolean()) {
    fail(ErrorCode::Format, std::string("'") + key + "' must be a boolean");
  }
  return value->get<bool>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback) {
  const json* value = find(obj, key);
  if (value == nullptr) return fallback;
  if (!value->is_string()) {
    fail(ErrorCode::Format, std::string("'") + key + "' must be a string");
  }
  return value->get<std::string>();
}

std::string require_string(const json& obj, const char* key,
                           const char* context) {
  const json* value = find(obj, key);
  if (value == nullptr || !value->is_string()) {
    fail(ErrorCode::Format,
         std::string(context) + " requires string key '" + key + "'");
  }
  return value->get<std::string>();
}

learner::Mode parse_mode(const std::string& name) {
  if (name == "perfect") return learner::Mode::PERFECT;
  if (name == "obcsaa") return learner::Mode::OBCSAA;
  fail(ErrorCode::Format,
       "unknown mode '" + name + "' (expected 'perfect' or 'obcsaa')");
}

learner::SolverChoice parse_solver(const std::string& name) {
  if (name == "auto") return learner::SolverChoice::AUTO;
  if (name == "enumeration") return learner::SolverChoice::ENUMERATION;
  if (name == "admm") return learner::SolverChoice::ADMM;
  fail(ErrorCode::Format, "unknown solver '" + name +
                              "' (expected 'auto', 'enumeration' or 'admm')");
}

cs_codec::RecoveryMode parse_recovery_mode(const std::string& name) {
  if (name == "iht_real") return cs_codec::RecoveryMode::IHT_REAL;
  if (name == "biht_sign") return cs_codec::RecoveryMode::BIHT_SIGN;
  if (name == "passthrough") return cs_codec::RecoveryMode::PASSTHROUGH;
  fail(ErrorCode::Format,
       "unknown recovery mode '" + name +
           "' (expected 'iht_real', 'biht_sign' or 'passthrough')");
}

learner::GradientScale parse_gradient_scale(const std::string& name) {
  if (name == "ideal_norm") return learner::GradientScale::IDEAL_NORM;
  if (name == "raw") return learner::GradientScale::RAW;
  fail(ErrorCode::Format, "unknown gradient scale '" + name +
                              "' (expected 'ideal_norm' or 'raw')");
}

const char* solver_id(learner::SolverChoice choice) {
  switch (choice) {
    case learner::SolverChoice::AUTO: return "auto";
    case learner::SolverChoice::ENUMERATION: return "enumeration";
    case learner::SolverChoice::ADMM: return "admm";
  }
  return "auto";
}

const char* recovery_id(cs_codec::RecoveryMode mode) {
  switch (mode) {
    case cs_codec::RecoveryMode::IHT_REAL: return "iht_real";
    case cs_codec::RecoveryMode::BIHT_SIGN: return "biht_sign";
    case cs_codec::RecoveryMode::PASSTHROUGH: return "passthrough";
  }
  return "iht_real";
}

const char* scale_id(learner::GradientScale scale) {
  return scale == learner::GradientScale::RAW ? "raw" : "ideal_norm";
}

learner::Architecture parse_architecture(const json& obj) {
  if (!obj.is_object()) {
    fail(ErrorCode::Format, "'architecture' must be an object");
  }
  const std::string kind = require_string(obj, "kind", "architecture");
  if (kind == "mlp") {
    check_keys(obj, "architecture", {"kind", "input", "hidden", "output"});
    return learner::Architecture::mlp(get_size(obj, "input", 784),
                                      get_size(obj, "hidden", 64),
                                      get_size(obj, "output", 10));
  }
  if (kind == "logistic") {
    check_keys(obj, "architecture", {"kind", "input", "output"});
    return learner::Architecture::logistic(get_size(obj, "input", 784),
                                           get_size(obj, "output", 10));
  }
  fail(ErrorCode::Format, "unknown architecture kind '" + kind +
                              "' (expected 'mlp' or 'logistic')");
}

DatasetSpec parse_dataset(const json& obj) {
  if (!obj.is_object()) {
    fail(ErrorCode::Format, "'dataset' must be an object");
  }
  DatasetSpec spec;
  const std::string kind = require_string(obj, "kind", "dataset");
  if (kind == "synthetic") {
    check_keys(obj, "dataset",
               {"kind", "feature_dim", "classes", "test_samples",
                "class_noise", "generator_seed"});
    spec.kind = DatasetSpec::Kind::SYNTHETIC;
    spec.feature_dim = get_size(obj, "feature_dim", spec.feature_dim);
    spec.classes = get_size(obj, "classes", spec.classes);
    spec.test_samples = get_size(obj, "test_samples", spec.test_samples);
    spec.class_noise = get_double(obj, "class_noise", spec.class_noise);
    spec.generator_seed = get_u64(obj, "generator_seed", spec.generator_seed);
    return spec;
  }
  if (kind == "mnist") {
    check_keys(obj, "dataset",
               {"kind", "train_images", "train_labels", "test_images",
                "test_labels"});
    spec.kind = DatasetSpec::Kind::MNIST;
    spec.train_images = require_string(obj, "train_images", "dataset");
    spec.train_labels = require_string(obj, "train_labels", "dataset");
    spec.test_images = require_string(obj, "test_images", "dataset");
    spec.test_labels = require_string(obj, "test_labels", "dataset");
    return spec;
  }
  fail(ErrorCode::Format,
       "unknown dataset kind '" + kind + "' (expected 'synthetic' or 'mnist')");
}

scheduler::AdmmOptions parse_admm(const json& obj) {
  if (!obj.is_object()) {
    fail(ErrorCode::Format, "'admm' must be an object");
  }
  check_keys(obj, "admm", {"step_c", "abs_tol", "rel_tol", "max_iter"});
  scheduler::AdmmOptions options;
  options.step_c = get_double(obj, "step_c", options.step_c);
  options.abs_tol = get_double(obj, "abs_tol", options.abs_tol);
  options.rel_tol = get_double(obj, "rel_tol", options.rel_tol);
  options.max_iter = get_size(obj, "max_iter", options.max_iter);
  return options;
}

cs_codec::RecoveryConfig parse_recovery(const json& obj) {
  if (!obj.is_object()) {
    fail(ErrorCode::Format, "'recovery' must be an object");
  }
  check_keys(obj, "recovery",
             {"mode", "sparsity", "max_iterations", "step_size", "tolerance",
              "magnitude_estimate"});
  cs_codec::RecoveryConfig config;
  if (const json* mode = find(obj, "mode")) {
    if (!mode->is_string()) {
      fail(ErrorCode::Format, "'recovery.mode' must be a string");
    }
    config.mode = parse_recovery_mode(mode->get<std::string>());
  }
  config.sparsity = get_size(obj, "sparsity", config.sparsity);
  config.max_iterations = get_size(obj, "max_iterations",
                                   config.max_iterations);
  config.step_size = get_double(obj, "step_size", config.step_size);
  config.tolerance = get_double(obj, "tolerance", config.tolerance);
  config.magnitude_estimate =
      get_double(obj, "magnitude_estimate", config.magnitude_estimate);
  return config;
}

json parse_document(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Format, std::string("invalid ") + what + ": " + e.what());
  }
}

bounds::BoundParams parse_bound_params(const json& obj) {
  if (!obj.is_object()) {
    fail(ErrorCode::Format, "bound parameters must be an object");
  }
  check_keys(obj, "bound parameters",
             {"lipschitz", "rho1", "rho2", "gradient_bound", "delta",
              "sparsity", "measurements", "dimension", "noise_variance",
              "data_sizes", "learning_rate"});
  bounds::BoundParams params;
  params.lipschitz = get_double(obj, "lipschitz", params.lipschitz);
  params.rho1 = get_double(obj, "rho1", params.rho1);
  params.rho2 = get_double(obj, "rho2", params.rho2);
  params.gradient_bound =
      get_double(obj, "gradient_bound", params.gradient_bound);
  params.delta = get_double(obj, "delta", params.delta);
  params.sparsity = get_size(obj, "sparsity", params.sparsity);
  params.measurements = get_size(obj, "measurements", params.measurements);
  params.dimension = get_size(obj, "dimension", params.dimension);
  params.noise_variance =
      get_double(obj, "noise_variance", params.noise_variance);
  params.learning_rate =
      get_double(obj, "learning_rate", params.learning_rate);
  const json* sizes = find(obj, "data_sizes");
  if (sizes == nullptr || !sizes->is_array() || sizes->empty()) {
    fail(ErrorCode::Format,
         "bound parameters require a non-empty 'data_sizes' array");
  }
  for (const json& entry : *sizes) {
    if (!entry.is_number()) {
      fail(ErrorCode::Format, "'data_sizes' entries must be numbers");
    }
    params.data_sizes.push_back(entry.get<double>());
  }
  return params;
}

}  // namespace

std::string mode_name(learner::Mode mode) {
  return mode == learner::Mode::PERFECT ? "PERFECT" : "OBCSAA";
}

std::string mode_id(learner::Mode mode) {
  return mode == learner::Mode::PERFECT ? "perfect" : "obcsaa";
}

void validate(const ExperimentConfig& config) {
  if (config.label.empty()) {
    fail(ErrorCode::Argument, "experiment label must not be empty");
  }
  for (const char c : config.label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) {
      fail(ErrorCode::Argument,
           "experiment label may use only letters, digits, '_' and '-'");
    }
  }
  if (config.modes.empty()) {
    fail(ErrorCode::Argument, "at least one mode is required");
  }
  for (std::size_t i = 0; i < config.modes.size(); ++i) {
    for (std::size_t j = i + 1; j < config.modes.size(); ++j) {
      if (config.modes[i] == config.modes[j]) {
        fail(ErrorCode::Argument, "duplicate mode in mode list");
      }
    }
  }
  if (config.seeds.empty()) {
    fail(ErrorCode::Argument, "at least one replicate seed is required");
  }
  std::set<std::uint64_t> unique_seeds(config.seeds.begin(),
                                       config.seeds.end());
  if (unique_seeds.size() != config.seeds.size()) {
    fail(ErrorCode::Argument, "duplicate replicate seed");
  }
  if (config.rounds == 0) {
    fail(ErrorCode::Argument, "round count must be positive");
  }
  if (config.workers == 0) {
    fail(ErrorCode::Argument, "worker count must be positive");
  }
  if (config.samples_per_worker == 0) {
    fail(ErrorCode::Argument, "samples per worker must be positive");
  }
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    fail(ErrorCode::Argument, "learning rate must be positive and finite");
  }
  if (!(config.max_power > 0.0) || !std::isfinite(config.max_power)) {
    fail(ErrorCode::Argument, "transmit power limit must be positive");
  }
  if (config.noise_variance < 0.0 || !std::isfinite(config.noise_variance)) {
    fail(ErrorCode::Argument, "noise variance must be non-negative");
  }
  learner::validate(config.architecture);
  const std::size_t dim = config.architecture.param_count();
  if (config.sparsity == 0 || config.sparsity > dim) {
    fail(ErrorCode::Argument,
         "sparsity must lie in [1, parameter count = " + std::to_string(dim) +
             "]");
  }
  if (config.measurements == 0) {
    fail(ErrorCode::Argument, "measurement count must be positive");
  }
  bool uses_channel = false;
  for (const learner::Mode mode : config.modes) {
    uses_channel = uses_channel || mode == learner::Mode::OBCSAA;
  }
  if (uses_channel) {
    if (config.lossless_debug) {
      if (config.measurements != dim) {
        fail(ErrorCode::Argument,
             "lossless debug requires measurements == parameter count");
      }
    } else if (config.measurements >= dim) {
      fail(ErrorCode::Argument,
           "measurements must be smaller than the parameter count " +
               std::to_string(dim));
    }
  }
  if (!(config.lipschitz > 0.0)) {
    fail(ErrorCode::Argument, "smoothness constant must be positive");
  }
  if (config.rho1 < 0.0) {
    fail(ErrorCode::Argument, "divergence offset must be non-negative");
  }
  if (config.rho2 < 0.0 || config.rho2 >= 1.0) {
    fail(ErrorCode::Argument, "divergence ratio must lie in [0, 1)");
  }
  if (config.delta <= 0.0 || config.delta >= 1.0) {
    fail(ErrorCode::Argument, "isometry constant must lie in (0, 1)");
  }
  if (config.dataset.kind == DatasetSpec::Kind::SYNTHETIC) {
    if (config.dataset.feature_dim != config.architecture.input) {
      fail(ErrorCode::Argument,
           "dataset feature length " +
               std::to_string(config.dataset.feature_dim) +
               " does not match architecture input " +
               std::to_string(config.architecture.input));
    }
    if (config.dataset.classes != config.architecture.output) {
      fail(ErrorCode::Argument,
           "dataset class count does not match architecture output");
    }
    if (config.dataset.test_samples == 0) {
      fail(ErrorCode::Argument, "test sample count must be positive");
    }
    if (config.dataset.class_noise < 0.0) {
      fail(ErrorCode::Argument, "class noise must be non-negative");
    }
  } else {
    if (config.dataset.train_images.empty() ||
        config.dataset.train_labels.empty() ||
        config.dataset.test_images.empty() ||
        config.dataset.test_labels.empty()) {
      fail(ErrorCode::Argument, "all four dataset file paths are required");
    }
  }
  if (config.output_dir.empty()) {
    fail(ErrorCode::Argument, "output directory must not be empty");
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  const json doc = parse_document(text, "experiment config");
  if (!doc.is_object()) {
    fail(ErrorCode::Format, "experiment config must be a JSON object");
  }
  check_keys(doc, "config",
             {"label", "modes", "seeds", "master_seed", "rounds", "workers",
              "samples_per_worker", "learning_rate", "sparsity",
              "measurements", "max_power", "snr_db", "noise_variance",
              "architecture", "lipschitz", "rho1", "rho2", "delta",
              "compute_bounds", "solver", "admm", "recovery",
              "gradient_scale", "lossless_debug", "dataset", "output_dir"});

  ExperimentConfig config;
  config.label = get_string(doc, "label", config.label);
  if (const json* modes = find(doc, "modes")) {
    if (!modes->is_array() || modes->empty()) {
      fail(ErrorCode::Format, "'modes' must be a non-empty array");
    }
    config.modes.clear();
    for (const json& entry : *modes) {
      if (!entry.is_string()) {
        fail(ErrorCode::Format, "'modes' entries must be strings");
      }
      config.modes.push_back(parse_mode(entry.get<std::string>()));
    }
  }
  if (const json* seeds = find(doc, "seeds")) {
    if (!seeds->is_array() || seeds->empty()) {
      fail(ErrorCode::Format, "'seeds' must be a non-empty array");
    }
    config.seeds.clear();
    for (const json& entry : *seeds) {
      if (!entry.is_number_unsigned()) {
        fail(ErrorCode::Format,
             "'seeds' entries must be non-negative integers");
      }
      config.seeds.push_back(entry.get<std::uint64_t>());
    }
  }
  config.master_seed = get_u64(doc, "master_seed", config.master_seed);
  config.rounds = get_size(doc, "rounds", config.rounds);
  config.workers = get_size(doc, "workers", config.workers);
  config.samples_per_worker =
      get_size(doc, "samples_per_worker", config.samples_per_worker);
  config.learning_rate =
      get_double(doc, "learning_rate", config.learning_rate);
  config.sparsity = get_size(doc, "sparsity", config.sparsity);
  config.measurements = get_size(doc, "measurements", config.measurements);
  config.max_power = get_double(doc, "max_power", config.max_power);

  const json* snr = find(doc, "snr_db");
  const json* sigma = find(doc, "noise_variance");
  if (snr != nullptr && sigma != nullptr) {
    fail(ErrorCode::Format,
         "give either 'snr_db' or 'noise_variance', not both");
  }
  if (snr != nullptr) {
    if (!snr->is_number()) {
      fail(ErrorCode::Format, "'snr_db' must be a number");
    }
    config.has_snr_db = true;
    config.snr_db = snr->get<double>();
    config.noise_variance =
        config.max_power / std::pow(10.0, config.snr_db / 10.0);
  } else if (sigma != nullptr) {
    config.noise_variance = get_double(doc, "noise_variance", 0.0);
  }

  if (const json* arch = find(doc, "architecture")) {
    config.architecture = parse_architecture(*arch);
  }
  config.lipschitz = get_double(doc, "lipschitz", config.lipschitz);
  config.rho1 = get_double(doc, "rho1", config.rho1);
  config.rho2 = get_double(doc, "rho2", config.rho2);
  config.delta = get_double(doc, "delta", config.delta);
  config.compute_bounds =
      get_bool(doc, "compute_bounds", config.compute_bounds);
  if (const json* solver = find(doc, "solver")) {
    if (!solver->is_string()) {
      fail(ErrorCode::Format, "'solver' must be a string");
    }
    config.solver = parse_solver(solver->get<std::string>());
  }
  if (const json* admm = find(doc, "admm")) {
    config.admm = parse_admm(*admm);
  }
  if (const json* recovery = find(doc, "recovery")) {
    config.recovery = parse_recovery(*recovery);
  }
  if (const json* scale = find(doc, "gradient_scale")) {
    if (!scale->is_string()) {
      fail(ErrorCode::Format, "'gradient_scale' must be a string");
    }
    config.gradient_scale = parse_gradient_scale(scale->get<std::string>());
  }
  config.lossless_debug =
      get_bool(doc, "lossless_debug", config.lossless_debug);
  if (const json* dataset = find(doc, "dataset")) {
    config.dataset = parse_dataset(*dataset);
  }
  config.output_dir = get_string(doc, "output_dir", config.output_dir);

  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::Io, "cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string resolved_json(const ExperimentConfig& config) {
  json doc;
  doc["label"] = config.label;
  json modes = json::array();
  for (const learner::Mode mode : config.modes) modes.push_back(mode_id(mode));
  doc["modes"] = modes;
  doc["seeds"] = config.seeds;
  doc["master_seed"] = config.master_seed;
  doc["rounds"] = config.rounds;
  doc["workers"] = config.workers;
  doc["samples_per_worker"] = config.samples_per_worker;
  doc["learning_rate"] = config.learning_rate;
  doc["sparsity"] = config.sparsity;
  doc["measurements"] = config.measurements;
  doc["max_power"] = config.max_power;
  if (config.has_snr_db) {
    doc["snr_db"] = config.snr_db;
  }
  doc["noise_variance"] = config.noise_variance;

  json arch;
  if (config.architecture.kind == learner::ArchKind::MLP) {
    arch["kind"] = "mlp";
    arch["input"] = config.architecture.input;
    arch["hidden"] = config.architecture.hidden;
    arch["output"] = config.architecture.output;
  } else {
    arch["kind"] = "logistic";
    arch["input"] = config.architecture.input;
    arch["output"] = config.architecture.output;
  }
  doc["architecture"] = arch;

  doc["lipschitz"] = config.lipschitz;
  doc["rho1"] = config.rho1;
  doc["rho2"] = config.rho2;
  doc["delta"] = config.delta;
  doc["compute_bounds"] = config.compute_bounds;
  doc["solver"] = solver_id(config.solver);
  doc["admm"] = {{"step_c", config.admm.step_c},
                 {"abs_tol", config.admm.abs_tol},
                 {"rel_tol", config.admm.rel_tol},
                 {"max_iter", config.admm.max_iter}};
  doc["recovery"] = {{"mode", recovery_id(config.recovery.mode)},
                     {"sparsity", config.recovery.sparsity},
                     {"max_iterations", config.recovery.max_iterations},
                     {"step_size", config.recovery.step_size},
                     {"tolerance", config.recovery.tolerance},
                     {"magnitude_estimate",
                      config.recovery.magnitude_estimate}};
  doc["gradient_scale"] = scale_id(config.gradient_scale);
  doc["lossless_debug"] = config.lossless_debug;

  json dataset;
  if (config.dataset.kind == DatasetSpec::Kind::SYNTHETIC) {
    dataset["kind"] = "synthetic";
    dataset["feature_dim"] = config.dataset.feature_dim;
    dataset["classes"] = config.dataset.classes;
    dataset["test_samples"] = config.dataset.test_samples;
    dataset["class_noise"] = config.dataset.class_noise;
    dataset["generator_seed"] = config.dataset.generator_seed;
  } else {
    dataset["kind"] = "mnist";
    dataset["train_images"] = config.dataset.train_images;
    dataset["train_labels"] = config.dataset.train_labels;
    dataset["test_images"] = config.dataset.test_images;
    dataset["test_labels"] = config.dataset.test_labels;
  }
  doc["dataset"] = dataset;
  doc["output_dir"] = config.output_dir;
  return doc.dump(2) + "\n";
}

scheduler::SchedulerInstance instance_from_json(const std::string& text) {
  const json doc = parse_document(text, "scheduler instance");
  if (!doc.is_object()) {
    fail(ErrorCode::Format, "scheduler instance must be a JSON object");
  }
  check_keys(doc, "scheduler instance",
             {"gains", "workers", "bound_params", "solver", "admm"});

  scheduler::SchedulerInstance instance;
  const json* gains = find(doc, "gains");
  if (gains == nullptr || !gains->is_array() || gains->empty()) {
    fail(ErrorCode::Format, "'gains' must be a non-empty array");
  }
  for (const json& entry : *gains) {
    if (!entry.is_number()) {
      fail(ErrorCode::Format, "'gains' entries must be numbers");
    }
    instance.gains.push_back(entry.get<double>());
  }

  const json* workers = find(doc, "workers");
  if (workers == nullptr || !workers->is_array() || workers->empty()) {
    fail(ErrorCode::Format, "'workers' must be a non-empty array");
  }
  for (const json& entry : *workers) {
    if (!entry.is_object()) {
      fail(ErrorCode::Format, "'workers' entries must be objects");
    }
    check_keys(entry, "worker", {"data_size", "max_power"});
    scheduler::WorkerProfile worker;
    worker.data_size = get_double(entry, "data_size", 0.0);
    worker.max_power = get_double(entry, "max_power", 0.0);
    instance.workers.push_back(worker);
  }

  const json* params = find(doc, "bound_params");
  if (params == nullptr) {
    fail(ErrorCode::Format, "'bound_params' is required");
  }
  instance.bound_params = parse_bound_params(*params);
  return instance;
}

std::string solve_to_json(const std::string& text) {
  const scheduler::SchedulerInstance instance = instance_from_json(text);
  const json doc = parse_document(text, "scheduler instance");

  learner::SolverChoice choice = learner::SolverChoice::AUTO;
  if (const json* solver = find(doc, "solver")) {
    if (!solver->is_string()) {
      fail(ErrorCode::Format, "'solver' must be a string");
    }
    choice = parse_solver(solver->get<std::string>());
  }
  scheduler::AdmmOptions options;
  if (const json* admm = find(doc, "admm")) {
    options = parse_admm(*admm);
  }

  const bool enumerate =
      choice == learner::SolverChoice::ENUMERATION ||
      (choice == learner::SolverChoice::AUTO &&
       instance.workers.size() <= scheduler::kEnumerationCap);
  const scheduler::SchedulerResult result =
      enumerate ? scheduler::solve_enumeration(instance)
                : scheduler::solve_admm(instance, options);

  json out;
  out["schedule"] = result.decision.schedule;
  out["gain_factor"] = result.decision.gain_factor;
  out["objective"] = result.objective;
  out["iterations"] = result.iterations;
  out["converged"] = result.converged;
  return out.dump(2) + "\n";
}

std::string bound_report_json(const std::string& text) {
  const json doc = parse_document(text, "bound request");
  if (!doc.is_object()) {
    fail(ErrorCode::Format, "bound request must be a JSON object");
  }
  check_keys(doc, "bound request", {"params", "schedule", "gain_factor"});
  const json* params = find(doc, "params");
  if (params == nullptr) {
    fail(ErrorCode::Format, "'params' is required");
  }
  const bounds::BoundParams bound_params = parse_bound_params(*params);

  std::vector<int> schedule(bound_params.data_sizes.size(), 1);
  if (const json* entries = find(doc, "schedule")) {
    if (!entries->is_array()) {
      fail(ErrorCode::Format, "'schedule' must be an array");
    }
    schedule.clear();
    for (const json& entry : *entries) {
      if (!entry.is_number_integer()) {
        fail(ErrorCode::Format, "'schedule' entries must be integers");
      }
      schedule.push_back(entry.get<int>());
    }
  }

  if (find(doc, "gain_factor") == nullptr) {
    fail(ErrorCode::Format, "'gain_factor' is required");
  }
  const double gain_factor = get_double(doc, "gain_factor", 0.0);

  const bounds::RoundBoundReport report =
      bounds::round_report(bound_params, schedule, gain_factor);
  json out;
  out["sparsify_bound"] = report.sparsify_bound;
  out["quantize_bound"] = report.quantize_bound;
  out["epsilon"] = report.epsilon;
  out["total_error"] = report.total_error;
  out["b_term"] = report.b_term;
  return out.dump(2) + "\n";
}

}  // namespace obcsaa::harness
