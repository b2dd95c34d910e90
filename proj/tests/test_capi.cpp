#include "obcsaa/obcsaa.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("obcsaa_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string take_string(char* text) {
  REQUIRE(text != nullptr);
  std::string out(text);
  obcsaa_string_free(text);
  return out;
}

const char kTinyConfig[] = R"json({
  "label": "capi",
  "modes": ["perfect", "obcsaa"],
  "seeds": [1],
  "master_seed": 99,
  "rounds": 3,
  "workers": 2,
  "samples_per_worker": 15,
  "learning_rate": 0.2,
  "sparsity": 4,
  "measurements": 16,
  "noise_variance": 0.01,
  "rho1": 1.0,
  "rho2": 0.1,
  "delta": 0.2,
  "architecture": {"kind": "logistic", "input": 9, "output": 4},
  "dataset": {"kind": "synthetic", "feature_dim": 9, "classes": 4,
              "test_samples": 12, "class_noise": 0.5, "generator_seed": 7}
})json";

std::size_t count_lines(const std::string& text) {
  std::size_t count = 0;
  for (const char c : text) count += (c == '\n') ? 1 : 0;
  return count;
}

}  // namespace

TEST_CASE("version and error text are always available") {
  REQUIRE(obcsaa_version() != nullptr);
  CHECK(std::strlen(obcsaa_version()) >= 5);
  REQUIRE(obcsaa_last_error() != nullptr);
}

TEST_CASE("null arguments are rejected with status codes") {
  obcsaa_experiment* handle = nullptr;
  CHECK(obcsaa_experiment_create(nullptr, &handle) == OBCSAA_E_ARGUMENT);
  CHECK(handle == nullptr);
  CHECK(obcsaa_experiment_create(kTinyConfig, nullptr) == OBCSAA_E_ARGUMENT);
  CHECK(obcsaa_experiment_run(nullptr) == OBCSAA_E_ARGUMENT);
  CHECK(obcsaa_plot_metrics(nullptr, "x") == OBCSAA_E_ARGUMENT);
  CHECK(std::strlen(obcsaa_last_error()) > 0);
}

TEST_CASE("malformed configs report format errors") {
  obcsaa_experiment* handle = nullptr;
  CHECK(obcsaa_experiment_create("{\"roundz\": 1}", &handle) ==
        OBCSAA_E_FORMAT);
  CHECK(handle == nullptr);
  CHECK(std::string(obcsaa_last_error()).find("roundz") !=
        std::string::npos);

  CHECK(obcsaa_experiment_create("nonsense", &handle) == OBCSAA_E_FORMAT);
  CHECK(handle == nullptr);

  CHECK(obcsaa_experiment_create_from_file("/no/such/config.json", &handle) ==
        OBCSAA_E_IO);
  CHECK(handle == nullptr);
}

TEST_CASE("experiment lifecycle through the c surface") {
  const fs::path dir = fresh_dir("capi_run");
  obcsaa_experiment* handle = nullptr;
  REQUIRE(obcsaa_experiment_create(kTinyConfig, &handle) == OBCSAA_OK);
  REQUIRE(handle != nullptr);
  CHECK(std::strlen(obcsaa_last_error()) == 0);

  char* text = nullptr;
  CHECK(obcsaa_experiment_metrics_csv(handle, &text) == OBCSAA_E_ARGUMENT);
  CHECK(text == nullptr);

  CHECK(obcsaa_experiment_set_mode(handle, "sideways") == OBCSAA_E_ARGUMENT);
  REQUIRE(obcsaa_experiment_set_mode(handle, "perfect") == OBCSAA_OK);
  REQUIRE(obcsaa_experiment_set_seed(handle, 5) == OBCSAA_OK);
  REQUIRE(obcsaa_experiment_set_output_dir(handle, dir.string().c_str()) ==
          OBCSAA_OK);

  REQUIRE(obcsaa_experiment_config_json(handle, &text) == OBCSAA_OK);
  const std::string resolved = take_string(text);
  CHECK(resolved.find("\"perfect\"") != std::string::npos);
  CHECK(resolved.find("\"obcsaa\"") == std::string::npos);
  CHECK(resolved.find("\"seeds\": [\n    5\n  ]") != std::string::npos);

  REQUIRE(obcsaa_experiment_run(handle) == OBCSAA_OK);
  text = nullptr;
  REQUIRE(obcsaa_experiment_metrics_csv(handle, &text) == OBCSAA_OK);
  const std::string csv = take_string(text);
  CHECK(csv.rfind("run_id,mode,seed,round,", 0) == 0);
  CHECK(count_lines(csv) == 4);  // header + one mode x one seed x 3 rounds
  CHECK(csv.find("capi_perfect_s5") != std::string::npos);

  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "config.resolved.json"));

  obcsaa_experiment_destroy(handle);
  obcsaa_experiment_destroy(nullptr);  // must be a safe no-op
}

TEST_CASE("plotting through the c surface") {
  const fs::path dir = fresh_dir("capi_plot");
  obcsaa_experiment* handle = nullptr;
  REQUIRE(obcsaa_experiment_create(kTinyConfig, &handle) == OBCSAA_OK);
  REQUIRE(obcsaa_experiment_set_output_dir(handle, dir.string().c_str()) ==
          OBCSAA_OK);
  REQUIRE(obcsaa_experiment_run(handle) == OBCSAA_OK);
  obcsaa_experiment_destroy(handle);

  const std::string csv = (dir / "metrics.csv").string();
  const std::string plots = (dir / "plots").string();
  REQUIRE(obcsaa_plot_metrics(csv.c_str(), plots.c_str()) == OBCSAA_OK);
  CHECK(fs::exists(fs::path(plots) / "loss.svg"));
  CHECK(fs::exists(fs::path(plots) / "accuracy.svg"));

  CHECK(obcsaa_plot_metrics("/no/such/metrics.csv", plots.c_str()) ==
        OBCSAA_E_IO);
}

TEST_CASE("solver and bound front-ends answer in json") {
  const char request[] = R"json({
    "gains": [1.0, 0.5],
    "workers": [
      {"data_size": 10, "max_power": 1.0},
      {"data_size": 20, "max_power": 2.0}
    ],
    "bound_params": {
      "lipschitz": 2.0, "rho1": 0.5, "rho2": 0.25, "gradient_bound": 2.0,
      "delta": 0.2, "sparsity": 20, "measurements": 80, "dimension": 100,
      "noise_variance": 0.04, "data_sizes": [10, 20], "learning_rate": 0.1
    }
  })json";
  char* text = nullptr;
  REQUIRE(obcsaa_solve_instance(request, &text) == OBCSAA_OK);
  const std::string solved = take_string(text);
  CHECK(solved.find("\"schedule\"") != std::string::npos);
  CHECK(solved.find("\"gain_factor\"") != std::string::npos);
  CHECK(solved.find("\"objective\"") != std::string::npos);

  const char bound_request[] = R"json({
    "params": {
      "lipschitz": 2.0, "rho1": 0.5, "rho2": 0.25, "gradient_bound": 2.0,
      "delta": 0.2, "sparsity": 20, "measurements": 80, "dimension": 100,
      "noise_variance": 0.04, "data_sizes": [10, 20], "learning_rate": 0.1
    },
    "schedule": [1, 1],
    "gain_factor": 0.02
  })json";
  text = nullptr;
  REQUIRE(obcsaa_bound_report(bound_request, &text) == OBCSAA_OK);
  const std::string report = take_string(text);
  CHECK(report.find("\"total_error\"") != std::string::npos);
  CHECK(report.find("\"b_term\"") != std::string::npos);

  text = nullptr;
  CHECK(obcsaa_solve_instance("{\"gains\": []}", &text) == OBCSAA_E_FORMAT);
  CHECK(text == nullptr);
}
