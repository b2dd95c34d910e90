#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "obcsaa/obcsaa.h"

namespace {

int report_failure(int status) {
  const nlohmann::json line{
      {"error", {{"code", status}, {"message", obcsaa_last_error()}}}};
  std::cerr << line.dump() << "\n";
  return status;
}

int report_failure_text(int status, const std::string& message) {
  const nlohmann::json line{
      {"error", {{"code", status}, {"message", message}}}};
  std::cerr << line.dump() << "\n";
  return status;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  out = buffer.str();
  return true;
}

struct ExperimentHandle {
  obcsaa_experiment* ptr = nullptr;
  ~ExperimentHandle() { obcsaa_experiment_destroy(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { obcsaa_string_free(ptr); }
};

int run_command(const std::string& config_path, bool has_mode,
                const std::string& mode, bool has_seed,
                unsigned long long seed, bool has_out,
                const std::string& out_dir) {
  ExperimentHandle handle;
  int status = obcsaa_experiment_create_from_file(config_path.c_str(),
                                                  &handle.ptr);
  if (status != OBCSAA_OK) return report_failure(status);
  if (has_mode) {
    status = obcsaa_experiment_set_mode(handle.ptr, mode.c_str());
    if (status != OBCSAA_OK) return report_failure(status);
  }
  if (has_seed) {
    status = obcsaa_experiment_set_seed(handle.ptr, seed);
    if (status != OBCSAA_OK) return report_failure(status);
  }
  if (has_out) {
    status = obcsaa_experiment_set_output_dir(handle.ptr, out_dir.c_str());
    if (status != OBCSAA_OK) return report_failure(status);
  }

  OwnedString resolved;
  status = obcsaa_experiment_config_json(handle.ptr, &resolved.ptr);
  if (status != OBCSAA_OK) return report_failure(status);
  const std::string directory =
      nlohmann::json::parse(resolved.ptr)["output_dir"].get<std::string>();

  status = obcsaa_experiment_run(handle.ptr);
  if (status != OBCSAA_OK) return report_failure(status);

  OwnedString csv;
  status = obcsaa_experiment_metrics_csv(handle.ptr, &csv.ptr);
  if (status != OBCSAA_OK) return report_failure(status);
  std::size_t rows = 0;
  for (const char* p = csv.ptr; *p != '\0'; ++p) rows += (*p == '\n') ? 1 : 0;
  if (rows > 0) --rows;  // header line

  std::cout << "wrote " << directory << "/metrics.csv (" << rows
            << " rows) and " << directory << "/config.resolved.json\n";
  return 0;
}

int plot_command(const std::string& metrics_path, bool has_out,
                 const std::string& out_dir) {
  std::string directory = out_dir;
  if (!has_out) {
    const auto parent = std::filesystem::path(metrics_path).parent_path();
    directory = parent.empty() ? std::string(".") : parent.string();
  }
  const int status =
      obcsaa_plot_metrics(metrics_path.c_str(), directory.c_str());
  if (status != OBCSAA_OK) return report_failure(status);
  std::cout << "wrote " << directory << "/loss.svg and " << directory
            << "/accuracy.svg\n";
  return 0;
}

int solve_command(const std::string& request_path) {
  std::string request;
  if (!read_file(request_path, request)) {
    return report_failure_text(OBCSAA_E_IO,
                               "cannot open '" + request_path + "'");
  }
  OwnedString reply;
  const int status = obcsaa_solve_instance(request.c_str(), &reply.ptr);
  if (status != OBCSAA_OK) return report_failure(status);
  std::cout << reply.ptr;
  return 0;
}

int bounds_command(const std::string& request_path) {
  std::string request;
  if (!read_file(request_path, request)) {
    return report_failure_text(OBCSAA_E_IO,
                               "cannot open '" + request_path + "'");
  }
  OwnedString reply;
  const int status = obcsaa_bound_report(request.c_str(), &reply.ptr);
  if (status != OBCSAA_OK) return report_failure(status);
  std::cout << reply.ptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulator for 1-bit compressive-sensing federated learning over an "
      "analog multiple-access channel"};
  app.set_version_flag("--version", obcsaa_version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON "
                                        "config and write metrics");
  std::string config_path;
  run->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  std::string mode;
  auto* mode_opt = run->add_option("--mode", mode,
                                   "run a single aggregation mode")
                       ->check(CLI::IsMember({"perfect", "obcsaa"}));
  unsigned long long seed = 0;
  auto* seed_opt =
      run->add_option("--seed", seed, "run a single replicate seed");
  std::string run_out;
  auto* run_out_opt =
      run->add_option("--out", run_out, "override the output directory");

  auto* plot = app.add_subcommand("plot", "Render loss and accuracy charts "
                                          "from a metrics CSV");
  std::string metrics_path;
  plot->add_option("--metrics", metrics_path, "metrics.csv path")->required();
  std::string plot_out;
  auto* plot_out_opt = plot->add_option(
      "--out", plot_out, "output directory (default: beside the CSV)");

  auto* solve = app.add_subcommand(
      "solve", "Solve one worker-selection/power instance (JSON in/out)");
  std::string instance_path;
  solve->add_option("--instance", instance_path, "instance request (JSON)")
      ->required();

  auto* bounds = app.add_subcommand(
      "bounds", "Evaluate the per-round error decomposition (JSON in/out)");
  std::string params_path;
  bounds->add_option("--params", params_path, "bound request (JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure_text(OBCSAA_E_ARGUMENT, e.what());
  }

  if (run->parsed()) {
    return run_command(config_path, mode_opt->count() > 0, mode,
                       seed_opt->count() > 0, seed, run_out_opt->count() > 0,
                       run_out);
  }
  if (plot->parsed()) {
    return plot_command(metrics_path, plot_out_opt->count() > 0, plot_out);
  }
  if (solve->parsed()) {
    return solve_command(instance_path);
  }
  return bounds_command(params_path);
}
