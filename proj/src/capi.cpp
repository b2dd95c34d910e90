#include "obcsaa/obcsaa.h"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <utility>

#include "obcsaa/errors.hpp"
#include "obcsaa/harness.hpp"

struct obcsaa_experiment {
  obcsaa::harness::ExperimentConfig config;
  obcsaa::harness::MetricsTable table;
  bool ran = false;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return OBCSAA_OK;
  } catch (const obcsaa::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return OBCSAA_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return OBCSAA_E_INTERNAL;
  }
}

int argument_error(const char* message) {
  g_last_error = message;
  return OBCSAA_E_ARGUMENT;
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) {
    obcsaa::fail(obcsaa::ErrorCode::Internal, "out of memory");
  }
  std::memcpy(out, text.data(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* obcsaa_last_error(void) { return g_last_error.c_str(); }

const char* obcsaa_version(void) { return "1.0.0"; }

void obcsaa_string_free(char* text) { std::free(text); }

int obcsaa_experiment_create(const char* config_json,
                             obcsaa_experiment** out_handle) {
  if (config_json == nullptr) return argument_error("config_json is null");
  if (out_handle == nullptr) return argument_error("out_handle is null");
  *out_handle = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<obcsaa_experiment>();
    handle->config = obcsaa::harness::config_from_json(config_json);
    *out_handle = handle.release();
  });
}

int obcsaa_experiment_create_from_file(const char* config_path,
                                       obcsaa_experiment** out_handle) {
  if (config_path == nullptr) return argument_error("config_path is null");
  if (out_handle == nullptr) return argument_error("out_handle is null");
  *out_handle = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<obcsaa_experiment>();
    handle->config = obcsaa::harness::load_config(config_path);
    *out_handle = handle.release();
  });
}

int obcsaa_experiment_set_mode(obcsaa_experiment* handle, const char* mode) {
  if (handle == nullptr) return argument_error("handle is null");
  if (mode == nullptr) return argument_error("mode is null");
  return guarded([&] {
    const std::string name(mode);
    obcsaa::harness::ExperimentConfig config = handle->config;
    if (name == "perfect") {
      config.modes = {obcsaa::learner::Mode::PERFECT};
    } else if (name == "obcsaa") {
      config.modes = {obcsaa::learner::Mode::OBCSAA};
    } else {
      obcsaa::fail(obcsaa::ErrorCode::Argument,
                   "unknown mode '" + name +
                       "' (expected 'perfect' or 'obcsaa')");
    }
    obcsaa::harness::validate(config);
    handle->config = std::move(config);
  });
}

int obcsaa_experiment_set_seed(obcsaa_experiment* handle,
                               unsigned long long seed) {
  if (handle == nullptr) return argument_error("handle is null");
  return guarded([&] {
    obcsaa::harness::ExperimentConfig config = handle->config;
    config.seeds = {static_cast<std::uint64_t>(seed)};
    obcsaa::harness::validate(config);
    handle->config = std::move(config);
  });
}

int obcsaa_experiment_set_output_dir(obcsaa_experiment* handle,
                                     const char* output_dir) {
  if (handle == nullptr) return argument_error("handle is null");
  if (output_dir == nullptr) return argument_error("output_dir is null");
  return guarded([&] {
    obcsaa::harness::ExperimentConfig config = handle->config;
    config.output_dir = output_dir;
    obcsaa::harness::validate(config);
    handle->config = std::move(config);
  });
}

int obcsaa_experiment_config_json(obcsaa_experiment* handle,
                                  char** out_json) {
  if (handle == nullptr) return argument_error("handle is null");
  if (out_json == nullptr) return argument_error("out_json is null");
  *out_json = nullptr;
  return guarded([&] {
    *out_json = copy_string(obcsaa::harness::resolved_json(handle->config));
  });
}

int obcsaa_experiment_run(obcsaa_experiment* handle) {
  if (handle == nullptr) return argument_error("handle is null");
  return guarded([&] {
    handle->table = obcsaa::harness::run_experiment(handle->config);
    handle->ran = true;
  });
}

int obcsaa_experiment_metrics_csv(obcsaa_experiment* handle, char** out_csv) {
  if (handle == nullptr) return argument_error("handle is null");
  if (out_csv == nullptr) return argument_error("out_csv is null");
  *out_csv = nullptr;
  return guarded([&] {
    if (!handle->ran) {
      obcsaa::fail(obcsaa::ErrorCode::Argument,
                   "experiment has not been run yet");
    }
    *out_csv = copy_string(obcsaa::harness::to_csv(handle->table));
  });
}

void obcsaa_experiment_destroy(obcsaa_experiment* handle) { delete handle; }

int obcsaa_plot_metrics(const char* metrics_csv_path, const char* out_dir) {
  if (metrics_csv_path == nullptr) {
    return argument_error("metrics_csv_path is null");
  }
  if (out_dir == nullptr) return argument_error("out_dir is null");
  return guarded([&] {
    const obcsaa::harness::MetricsTable table =
        obcsaa::harness::load_csv(metrics_csv_path);
    obcsaa::harness::emit_plots(table, out_dir);
  });
}

int obcsaa_solve_instance(const char* request_json, char** out_json) {
  if (request_json == nullptr) return argument_error("request_json is null");
  if (out_json == nullptr) return argument_error("out_json is null");
  *out_json = nullptr;
  return guarded([&] {
    *out_json = copy_string(obcsaa::harness::solve_to_json(request_json));
  });
}

int obcsaa_bound_report(const char* request_json, char** out_json) {
  if (request_json == nullptr) return argument_error("request_json is null");
  if (out_json == nullptr) return argument_error("out_json is null");
  *out_json = nullptr;
  return guarded([&] {
    *out_json = copy_string(obcsaa::harness::bound_report_json(request_json));
  });
}

}  // extern "C"
