// Command-line front end; talks to the simulator through the C API only.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "artemis.h"

namespace {

int fail(artemis_status status) {
  std::fprintf(stderr, "error: %s: %s\n", artemis_status_message(status),
               artemis_last_error());
  switch (status) {
    case ARTEMIS_ERR_INVALID_ARGUMENT: return 1;
    case ARTEMIS_ERR_DIVERGED: return 2;
    case ARTEMIS_ERR_IO: return 3;
    default: return 4;
  }
}

struct HandleGuard {
  artemis_experiment* handle = nullptr;
  ~HandleGuard() { artemis_experiment_free(handle); }
};

artemis_status open_experiment(const std::string& config,
                               const std::string& preset,
                               artemis_experiment** out) {
  if (!config.empty()) return artemis_experiment_from_file(config.c_str(), out);
  return artemis_experiment_from_preset(preset.c_str(), out);
}

std::string default_out_dir() {
  const char* env = std::getenv("ARTEMIS_OUT_DIR");
  return env && *env ? env : ".";
}

int cmd_run(const std::string& config, const std::string& preset,
            const std::string& out_dir) {
  HandleGuard guard;
  if (artemis_status s = open_experiment(config, preset, &guard.handle))
    return fail(s);
  if (!out_dir.empty()) {
    if (artemis_status s =
            artemis_experiment_set_output_dir(guard.handle, out_dir.c_str()))
      return fail(s);
  }
  if (artemis_status s = artemis_experiment_run(guard.handle)) return fail(s);

  const char* name = nullptr;
  artemis_experiment_name(guard.handle, &name);
  int traces = 0;
  long long length = 0;
  artemis_experiment_trace_count(guard.handle, &traces);
  artemis_experiment_trace_length(guard.handle, &length);
  std::printf("wrote %s/%s.csv and %s/%s.meta.json\n", out_dir.c_str(), name,
              out_dir.c_str(), name);
  for (int i = 0; i < traces; ++i) {
    const char* variant = nullptr;
    artemis_experiment_trace_name(guard.handle, i, &variant);
    double last_log = 0.0, last_up = 0.0, last_down = 0.0;
    long long written = 0;
    std::vector<double> buf(static_cast<std::size_t>(length));
    artemis_experiment_series(guard.handle, i, ARTEMIS_SERIES_MEAN_LOG10_EXCESS,
                              buf.data(), length, &written);
    if (written > 0) last_log = buf[written - 1];
    artemis_experiment_series(guard.handle, i, ARTEMIS_SERIES_UP_BITS,
                              buf.data(), length, &written);
    if (written > 0) last_up = buf[written - 1];
    artemis_experiment_series(guard.handle, i, ARTEMIS_SERIES_DOWN_BITS,
                              buf.data(), length, &written);
    if (written > 0) last_down = buf[written - 1];
    std::printf("  %-16s final log10 excess %9.4f  bits up %.3g down %.3g\n",
                variant, last_log, last_up, last_down);
  }
  return 0;
}

void print_report(const char* variant, const artemis_theory_report& r) {
  std::printf("[%s]\n", variant);
  std::printf("  %-22s %.10g\n", "smoothness_L", r.smoothness);
  std::printf("  %-22s %.10g\n", "strong_convexity_mu", r.strong_convexity);
  std::printf("  %-22s %.10g\n", "b_squared", r.b_squared);
  std::printf("  %-22s %.10g\n", "sigma_star_sq", r.sigma_star_sq);
  std::printf("  %-22s %.10g\n", "omega_up", r.omega_up);
  std::printf("  %-22s %.10g\n", "omega_down", r.omega_down);
  std::printf("  %-22s %.10g\n", "gamma", r.gamma);
  std::printf("  %-22s %.10g\n", "gamma_max", r.gamma_max);
  std::printf("  %-22s %.10g\n", "alpha", r.alpha);
  if (r.alpha != 0.0) {
    std::printf("  %-22s [%.10g, %.10g)\n", "alpha_range", r.alpha_lo,
                r.alpha_hi);
    std::printf("  %-22s [%.10g, %.10g]\n", "constant_C", r.c_lo, r.c_hi);
  }
  std::printf("  %-22s %.10g\n", "constant_E", r.constant_e);
  std::printf("  %-22s %.10g\n", "saturation", r.saturation);
  std::printf("  %-22s %.10g\n", "gamma_averaging", r.gamma_averaging);
  std::printf("  %-22s %.10g\n", "averaged_bound", r.averaged_bound);
}

int cmd_theory(const std::string& config, const std::string& preset) {
  HandleGuard guard;
  if (artemis_status s = open_experiment(config, preset, &guard.handle))
    return fail(s);
  if (artemis_status s = artemis_experiment_prepare(guard.handle))
    return fail(s);
  const char* name = nullptr;
  artemis_experiment_name(guard.handle, &name);
  std::printf("experiment: %s\n", name);
  for (int i = 0;; ++i) {
    artemis_theory_report report;
    const artemis_status s =
        artemis_experiment_theory(guard.handle, i, &report);
    if (s == ARTEMIS_ERR_INVALID_ARGUMENT) break;  // past the last variant
    if (s != ARTEMIS_OK) return fail(s);
    char label[32];
    std::snprintf(label, sizeof(label), "variant %d", i);
    print_report(label, report);
  }
  return 0;
}

int cmd_presets() {
  std::printf("algorithm variants:\n");
  for (int i = 0; i < artemis_preset_count(0); ++i)
    std::printf("  %s\n", artemis_preset_name(0, i));
  std::printf("experiments:\n");
  for (int i = 0; i < artemis_preset_count(1); ++i)
    std::printf("  %s\n", artemis_preset_name(1, i));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed distributed SGD simulator"};
  app.require_subcommand(1);

  std::string config, preset, out_dir = default_out_dir();

  CLI::App* run = app.add_subcommand("run", "Run an experiment, write CSV");
  auto* run_cfg = run->add_option("--config", config, "JSON config file");
  auto* run_preset = run->add_option("--preset", preset, "experiment preset");
  run->add_option("--out", out_dir,
                  "output directory (default $ARTEMIS_OUT_DIR or .)");
  run_cfg->excludes(run_preset);

  CLI::App* theory =
      app.add_subcommand("theory", "Print theoretical constants");
  auto* th_cfg = theory->add_option("--config", config, "JSON config file");
  auto* th_preset = theory->add_option("--preset", preset, "experiment preset");
  th_cfg->excludes(th_preset);

  CLI::App* presets = app.add_subcommand("presets", "List named presets");
  presets->add_subcommand("list", "List algorithm and experiment presets");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (config.empty() && preset.empty()) {
      std::fprintf(stderr, "error: run needs --config or --preset\n");
      return 1;
    }
    return cmd_run(config, preset, out_dir);
  }
  if (theory->parsed()) {
    if (config.empty() && preset.empty()) {
      std::fprintf(stderr, "error: theory needs --config or --preset\n");
      return 1;
    }
    return cmd_theory(config, preset);
  }
  if (presets->parsed()) return cmd_presets();
  return 1;
}
