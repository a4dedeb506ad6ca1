// Smoke test of the shared-library interface; uses only artemis.h.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "artemis.h"

namespace {

int failures = 0;

void check(bool ok, const char* what) {
  if (!ok) {
    std::fprintf(stderr, "FAILED: %s (last error: %s)\n", what,
                 artemis_last_error());
    ++failures;
  }
}

const char* kConfig = R"({
  "name": "capi_smoke",
  "dataset": {"kind": "lsr", "workers": 3, "points": 20, "dim": 4,
              "noise_std": 0.2, "seed": 5},
  "variants": ["sgd", "artemis"],
  "iterations": 15,
  "runs": 2,
  "seed": 11,
  "batch": 1,
  "gamma": {"mode": "max-fraction", "value": 0.5}
})";

}  // namespace

int main() {
  check(std::strcmp(artemis_status_message(ARTEMIS_OK), "ok") == 0,
        "status message");
  check(artemis_version() != nullptr, "version");

  artemis_experiment* bad = nullptr;
  check(artemis_experiment_from_preset("no-such-preset", &bad) ==
            ARTEMIS_ERR_INVALID_ARGUMENT,
        "unknown preset is rejected");
  check(std::strlen(artemis_last_error()) > 0, "error message is set");
  check(artemis_experiment_from_json("not json", &bad) != ARTEMIS_OK,
        "bad json is rejected");
  check(artemis_experiment_from_file(nullptr, &bad) ==
            ARTEMIS_ERR_INVALID_ARGUMENT,
        "null path is rejected");

  artemis_experiment* exp = nullptr;
  check(artemis_experiment_from_json(kConfig, &exp) == ARTEMIS_OK,
        "config parses");
  if (!exp) return 1;

  int count = 0;
  check(artemis_experiment_trace_count(exp, &count) != ARTEMIS_OK,
        "results unavailable before run");

  const auto out_dir =
      std::filesystem::temp_directory_path() / "artemis_capi_test";
  std::filesystem::remove_all(out_dir);
  check(artemis_experiment_set_output_dir(exp, out_dir.string().c_str()) ==
            ARTEMIS_OK,
        "set output dir");

  check(artemis_experiment_prepare(exp) == ARTEMIS_OK, "prepare");
  artemis_theory_report report;
  check(artemis_experiment_theory(exp, 1, &report) == ARTEMIS_OK,
        "theory report");
  check(report.gamma_max > 0.0, "positive step bound");
  check(report.gamma > 0.0 && report.gamma <= report.gamma_max,
        "resolved step is admissible");
  check(report.alpha_lo <= report.alpha && report.alpha < report.alpha_hi,
        "memory rate inside its admissible range");
  check(report.smoothness >= report.strong_convexity, "mu <= L");

  check(artemis_experiment_run(exp) == ARTEMIS_OK, "run");
  check(artemis_experiment_trace_count(exp, &count) == ARTEMIS_OK &&
            count == 2,
        "two traces");
  const char* name = nullptr;
  check(artemis_experiment_trace_name(exp, 0, &name) == ARTEMIS_OK &&
            std::strcmp(name, "sgd") == 0,
        "first trace name");
  long long length = 0;
  check(artemis_experiment_trace_length(exp, &length) == ARTEMIS_OK &&
            length == 16,
        "trace length");

  double buf[16];
  long long written = 0;
  check(artemis_experiment_series(exp, 0, ARTEMIS_SERIES_MEAN_EXCESS, buf, 16,
                                  &written) == ARTEMIS_OK &&
            written == 16,
        "series extraction");
  check(buf[0] > 0.0 && std::isfinite(buf[15]), "sane excess values");
  check(artemis_experiment_series(exp, 0, ARTEMIS_SERIES_UP_BITS, buf, 16,
                                  &written) == ARTEMIS_OK &&
            buf[15] == 15.0 * 3 * 32 * 4,
        "bit counter series");
  check(artemis_experiment_series(exp, 5, ARTEMIS_SERIES_UP_BITS, buf, 16,
                                  &written) == ARTEMIS_ERR_INVALID_ARGUMENT,
        "trace index is validated");

  check(std::filesystem::exists(out_dir / "capi_smoke.csv"), "csv written");
  check(std::filesystem::exists(out_dir / "capi_smoke.meta.json"),
        "metadata written");

  artemis_experiment_free(exp);
  artemis_experiment_free(nullptr);

  check(artemis_preset_count(0) == 6, "six algorithm presets");
  check(artemis_preset_count(1) == 4, "four experiment presets");
  check(artemis_preset_name(0, 0) != nullptr, "preset names readable");
  check(artemis_preset_name(0, 99) == nullptr, "preset index validated");

  if (failures == 0) std::printf("capi smoke test passed\n");
  return failures == 0 ? 0 : 1;
}
