#include "artemis.h"

#include <cmath>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "../core/harness.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

struct VariantTheory {
  artemis_theory_report report;
};

}  // namespace

struct artemis_experiment {
  artemis::RunConfig config;
  std::optional<artemis::ExperimentResult> result;
  bool prepared = false;
  bool ran = false;
};

namespace {

template <typename F>
artemis_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ARTEMIS_OK;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return ARTEMIS_ERR_INVALID_ARGUMENT;
  } catch (const std::ios_base::failure& e) {
    set_error(e.what());
    return ARTEMIS_ERR_IO;
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    const std::string what = e.what();
    if (what.find("diverged") != std::string::npos) return ARTEMIS_ERR_DIVERGED;
    if (what.find("cannot open") != std::string::npos ||
        what.find("cannot write") != std::string::npos)
      return ARTEMIS_ERR_IO;
    return ARTEMIS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ARTEMIS_ERR_INTERNAL;
  }
}

artemis_status require(bool cond, const char* msg) {
  if (cond) return ARTEMIS_OK;
  set_error(msg);
  return ARTEMIS_ERR_INVALID_ARGUMENT;
}

// Prepare without simulating: dataset, optimum, constants, resolved gammas.
void prepare_impl(artemis_experiment* handle) {
  if (handle->prepared) return;
  artemis::RunConfig probe = handle->config;
  probe.iterations = 0;
  probe.runs = 1;
  probe.averaging = false;
  handle->result = artemis::run_experiment(probe);
  handle->prepared = true;
  handle->ran = false;
}

}  // namespace

extern "C" {

const char* artemis_version(void) { return "1.0.0"; }

const char* artemis_status_message(artemis_status status) {
  switch (status) {
    case ARTEMIS_OK: return "ok";
    case ARTEMIS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ARTEMIS_ERR_IO: return "i/o error";
    case ARTEMIS_ERR_DIVERGED: return "run diverged";
    case ARTEMIS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* artemis_last_error(void) { return g_last_error.c_str(); }

artemis_status artemis_experiment_from_file(const char* path,
                                            artemis_experiment** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] {
    auto* handle = new artemis_experiment;
    handle->config = artemis::load_config(path);
    *out = handle;
  });
}

artemis_status artemis_experiment_from_json(const char* text,
                                            artemis_experiment** out) {
  if (auto s = require(text && out, "null argument")) return s;
  return guarded([&] {
    auto* handle = new artemis_experiment;
    handle->config = artemis::parse_config(text);
    *out = handle;
  });
}

artemis_status artemis_experiment_from_preset(const char* name,
                                              artemis_experiment** out) {
  if (auto s = require(name && out, "null argument")) return s;
  return guarded([&] {
    auto* handle = new artemis_experiment;
    handle->config = artemis::preset_experiment(name);
    *out = handle;
  });
}

void artemis_experiment_free(artemis_experiment* handle) { delete handle; }

artemis_status artemis_experiment_set_output_dir(artemis_experiment* handle,
                                                 const char* dir) {
  if (auto s = require(handle && dir, "null argument")) return s;
  handle->config.output_dir = dir;
  g_last_error.clear();
  return ARTEMIS_OK;
}

artemis_status artemis_experiment_name(const artemis_experiment* handle,
                                       const char** out) {
  if (auto s = require(handle && out, "null argument")) return s;
  *out = handle->config.name.c_str();
  g_last_error.clear();
  return ARTEMIS_OK;
}

artemis_status artemis_experiment_prepare(artemis_experiment* handle) {
  if (auto s = require(handle != nullptr, "null handle")) return s;
  return guarded([&] { prepare_impl(handle); });
}

artemis_status artemis_experiment_run(artemis_experiment* handle) {
  if (auto s = require(handle != nullptr, "null handle")) return s;
  return guarded([&] {
    handle->result = artemis::run_experiment(handle->config);
    handle->prepared = true;
    handle->ran = true;
    artemis::write_experiment(*handle->result, handle->config);
  });
}

artemis_status artemis_experiment_trace_count(const artemis_experiment* handle,
                                              int* out) {
  if (auto s = require(handle && out, "null argument")) return s;
  if (auto s = require(handle->ran, "experiment has not been run")) return s;
  *out = static_cast<int>(handle->result->traces.size());
  return ARTEMIS_OK;
}

artemis_status artemis_experiment_trace_name(const artemis_experiment* handle,
                                             int trace, const char** out) {
  if (auto s = require(handle && out, "null argument")) return s;
  if (auto s = require(handle->ran, "experiment has not been run")) return s;
  if (auto s = require(
          trace >= 0 &&
              trace < static_cast<int>(handle->result->traces.size()),
          "trace index out of range"))
    return s;
  *out = handle->result->traces[trace].variant.c_str();
  return ARTEMIS_OK;
}

artemis_status artemis_experiment_trace_length(const artemis_experiment* handle,
                                               long long* out) {
  if (auto s = require(handle && out, "null argument")) return s;
  if (auto s = require(handle->ran, "experiment has not been run")) return s;
  *out = handle->config.iterations + 1;
  return ARTEMIS_OK;
}

artemis_status artemis_experiment_series(const artemis_experiment* handle,
                                         int trace, artemis_series series,
                                         double* buf, long long capacity,
                                         long long* written) {
  if (auto s = require(handle && buf && written, "null argument")) return s;
  if (auto s = require(handle->ran, "experiment has not been run")) return s;
  if (auto s = require(
          trace >= 0 &&
              trace < static_cast<int>(handle->result->traces.size()),
          "trace index out of range"))
    return s;
  if (auto s = require(capacity >= 0, "negative capacity")) return s;
  const artemis::MetricsTrace& t = handle->result->traces[trace];
  const std::vector<double>* values = nullptr;
  const std::vector<long long>* counters = nullptr;
  switch (series) {
    case ARTEMIS_SERIES_MEAN_LOG10_EXCESS: values = &t.mean_log10_excess; break;
    case ARTEMIS_SERIES_STD_LOG10_EXCESS: values = &t.std_log10_excess; break;
    case ARTEMIS_SERIES_MEAN_EXCESS: values = &t.mean_excess; break;
    case ARTEMIS_SERIES_MEAN_DIST_SQ: values = &t.mean_dist_sq; break;
    case ARTEMIS_SERIES_UP_BITS: counters = &t.up_bits; break;
    case ARTEMIS_SERIES_DOWN_BITS: counters = &t.down_bits; break;
  }
  if (!values && !counters) {
    set_error("unknown series");
    return ARTEMIS_ERR_INVALID_ARGUMENT;
  }
  const std::size_t len = values ? values->size() : counters->size();
  const std::size_t n =
      std::min<std::size_t>(len, static_cast<std::size_t>(capacity));
  for (std::size_t i = 0; i < n; ++i)
    buf[i] = values ? (*values)[i] : static_cast<double>((*counters)[i]);
  *written = static_cast<long long>(n);
  g_last_error.clear();
  return ARTEMIS_OK;
}

artemis_status artemis_experiment_theory(const artemis_experiment* handle,
                                         int variant,
                                         artemis_theory_report* out) {
  if (auto s = require(handle && out, "null argument")) return s;
  if (auto s = require(handle->prepared,
                       "experiment has not been prepared or run"))
    return s;
  if (auto s = require(
          variant >= 0 &&
              variant < static_cast<int>(handle->config.variants.size()),
          "variant index out of range"))
    return s;
  return guarded([&] {
    const artemis::ExperimentResult& res = *handle->result;
    artemis::VariantConfig v = handle->config.variants[variant];
    v.gamma = res.resolved_gammas[variant];
    artemis::TheoryInput in = artemis::theory_input(
        v, res.constants, res.dim, handle->config.batch, res.delta0_sq,
        std::max(handle->config.iterations, 1LL));
    in.workers = res.workers;

    artemis_theory_report r = {};
    r.smoothness = in.smoothness;
    r.strong_convexity = in.strong_convexity;
    r.b_squared = in.b_squared;
    r.sigma_star_sq = in.sigma_star_sq;
    r.omega_up = in.omega_up;
    r.omega_down = in.omega_down;
    r.gamma = in.gamma;
    r.gamma_max = artemis::gamma_max(in);
    r.alpha = in.alpha;
    if (in.with_memory()) {
      const artemis::AlphaRange ar = artemis::alpha_range(in);
      r.alpha_lo = ar.lo;
      r.alpha_hi = ar.hi;
      const artemis::Interval ci = artemis::constant_C_interval(in);
      r.c_lo = ci.lo;
      r.c_hi = ci.hi;
    }
    r.constant_e = artemis::constant_E(in);
    r.saturation = artemis::predict_saturation(in);
    const artemis::AveragingResult avg = artemis::gamma_opt_averaging(in);
    r.gamma_averaging = avg.gamma_opt;
    r.averaged_bound = avg.bound;
    *out = r;
  });
}

int artemis_preset_count(int kind) {
  if (kind == 0) return static_cast<int>(artemis::preset_names().size());
  if (kind == 1)
    return static_cast<int>(artemis::preset_experiment_names().size());
  return 0;
}

const char* artemis_preset_name(int kind, int index) {
  static thread_local std::string storage;
  std::vector<std::string> names;
  if (kind == 0)
    names = artemis::preset_names();
  else if (kind == 1)
    names = artemis::preset_experiment_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  storage = names[index];
  return storage.c_str();
}

}  // extern "C"
