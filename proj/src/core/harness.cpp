#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace artemis {

namespace {

using nlohmann::ordered_json;

// Excess losses are clamped before taking logs; interpolation runs hit exact
// machine-zero excess.
constexpr double kLogFloor = 1e-20;

double log10_excess(double excess) {
  return std::log10(std::max(excess, kLogFloor));
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

ObjectiveKind parse_objective(const std::string& s) {
  if (s == "least-squares") return ObjectiveKind::LeastSquares;
  if (s == "logistic") return ObjectiveKind::Logistic;
  throw std::invalid_argument("config: unknown objective '" + s + "'");
}

CompressionKind parse_compression(const ordered_json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "identity") return CompressionKind::identity();
    throw std::invalid_argument("config: unknown compression '" + s + "'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "identity") return CompressionKind::identity();
  if (type == "quantization")
    return CompressionKind::quantization(j.value("levels", 1));
  if (type == "sparsification")
    return CompressionKind::sparsification(j.at("keep_prob").get<double>());
  throw std::invalid_argument("config: unknown compression type '" + type +
                              "'");
}

VariantConfig parse_variant(const ordered_json& j, int dim,
                            double participation, PPMode pp_mode) {
  if (j.is_string()) {
    VariantConfig v = preset_variant(j.get<std::string>(), dim);
    v.participation = participation;
    v.pp_mode = pp_mode;
    return v;
  }
  VariantConfig v;
  if (j.contains("preset")) {
    v = preset_variant(j.at("preset").get<std::string>(), dim);
  } else {
    v.uplink = parse_compression(j.at("uplink"));
    v.downlink = parse_compression(j.at("downlink"));
  }
  v.name = j.value("name", v.name);
  if (v.name.empty())
    throw std::invalid_argument("config: variant needs a name");
  if (j.contains("alpha")) v.alpha = j.at("alpha").get<double>();
  v.participation = j.value("participation", participation);
  if (j.contains("pp_mode")) {
    const std::string m = j.at("pp_mode").get<std::string>();
    if (m == "pp1")
      v.pp_mode = PPMode::PP1;
    else if (m == "pp2")
      v.pp_mode = PPMode::PP2;
    else
      throw std::invalid_argument("config: pp_mode must be pp1 or pp2");
  } else {
    v.pp_mode = pp_mode;
  }
  if (j.contains("gamma")) v.gamma = j.at("gamma").get<double>();
  return v;
}

DatasetSpec parse_dataset(const ordered_json& j) {
  DatasetSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lsr") {
    spec.kind = DatasetSpec::Kind::Lsr;
    spec.workers = j.at("workers").get<int>();
    spec.points = j.at("points").get<int>();
    spec.dim = j.at("dim").get<int>();
    spec.noise_std = j.value("noise_std", 0.0);
  } else if (kind == "logistic") {
    spec.kind = DatasetSpec::Kind::LogisticNonIid;
    spec.workers = j.at("workers").get<int>();
    spec.points = j.at("points").get<int>();
    spec.dim = 2;
  } else if (kind == "csv") {
    spec.kind = DatasetSpec::Kind::Csv;
    spec.path = j.at("path").get<std::string>();
    spec.has_header = j.value("header", false);
    spec.standardize = j.value("standardize", true);
    spec.partition.workers = j.at("workers").get<int>();
    spec.workers = spec.partition.workers;
    const std::string part = j.value("partition", "round-robin");
    if (part == "round-robin") {
      spec.partition.mode = PartitionSpec::Mode::RoundRobin;
    } else if (part == "feature-quantile") {
      spec.partition.mode = PartitionSpec::Mode::FeatureQuantile;
      spec.partition.feature = j.value("feature", 0);
    } else if (part == "assignment-file") {
      spec.partition.mode = PartitionSpec::Mode::AssignmentFile;
      spec.partition.path = j.at("assignment").get<std::string>();
    } else {
      throw std::invalid_argument("config: unknown partition '" + part + "'");
    }
  } else {
    throw std::invalid_argument("config: unknown dataset kind '" + kind + "'");
  }
  spec.seed = j.value("seed", 1ULL);
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  RunConfig config;
  config.name = j.value("name", std::string("experiment"));
  config.dataset = parse_dataset(j.at("dataset"));
  config.objective =
      j.contains("objective")
          ? parse_objective(j.at("objective").get<std::string>())
          : (config.dataset.kind == DatasetSpec::Kind::LogisticNonIid
                 ? ObjectiveKind::Logistic
                 : ObjectiveKind::LeastSquares);
  config.iterations = j.value("iterations", 100LL);
  config.runs = j.value("runs", 1);
  config.seed = j.value("seed", 42ULL);
  config.batch = j.value("batch", 1);
  config.averaging = j.value("averaging", false);
  config.output_dir = j.value("output", std::string("."));

  double participation = j.value("participation", 1.0);
  PPMode pp_mode = PPMode::PP1;
  if (j.contains("pp_mode")) {
    const std::string m = j.at("pp_mode").get<std::string>();
    if (m == "pp2") pp_mode = PPMode::PP2;
    else if (m != "pp1")
      throw std::invalid_argument("config: pp_mode must be pp1 or pp2");
  }
  if (j.contains("gamma")) {
    const auto& g = j.at("gamma");
    const std::string mode = g.at("mode").get<std::string>();
    if (mode == "constant")
      config.gamma.mode = GammaRule::Mode::Constant;
    else if (mode == "max-fraction")
      config.gamma.mode = GammaRule::Mode::MaxFraction;
    else if (mode == "inv-sqrt")
      config.gamma.mode = GammaRule::Mode::InvSqrt;
    else
      throw std::invalid_argument("config: unknown gamma mode '" + mode + "'");
    config.gamma.value = g.value("value", config.gamma.value);
  }

  const int dim = config.dataset.dim;
  for (const auto& entry : j.at("variants"))
    config.variants.push_back(parse_variant(entry, dim, participation, pp_mode));
  if (config.variants.empty())
    throw std::invalid_argument("config: at least one variant required");
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Dataset build_dataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetSpec::Kind::Lsr:
      return gen_lsr(spec.workers, spec.points, spec.dim, spec.noise_std,
                     spec.seed)
          .dataset;
    case DatasetSpec::Kind::LogisticNonIid:
      return gen_logistic_noniid(spec.workers, spec.points, spec.seed);
    case DatasetSpec::Kind::Csv:
      return load_csv(spec.path, spec.partition, spec.has_header,
                      spec.standardize);
  }
  throw std::logic_error("build_dataset: unhandled kind");
}

TheoryInput theory_input(const VariantConfig& variant,
                         const ProblemConstants& constants, int dim, int batch,
                         double delta0_sq, long long horizon) {
  TheoryInput in;
  in.omega_up = omega(variant.uplink, dim);
  in.omega_down = omega(variant.downlink, dim);
  in.smoothness = constants.smoothness;
  in.strong_convexity = constants.strong_convexity;
  in.b_squared = constants.b_squared;
  // Exact local gradients carry no sampling noise at the optimum.
  in.sigma_star_sq = batch == kFullBatch ? 0.0 : constants.sigma_star_sq;
  in.batch = batch == kFullBatch ? 1 : batch;
  in.participation = variant.participation;
  in.alpha = variant.alpha;
  in.gamma = variant.gamma;
  in.delta0_sq = delta0_sq;
  in.horizon = horizon;
  return in;
}

namespace {

// Fills in gamma per the rule; MaxFraction consults the variant's own bound.
void resolve_gamma(VariantConfig& v, const GammaRule& rule,
                   const ProblemConstants& constants, int dim, int batch,
                   int workers) {
  switch (rule.mode) {
    case GammaRule::Mode::Constant:
      if (v.gamma <= 0.0) v.gamma = rule.value;
      v.schedule = VariantConfig::Schedule::Constant;
      break;
    case GammaRule::Mode::MaxFraction: {
      if (v.gamma <= 0.0) {
        TheoryInput in = theory_input(v, constants, dim, batch, 0.0, 1);
        in.workers = workers;
        v.gamma = rule.value * gamma_max(in);
      }
      v.schedule = VariantConfig::Schedule::Constant;
      break;
    }
    case GammaRule::Mode::InvSqrt:
      if (v.gamma <= 0.0)
        v.gamma = rule.value > 0.0 ? rule.value : 1.0 / constants.smoothness;
      v.schedule = VariantConfig::Schedule::InvSqrt;
      break;
  }
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  if (config.runs < 1) throw std::invalid_argument("run_experiment: runs >= 1");
  if (config.iterations < 0)
    throw std::invalid_argument("run_experiment: iterations >= 0");

  const Dataset data = build_dataset(config.dataset);
  ExperimentResult result;
  result.dim = data.dim;
  result.workers = data.workers();
  result.optimum = solve_optimum(config.objective, data);
  result.constants = estimate_constants(config.objective, data, result.optimum.w);

  const Vec w0 = Vec::Zero(data.dim);
  result.delta0_sq = result.optimum.w.squaredNorm();
  const double excess0 =
      global_loss(config.objective, data, w0) - result.optimum.value;

  const long long horizon = config.iterations;
  const int n_runs = config.runs;

  for (const VariantConfig& base : config.variants) {
    VariantConfig v = base;
    resolve_gamma(v, config.gamma, result.constants, data.dim, config.batch,
                  data.workers());
    result.resolved_gammas.push_back(v.gamma);

    MetricsTrace trace;
    trace.variant = v.name;
    const std::size_t len = static_cast<std::size_t>(horizon) + 1;
    std::vector<std::vector<double>> excess(n_runs), dist_sq(n_runs),
        avg_excess(n_runs);

    for (int r = 0; r < n_runs; ++r) {
      Simulation sim(data, config.objective, v, config.batch,
                     config.seed + static_cast<std::uint64_t>(r), w0);
      excess[r].reserve(len);
      dist_sq[r].reserve(len);
      excess[r].push_back(excess0);
      dist_sq[r].push_back(result.delta0_sq);
      Vec iterate_sum = w0;
      if (config.averaging) {
        avg_excess[r].reserve(len);
        avg_excess[r].push_back(excess0);
      }
      if (r == 0) {
        trace.up_bits.reserve(len);
        trace.down_bits.reserve(len);
        trace.up_bits.push_back(0);
        trace.down_bits.push_back(0);
      }
      for (long long k = 0; k < horizon; ++k) {
        const IterationRecord rec = sim.run_iteration(k);
        const Vec& w = sim.model();
        const double e =
            global_loss(config.objective, data, w) - result.optimum.value;
        if (!std::isfinite(e) || e > 1e12)
          throw std::runtime_error("run diverged: variant '" + v.name +
                                   "' at gamma " + fmt(v.gamma) +
                                   ", iteration " + std::to_string(k + 1));
        excess[r].push_back(e);
        dist_sq[r].push_back((w - result.optimum.w).squaredNorm());
        if (config.averaging) {
          iterate_sum += w;
          const Vec wbar = iterate_sum / static_cast<double>(k + 2);
          avg_excess[r].push_back(
              global_loss(config.objective, data, wbar) - result.optimum.value);
        }
        if (r == 0) {
          trace.up_bits.push_back(rec.uplink_bits);
          trace.down_bits.push_back(rec.downlink_bits);
        }
      }
    }

    trace.mean_log10_excess.resize(len);
    trace.std_log10_excess.resize(len);
    trace.mean_excess.resize(len);
    trace.mean_dist_sq.resize(len);
    trace.std_dist_sq.resize(len);
    if (config.averaging) trace.avg_mean_log10_excess.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
      double sum_e = 0.0, sum_log = 0.0, sum_log2 = 0.0;
      double sum_d = 0.0, sum_d2 = 0.0, sum_avg_log = 0.0;
      for (int r = 0; r < n_runs; ++r) {
        const double lg = log10_excess(excess[r][t]);
        sum_e += excess[r][t];
        sum_log += lg;
        sum_log2 += lg * lg;
        sum_d += dist_sq[r][t];
        sum_d2 += dist_sq[r][t] * dist_sq[r][t];
        if (config.averaging) sum_avg_log += log10_excess(avg_excess[r][t]);
      }
      const double inv = 1.0 / n_runs;
      trace.mean_excess[t] = sum_e * inv;
      trace.mean_log10_excess[t] = sum_log * inv;
      trace.std_log10_excess[t] = std::sqrt(
          std::max(0.0, sum_log2 * inv - sum_log * inv * sum_log * inv));
      trace.mean_dist_sq[t] = sum_d * inv;
      trace.std_dist_sq[t] =
          std::sqrt(std::max(0.0, sum_d2 * inv - sum_d * inv * sum_d * inv));
      if (config.averaging) trace.avg_mean_log10_excess[t] = sum_avg_log * inv;
    }
    result.traces.push_back(std::move(trace));
  }
  return result;
}

void write_experiment(const ExperimentResult& result, const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const fs::path csv_path = fs::path(config.output_dir) / (config.name + ".csv");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << "iteration,variant,mean_log10_excess,std_log10_excess,up_bits,"
         "down_bits";
  if (config.averaging) csv << ",avg_mean_log10_excess";
  csv << "\n";
  for (const MetricsTrace& trace : result.traces) {
    for (std::size_t t = 0; t < trace.mean_log10_excess.size(); ++t) {
      csv << t << ',' << trace.variant << ',' << fmt(trace.mean_log10_excess[t])
          << ',' << fmt(trace.std_log10_excess[t]) << ',' << trace.up_bits[t]
          << ',' << trace.down_bits[t];
      if (config.averaging) csv << ',' << fmt(trace.avg_mean_log10_excess[t]);
      csv << "\n";
    }
  }
  csv.close();

  ordered_json meta;
  meta["name"] = config.name;
  meta["iterations"] = config.iterations;
  meta["runs"] = config.runs;
  meta["seed"] = config.seed;
  meta["batch"] = config.batch;
  meta["averaging"] = config.averaging;
  meta["objective"] = config.objective == ObjectiveKind::LeastSquares
                          ? "least-squares"
                          : "logistic";
  meta["optimum_value"] = result.optimum.value;
  meta["delta0_sq"] = result.delta0_sq;
  meta["constants"] = {{"smoothness", result.constants.smoothness},
                       {"strong_convexity", result.constants.strong_convexity},
                       {"b_squared", result.constants.b_squared},
                       {"sigma_star_sq", result.constants.sigma_star_sq}};
  ordered_json variants = ordered_json::array();
  for (std::size_t i = 0; i < config.variants.size(); ++i) {
    const VariantConfig& v = config.variants[i];
    ordered_json jv;
    jv["name"] = v.name;
    jv["alpha"] = v.alpha;
    jv["participation"] = v.participation;
    jv["pp_mode"] = v.pp_mode == PPMode::PP1 ? "pp1" : "pp2";
    jv["gamma"] = result.resolved_gammas[i];
    jv["schedule"] = v.schedule == VariantConfig::Schedule::InvSqrt
                         ? "inv-sqrt"
                         : "constant";
    variants.push_back(jv);
  }
  meta["variants"] = variants;
  const fs::path meta_path =
      fs::path(config.output_dir) / (config.name + ".meta.json");
  std::ofstream mj(meta_path, std::ios::binary);
  if (!mj) throw std::runtime_error("cannot write " + meta_path.string());
  mj << meta.dump(2) << "\n";
}

PlateauEstimate estimate_plateau(const std::vector<double>& mean_excess) {
  if (mean_excess.empty())
    throw std::invalid_argument("estimate_plateau: empty trace");
  const std::size_t n = mean_excess.size();
  PlateauEstimate out;

  const std::size_t tail10 = std::max<std::size_t>(1, n / 10);
  double sum = 0.0;
  for (std::size_t t = n - tail10; t < n; ++t) sum += mean_excess[t];
  out.level = sum / static_cast<double>(tail10);

  const std::size_t tail20 = std::max<std::size_t>(2, n / 5);
  if (tail20 > n) {
    out.saturated = false;
    return out;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t t = n - tail20; t < n; ++t) {
    const double x = static_cast<double>(t);
    const double y = log10_excess(mean_excess[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(tail20);
  const double denom = m * sxx - sx * sx;
  const double slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  out.saturated = std::abs(slope) < 1e-3;
  return out;
}

long long bits_to_target(const MetricsTrace& trace, double target) {
  for (std::size_t t = 0; t < trace.mean_excess.size(); ++t) {
    if (trace.mean_excess[t] <= target)
      return trace.up_bits[t] + trace.down_bits[t];
  }
  return kUnreachable;
}

double pp1_aggregate_variance_at_optimum(const Dataset& data,
                                         ObjectiveKind objective,
                                         const Vec& w_star, double p,
                                         int draws, std::uint64_t seed) {
  const int n = data.workers();
  std::vector<Vec> local(n);
  for (int i = 0; i < n; ++i)
    local[i] = full_local_gradient(objective, data.shards[i], w_star);
  const Vec mean_grad = full_gradient(objective, data, w_star);
  const double scale = p * n;
  double acc = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto participants = sample_participants(n, p, seed, t);
    Vec g_hat = Vec::Zero(data.dim);
    for (int id : participants) g_hat += local[id];
    g_hat /= scale;
    acc += (g_hat - mean_grad).squaredNorm();
  }
  return acc / static_cast<double>(draws);
}

PPComparison compare_pp_modes(const RunConfig& config, int variance_draws) {
  RunConfig paired = config;
  paired.variants.clear();
  double p = 0.0;
  for (const VariantConfig& base : config.variants) {
    if (!(base.participation < 1.0))
      throw std::invalid_argument(
          "compare_pp_modes: variants need participation < 1");
    p = base.participation;
    VariantConfig v1 = base;
    v1.name = base.name + "-pp1";
    v1.pp_mode = PPMode::PP1;
    VariantConfig v2 = base;
    v2.name = base.name + "-pp2";
    v2.pp_mode = PPMode::PP2;
    paired.variants.push_back(v1);
    paired.variants.push_back(v2);
  }

  PPComparison out;
  out.result = run_experiment(paired);
  const Dataset data = build_dataset(config.dataset);
  const Vec& w_star = out.result.optimum.w;
  out.empirical_aggregate_variance = pp1_aggregate_variance_at_optimum(
      data, config.objective, w_star, p, variance_draws, config.seed + 777);
  out.predicted_aggregate_variance =
      (1.0 - p) * out.result.constants.b_squared / (p * data.workers());
  return out;
}

RunConfig preset_experiment(const std::string& name) {
  RunConfig config;
  config.name = name;
  if (name == "lsr-noisy") {
    config.dataset.kind = DatasetSpec::Kind::Lsr;
    config.dataset.workers = 20;
    config.dataset.points = 200;
    config.dataset.dim = 20;
    config.dataset.noise_std = std::sqrt(0.4);
    config.objective = ObjectiveKind::LeastSquares;
    config.iterations = 2000;
    config.runs = 5;
    config.batch = 1;
    config.gamma = {GammaRule::Mode::MaxFraction, 0.5};
    for (const char* v : {"sgd", "qsgd", "diana", "bi-qsgd", "artemis"})
      config.variants.push_back(preset_variant(v, config.dataset.dim));
  } else if (name == "lsr-noiseless") {
    config.dataset.kind = DatasetSpec::Kind::Lsr;
    config.dataset.workers = 10;
    config.dataset.points = 200;
    config.dataset.dim = 20;
    config.dataset.noise_std = 0.0;
    config.objective = ObjectiveKind::LeastSquares;
    config.iterations = 3000;
    config.runs = 1;
    config.batch = kFullBatch;
    config.gamma = {GammaRule::Mode::MaxFraction, 0.5};
    for (const char* v : {"sgd", "qsgd", "diana", "bi-qsgd", "artemis"})
      config.variants.push_back(preset_variant(v, config.dataset.dim));
  } else if (name == "logistic-noniid") {
    config.dataset.kind = DatasetSpec::Kind::LogisticNonIid;
    config.dataset.workers = 10;
    config.dataset.points = 200;
    config.dataset.dim = 2;
    config.objective = ObjectiveKind::Logistic;
    config.iterations = 5000;
    config.runs = 5;
    config.batch = kFullBatch;
    config.gamma = {GammaRule::Mode::MaxFraction, 0.5};
    for (const char* v : {"qsgd", "diana", "bi-qsgd", "artemis"})
      config.variants.push_back(preset_variant(v, config.dataset.dim));
  } else if (name == "pp-compare") {
    config.dataset.kind = DatasetSpec::Kind::LogisticNonIid;
    config.dataset.workers = 10;
    config.dataset.points = 200;
    config.dataset.dim = 2;
    config.objective = ObjectiveKind::Logistic;
    config.iterations = 1500;
    config.runs = 3;
    config.batch = kFullBatch;
    config.gamma = {GammaRule::Mode::MaxFraction, 0.5};
    VariantConfig v1 = preset_variant("artemis", config.dataset.dim);
    v1.participation = 0.5;
    v1.name = "artemis-pp1";
    v1.pp_mode = PPMode::PP1;
    VariantConfig v2 = v1;
    v2.name = "artemis-pp2";
    v2.pp_mode = PPMode::PP2;
    config.variants = {v1, v2};
  } else {
    throw std::invalid_argument("unknown experiment preset: " + name);
  }
  return config;
}

std::vector<std::string> preset_experiment_names() {
  return {"lsr-noisy", "lsr-noiseless", "logistic-noniid", "pp-compare"};
}

}  // namespace artemis
