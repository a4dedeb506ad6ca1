#pragma once

#include <string>
#include <vector>

#include "oracle.hpp"
#include "protocol.hpp"
#include "theory.hpp"

namespace artemis {

struct DatasetSpec {
  enum class Kind { Lsr, LogisticNonIid, Csv };
  Kind kind = Kind::Lsr;
  int workers = 20;
  int points = 200;
  int dim = 20;
  double noise_std = 0.0;
  std::uint64_t seed = 1;
  // csv only
  std::string path;
  PartitionSpec partition;
  bool has_header = false;
  bool standardize = true;
};

// How each variant's step size is filled in before a run. MaxFraction
// evaluates the variant's own admissible bound on the problem at hand.
struct GammaRule {
  enum class Mode { Constant, MaxFraction, InvSqrt };
  Mode mode = Mode::MaxFraction;
  double value = 0.5;  // gamma, fraction of gamma_max, or gamma0 (0 = 1/L)
};

struct RunConfig {
  std::string name = "experiment";
  DatasetSpec dataset;
  ObjectiveKind objective = ObjectiveKind::LeastSquares;
  std::vector<VariantConfig> variants;
  long long iterations = 100;
  int runs = 1;
  std::uint64_t seed = 42;
  int batch = 1;  // kFullBatch = exact local gradients
  GammaRule gamma;
  bool averaging = false;  // also track the running iterate average
  std::string output_dir = ".";
};

// JSON config file. Variants may be preset names or objects with explicit
// fields; experiment-level participation / pp_mode apply to preset entries.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

// Canned experiments: "lsr-noisy", "lsr-noiseless", "logistic-noniid",
// "pp-compare".
RunConfig preset_experiment(const std::string& name);
std::vector<std::string> preset_experiment_names();

// Per-variant aggregate over runs; every series has length iterations + 1
// (index 0 is the starting point).
struct MetricsTrace {
  std::string variant;
  std::vector<double> mean_log10_excess;
  std::vector<double> std_log10_excess;
  std::vector<double> mean_excess;   // linear scale, for plateau work
  std::vector<double> mean_dist_sq;  // E||w_k - w*||^2 estimate
  std::vector<double> std_dist_sq;
  std::vector<double> avg_mean_log10_excess;  // running-average iterate
  std::vector<long long> up_bits;    // cumulative, from the first run
  std::vector<long long> down_bits;
};

struct ExperimentResult {
  std::vector<MetricsTrace> traces;
  ProblemConstants constants;
  Optimum optimum;
  double delta0_sq = 0.0;
  int dim = 0;      // realized problem dimension
  int workers = 0;  // realized worker count
  std::vector<double> resolved_gammas;  // per variant (gamma0 for InvSqrt)
};

// Runs every variant R times on one shared dataset with paired noise draws
// (run r of each variant uses seed + r). Throws on divergence, naming the
// variant and step size.
ExperimentResult run_experiment(const RunConfig& config);

// Writes <name>.csv and <name>.meta.json under config.output_dir. The CSV
// is byte-deterministic for a fixed config and seed.
void write_experiment(const ExperimentResult& result, const RunConfig& config);

struct PlateauEstimate {
  double level = 0.0;   // mean excess loss over the final tenth
  bool saturated = false;  // log10 slope over the final fifth below 1e-3
};
PlateauEstimate estimate_plateau(const std::vector<double>& mean_excess);

// Cumulative up+down bits at the first iteration whose mean excess loss
// reaches the target; kUnreachable if it never does.
inline constexpr long long kUnreachable = -1;
long long bits_to_target(const MetricsTrace& trace, double target);

struct PPComparison {
  ExperimentResult result;  // traces carry -pp1 / -pp2 name suffixes
  double empirical_aggregate_variance = 0.0;
  double predicted_aggregate_variance = 0.0;  // (1-p) B^2 / (p N)
};
// Runs the configured variants under both server-memory layouts with
// identical draws, plus a Monte-Carlo estimate of the plain participation
// estimator's variance at the optimum.
PPComparison compare_pp_modes(const RunConfig& config, int variance_draws = 100000);

// E||(1/pN) sum_{i in S} grad F_i(w*) - grad F(w*)||^2 over participation
// draws.
double pp1_aggregate_variance_at_optimum(const Dataset& data,
                                         ObjectiveKind objective,
                                         const Vec& w_star, double p,
                                         int draws, std::uint64_t seed);

// Realizes the dataset spec (generator or file).
Dataset build_dataset(const DatasetSpec& spec);

// Theory inputs for one variant on a measured problem.
TheoryInput theory_input(const VariantConfig& variant,
                         const ProblemConstants& constants, int dim, int batch,
                         double delta0_sq, long long horizon);

}  // namespace artemis
