#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "compression.hpp"
#include "rng.hpp"

namespace artemis {

enum class ObjectiveKind { LeastSquares, Logistic };

struct Shard {
  Eigen::MatrixXd features;  // n_i x d
  Vec labels;                // n_i; in {-1, +1} for logistic
};

struct Dataset {
  std::vector<Shard> shards;
  int dim = 0;

  int workers() const { return static_cast<int>(shards.size()); }
  long long total_points() const;
  long long min_shard_size() const;
};

// Batch size; 0 means the full local shard (exact local gradient).
inline constexpr int kFullBatch = 0;

// i.i.d. Gaussian features, labels from a drawn true model plus
// N(0, noise_std^2) noise. noise_std = 0 puts the problem in the
// interpolation regime (zero loss and zero per-sample gradients at the
// optimum).
struct LsrData {
  Dataset dataset;
  Vec true_model;
};
LsrData gen_lsr(int workers, int points_per_worker, int dim, double noise_std,
                std::uint64_t seed);

// Two-population logistic data in dimension 2: even workers draw from model
// (10, 10) with covariance sigma1, odd workers from (10, -10) with
// covariance sigma2. Labels are Rademacher draws of the sigmoid probability.
Dataset gen_logistic_noniid(int workers, int points_per_worker,
                            std::uint64_t seed,
                            const Eigen::Matrix2d* sigma1 = nullptr,
                            const Eigen::Matrix2d* sigma2 = nullptr);

double local_loss(ObjectiveKind objective, const Shard& shard, const Vec& w);
double global_loss(ObjectiveKind objective, const Dataset& data, const Vec& w);

Vec sample_gradient(ObjectiveKind objective, const Eigen::MatrixXd& features,
                    const Vec& labels, int row, const Vec& w);
Vec full_local_gradient(ObjectiveKind objective, const Shard& shard,
                        const Vec& w);
Vec full_gradient(ObjectiveKind objective, const Dataset& data, const Vec& w);

// Mean of `batch` uniformly sampled per-sample gradients (with replacement);
// kFullBatch returns the exact local gradient.
Vec stochastic_gradient(ObjectiveKind objective, const Shard& shard,
                        const Vec& w, int batch, RngStream& rng);

struct Optimum {
  Vec w;
  double value = 0.0;
};

// Pooled optimum. Least squares: exact normal-equations solve (ridge 1e-10
// fallback for degenerate designs). Logistic: full-batch gradient descent to
// gradient norm 1e-10 (or 1e6 iterations).
Optimum solve_optimum(ObjectiveKind objective, const Dataset& data);

struct ProblemConstants {
  double smoothness = 0.0;        // L: largest pooled Hessian eigenvalue
  double strong_convexity = 0.0;  // mu: smallest pooled Hessian eigenvalue
  double b_squared = 0.0;         // (1/N) sum ||grad F_i(w*)||^2
  double sigma_star_sq = 0.0;     // mean per-sample gradient variance at w*
};
ProblemConstants estimate_constants(ObjectiveKind objective,
                                    const Dataset& data, const Vec& w_star);

struct PartitionSpec {
  enum class Mode { RoundRobin, FeatureQuantile, AssignmentFile };
  Mode mode = Mode::RoundRobin;
  int workers = 1;
  int feature = 0;        // FeatureQuantile: column used for ordering
  std::string path;       // AssignmentFile: one worker id per line
};

// CSV with numeric columns, label in the last column; optional header row.
// Features are standardized columnwise unless disabled.
Dataset load_csv(const std::string& path, const PartitionSpec& spec,
                 bool has_header = false, bool standardize = true);

}  // namespace artemis
