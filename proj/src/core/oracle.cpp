#include "oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace artemis {

long long Dataset::total_points() const {
  long long n = 0;
  for (const auto& s : shards) n += s.labels.size();
  return n;
}

long long Dataset::min_shard_size() const {
  long long n = std::numeric_limits<long long>::max();
  for (const auto& s : shards) n = std::min<long long>(n, s.labels.size());
  return n;
}

LsrData gen_lsr(int workers, int points_per_worker, int dim, double noise_std,
                std::uint64_t seed) {
  if (workers < 1 || points_per_worker < 1 || dim < 1 || noise_std < 0.0)
    throw std::invalid_argument("gen_lsr: invalid sizes");
  LsrData out;
  out.dataset.dim = dim;
  RngStream model_rng(seed, 0, 0, Draw::DataGen);
  out.true_model = Vec(dim);
  for (int j = 0; j < dim; ++j) out.true_model[j] = model_rng.normal();
  for (int i = 0; i < workers; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i) + 1, 0, Draw::DataGen);
    Shard shard;
    shard.features.resize(points_per_worker, dim);
    shard.labels.resize(points_per_worker);
    for (int r = 0; r < points_per_worker; ++r) {
      for (int j = 0; j < dim; ++j) shard.features(r, j) = rng.normal();
      const double noise = noise_std > 0.0 ? noise_std * rng.normal() : 0.0;
      shard.labels[r] = shard.features.row(r).dot(out.true_model) + noise;
    }
    out.dataset.shards.push_back(std::move(shard));
  }
  return out;
}

Dataset gen_logistic_noniid(int workers, int points_per_worker,
                            std::uint64_t seed, const Eigen::Matrix2d* sigma1,
                            const Eigen::Matrix2d* sigma2) {
  if (workers < 2 || workers % 2 != 0)
    throw std::invalid_argument("gen_logistic_noniid: N must be even");
  Eigen::Matrix2d cov1 = sigma1 ? *sigma1 : Eigen::Matrix2d::Identity();
  Eigen::Matrix2d cov2;
  if (sigma2) {
    cov2 = *sigma2;
  } else {
    cov2 << 1.0, 0.0, 0.0, 4.0;
  }
  const Eigen::Matrix2d chol1 = Eigen::LLT<Eigen::Matrix2d>(cov1).matrixL();
  const Eigen::Matrix2d chol2 = Eigen::LLT<Eigen::Matrix2d>(cov2).matrixL();
  Eigen::Vector2d w1(10.0, 10.0), w2(10.0, -10.0);

  Dataset data;
  data.dim = 2;
  for (int i = 0; i < workers; ++i) {
    const bool first = i % 2 == 0;
    const Eigen::Matrix2d& chol = first ? chol1 : chol2;
    const Eigen::Vector2d& model = first ? w1 : w2;
    RngStream rng(seed, static_cast<std::uint64_t>(i) + 1, 0, Draw::DataGen);
    Shard shard;
    shard.features.resize(points_per_worker, 2);
    shard.labels.resize(points_per_worker);
    for (int r = 0; r < points_per_worker; ++r) {
      Eigen::Vector2d z(rng.normal(), rng.normal());
      Eigen::Vector2d x = chol * z;
      shard.features.row(r) = x.transpose();
      const double prob = 1.0 / (1.0 + std::exp(-model.dot(x)));
      shard.labels[r] = rng.uniform() < prob ? 1.0 : -1.0;
    }
    data.shards.push_back(std::move(shard));
  }
  return data;
}

double local_loss(ObjectiveKind objective, const Shard& shard, const Vec& w) {
  const Eigen::Index n = shard.labels.size();
  const Vec margins = shard.features * w;
  double loss = 0.0;
  if (objective == ObjectiveKind::LeastSquares) {
    loss = 0.5 * (margins - shard.labels).squaredNorm();
  } else {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double t = -shard.labels[r] * margins[r];
      // log(1 + exp(t)) without overflow
      loss += t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    }
  }
  return loss / static_cast<double>(n);
}

double global_loss(ObjectiveKind objective, const Dataset& data, const Vec& w) {
  double loss = 0.0;
  for (const auto& shard : data.shards) loss += local_loss(objective, shard, w);
  return loss / static_cast<double>(data.workers());
}

Vec sample_gradient(ObjectiveKind objective, const Eigen::MatrixXd& features,
                    const Vec& labels, int row, const Vec& w) {
  const auto x = features.row(row).transpose();
  if (objective == ObjectiveKind::LeastSquares)
    return (x.dot(w) - labels[row]) * x;
  const double y = labels[row];
  const double t = y * x.dot(w);
  const double sig = 1.0 / (1.0 + std::exp(t));  // sigmoid(-t)
  return (-y * sig) * x;
}

Vec full_local_gradient(ObjectiveKind objective, const Shard& shard,
                        const Vec& w) {
  const Eigen::Index n = shard.labels.size();
  if (objective == ObjectiveKind::LeastSquares) {
    const Vec residual = shard.features * w - shard.labels;
    return shard.features.transpose() * residual / static_cast<double>(n);
  }
  Vec grad = Vec::Zero(w.size());
  for (Eigen::Index r = 0; r < n; ++r)
    grad += sample_gradient(objective, shard.features, shard.labels,
                            static_cast<int>(r), w);
  return grad / static_cast<double>(n);
}

Vec full_gradient(ObjectiveKind objective, const Dataset& data, const Vec& w) {
  Vec grad = Vec::Zero(w.size());
  for (const auto& shard : data.shards)
    grad += full_local_gradient(objective, shard, w);
  return grad / static_cast<double>(data.workers());
}

Vec stochastic_gradient(ObjectiveKind objective, const Shard& shard,
                        const Vec& w, int batch, RngStream& rng) {
  if (batch == kFullBatch) return full_local_gradient(objective, shard, w);
  const auto n = static_cast<std::uint64_t>(shard.labels.size());
  if (batch < 0 || static_cast<std::uint64_t>(batch) > n)
    throw std::invalid_argument("stochastic_gradient: batch exceeds shard");
  Vec grad = Vec::Zero(w.size());
  for (int s = 0; s < batch; ++s) {
    const int row = static_cast<int>(rng.uniform_int(n));
    grad += sample_gradient(objective, shard.features, shard.labels, row, w);
  }
  return grad / static_cast<double>(batch);
}

namespace {

// Pooled Hessian at w (least squares ignores w).
Eigen::MatrixXd pooled_hessian(ObjectiveKind objective, const Dataset& data,
                               const Vec& w) {
  const int d = data.dim;
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(d, d);
  for (const auto& shard : data.shards) {
    const Eigen::Index n = shard.labels.size();
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(d, d);
    if (objective == ObjectiveKind::LeastSquares) {
      local = shard.features.transpose() * shard.features;
    } else {
      const Vec margins = shard.features * w;
      for (Eigen::Index r = 0; r < n; ++r) {
        const double sig = 1.0 / (1.0 + std::exp(-margins[r]));
        const auto x = shard.features.row(r).transpose();
        local += sig * (1.0 - sig) * x * x.transpose();
      }
    }
    hessian += local / static_cast<double>(n);
  }
  return hessian / static_cast<double>(data.workers());
}

}  // namespace

Optimum solve_optimum(ObjectiveKind objective, const Dataset& data) {
  const int d = data.dim;
  Optimum opt;
  if (objective == ObjectiveKind::LeastSquares) {
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(d, d);
    Vec rhs = Vec::Zero(d);
    for (const auto& shard : data.shards) {
      const double n = static_cast<double>(shard.labels.size());
      normal += shard.features.transpose() * shard.features / n;
      rhs += shard.features.transpose() * shard.labels / n;
    }
    const double workers = static_cast<double>(data.workers());
    normal /= workers;
    rhs /= workers;
    Eigen::LDLT<Eigen::MatrixXd> solver(normal);
    Vec w = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !w.allFinite() ||
        (normal * w - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) {
      Eigen::MatrixXd ridged =
          normal + 1e-10 * Eigen::MatrixXd::Identity(d, d);
      w = Eigen::LDLT<Eigen::MatrixXd>(ridged).solve(rhs);
      if (!w.allFinite())
        throw std::runtime_error(
            "solve_optimum: rank-deficient least-squares design");
    }
    opt.w = w;
  } else {
    Vec w = Vec::Zero(d);
    const Eigen::MatrixXd h0 = pooled_hessian(objective, data, w);
    double step =
        1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h0)
                  .eigenvalues()
                  .maxCoeff();
    for (long long it = 0; it < 1'000'000; ++it) {
      const Vec grad = full_gradient(objective, data, w);
      if (grad.norm() <= 1e-10) break;
      w -= step * grad;
    }
    opt.w = w;
  }
  opt.value = global_loss(objective, data, opt.w);
  return opt;
}

ProblemConstants estimate_constants(ObjectiveKind objective,
                                    const Dataset& data, const Vec& w_star) {
  ProblemConstants out;
  const Eigen::MatrixXd hessian = pooled_hessian(objective, data, w_star);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
  out.smoothness = eig.eigenvalues().maxCoeff();
  out.strong_convexity = eig.eigenvalues().minCoeff();

  double bsq = 0.0;
  double var = 0.0;
  for (const auto& shard : data.shards) {
    const Vec local = full_local_gradient(objective, shard, w_star);
    bsq += local.squaredNorm();
    const Eigen::Index n = shard.labels.size();
    double shard_var = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const Vec g = sample_gradient(objective, shard.features, shard.labels,
                                    static_cast<int>(r), w_star);
      shard_var += (g - local).squaredNorm();
    }
    var += shard_var / static_cast<double>(n);
  }
  const double workers = static_cast<double>(data.workers());
  out.b_squared = bsq / workers;
  out.sigma_star_sq = var / workers;
  return out;
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::string& path,
                                                  bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && has_header) {
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        const double value = std::stod(cell, &used);
        row.push_back(value);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: non-numeric cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("load_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw std::runtime_error("load_csv: need at least one feature and label");
  return rows;
}

std::vector<int> assign_workers(const std::vector<std::vector<double>>& rows,
                                const PartitionSpec& spec) {
  const int n = static_cast<int>(rows.size());
  std::vector<int> assignment(n);
  switch (spec.mode) {
    case PartitionSpec::Mode::RoundRobin:
      for (int r = 0; r < n; ++r) assignment[r] = r % spec.workers;
      break;
    case PartitionSpec::Mode::FeatureQuantile: {
      std::vector<int> order(n);
      for (int r = 0; r < n; ++r) order[r] = r;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rows[a][spec.feature] < rows[b][spec.feature];
      });
      for (int pos = 0; pos < n; ++pos)
        assignment[order[pos]] =
            std::min(spec.workers - 1,
                     static_cast<int>(static_cast<long long>(pos) *
                                      spec.workers / n));
      break;
    }
    case PartitionSpec::Mode::AssignmentFile: {
      std::ifstream in(spec.path);
      if (!in)
        throw std::runtime_error("load_csv: cannot open partition file " +
                                 spec.path);
      for (int r = 0; r < n; ++r) {
        if (!(in >> assignment[r]))
          throw std::runtime_error("load_csv: partition file too short");
        if (assignment[r] < 0 || assignment[r] >= spec.workers)
          throw std::runtime_error("load_csv: worker id out of range");
      }
      break;
    }
  }
  return assignment;
}

}  // namespace

Dataset load_csv(const std::string& path, const PartitionSpec& spec,
                 bool has_header, bool standardize) {
  if (spec.workers < 1) throw std::invalid_argument("load_csv: workers >= 1");
  auto rows = read_numeric_csv(path, has_header);
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size()) - 1;
  if (spec.feature < 0 || spec.feature >= d)
    throw std::invalid_argument("load_csv: partition feature out of range");

  if (standardize) {
    for (int j = 0; j < d; ++j) {
      double mean = 0.0;
      for (const auto& row : rows) mean += row[j];
      mean /= n;
      double var = 0.0;
      for (const auto& row : rows) var += (row[j] - mean) * (row[j] - mean);
      const double stddev = std::sqrt(var / n);
      for (auto& row : rows) row[j] = stddev > 0 ? (row[j] - mean) / stddev : 0;
    }
  }

  const auto assignment = assign_workers(rows, spec);
  std::vector<int> counts(spec.workers, 0);
  for (int id : assignment) ++counts[id];
  for (int i = 0; i < spec.workers; ++i)
    if (counts[i] == 0)
      throw std::runtime_error("load_csv: empty shard for worker " +
                               std::to_string(i));

  Dataset data;
  data.dim = d;
  data.shards.resize(spec.workers);
  for (int i = 0; i < spec.workers; ++i) {
    data.shards[i].features.resize(counts[i], d);
    data.shards[i].labels.resize(counts[i]);
  }
  std::vector<int> cursor(spec.workers, 0);
  for (int r = 0; r < n; ++r) {
    const int id = assignment[r];
    auto& shard = data.shards[id];
    for (int j = 0; j < d; ++j) shard.features(cursor[id], j) = rows[r][j];
    shard.labels[cursor[id]] = rows[r][d];
    ++cursor[id];
  }
  return data;
}

}  // namespace artemis
