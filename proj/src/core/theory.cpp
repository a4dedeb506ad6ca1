#include "theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace artemis {

namespace {

void validate(const TheoryInput& in) {
  if (in.workers < 1) throw std::invalid_argument("theory: N >= 1");
  if (!(in.participation > 0.0) || in.participation > 1.0)
    throw std::invalid_argument("theory: p in (0, 1]");
  if (in.omega_up < 0.0 || in.omega_down < 0.0)
    throw std::invalid_argument("theory: omega >= 0");
  if (in.strong_convexity > in.smoothness)
    throw std::invalid_argument("theory: mu <= L required");
}

}  // namespace

double gamma_max(const TheoryInput& in) {
  validate(in);
  const double n = in.workers;
  const double p = in.participation;
  const double wu = in.omega_up;
  const double wd = in.omega_down;
  const double smooth = in.smoothness;
  double bound;
  if (!in.with_memory()) {
    bound = p * n / (smooth * (wd + 1.0) * (p * n + 2.0 * (wu + 1.0)));
  } else {
    bound = 1.0 / ((wd + 1.0) * (1.0 + 2.0 / (n * p)) * smooth);
    const double mid_factor = 3.0 + (8.0 * (wu - 1.0) - 2.0 * p) / (n * p);
    if (mid_factor > 0.0)
      bound = std::min(bound, 3.0 / ((wd + 1.0) * mid_factor * smooth));
    const double last_factor = n + 4.0 * (wu + 1.0) / p - 2.0;
    bound = std::min(bound, n / ((wd + 1.0) * last_factor * smooth));
  }
  if (!(bound > 0.0))
    throw std::runtime_error("gamma_max: nonpositive bound for given inputs");
  return bound;
}

AlphaRange alpha_range(const TheoryInput& in) {
  validate(in);
  const double n = in.workers;
  const double p = in.participation;
  const double wu = in.omega_up;
  const double wd = in.omega_down;
  const double gl = in.gamma * in.smoothness;
  AlphaRange range;
  range.lo = 1.0 / (2.0 * (wu + 1.0));
  const double numer =
      3.0 * n - gl * (wd + 1.0) * (3.0 * n + 8.0 * (wu + 1.0) / p - 2.0);
  const double denom = 2.0 * (wu + 1.0) * (n - gl * (wd + 1.0) * (n + 2.0));
  if (denom <= 0.0)
    throw std::runtime_error(
        "alpha_range: gamma exceeds the memory-case step bound");
  range.hi = std::min(3.0 / (2.0 * (wu + 1.0)), numer / denom);
  if (!(range.lo <= range.hi))
    throw std::runtime_error(
        "alpha_range: empty range; gamma exceeds the memory-case step bound");
  return range;
}

Interval constant_C_interval(const TheoryInput& in) {
  validate(in);
  if (!in.with_memory())
    return {0.0, 0.0};
  const double n = in.workers;
  const double p = in.participation;
  const double wu = in.omega_up;
  const double wd = in.omega_down;
  const double a = in.alpha;
  const double gl = in.gamma * in.smoothness;

  Interval interval;
  const double lo_denom = a * p * (3.0 - 2.0 * a * (wu + 1.0));
  if (!(lo_denom > 0.0))
    throw std::runtime_error("constant_C_interval: alpha above 3/(2(w+1))");
  interval.lo = (wd + 1.0) * ((wu + 1.0) / p - 1.0) / lo_denom;

  const double hi_numer = n - gl * (wd + 1.0) * (n + 4.0 * (wu + 1.0) / p - 2.0);
  const double hi_denom = 4.0 * gl * p * a * (2.0 * a * (wu + 1.0) - 1.0);
  if (hi_denom <= 0.0) {
    // alpha at the lower admissible end: the upper constraint is vacuous.
    interval.hi = std::numeric_limits<double>::infinity();
  } else {
    interval.hi = hi_numer / hi_denom;
  }
  if (interval.lo > interval.hi)
    throw std::runtime_error(
        "constant_C_interval: empty interval; alpha/gamma violate the "
        "admissibility conditions");
  return interval;
}

double constant_E(const TheoryInput& in) {
  validate(in);
  const double p = in.participation;
  const double wu = in.omega_up;
  const double wd = in.omega_down;
  const double noise = in.noise();
  if (!in.with_memory())
    return (wd + 1.0) *
           ((wu + 1.0) * noise + (wu + 1.0 - p) * in.b_squared);
  const double c = constant_C_interval(in).lo;
  const double a = in.alpha;
  return noise * ((wd + 1.0) * (2.0 * (wu + 1.0) / p - 1.0) +
                  2.0 * p * c * (2.0 * a * a * (wu + 1.0) - a));
}

double predict_saturation(const TheoryInput& in) {
  const double e = constant_E(in);
  const double n = in.workers;
  if (in.with_memory())
    return 2.0 * in.gamma * e / (in.strong_convexity * n);
  return 2.0 * in.gamma * e / (in.strong_convexity * in.participation * n);
}

double theorem_bound(const TheoryInput& in, long long iteration) {
  const double c = in.with_memory() ? constant_C_interval(in).lo : 0.0;
  const double contraction =
      std::pow(1.0 - in.gamma * in.strong_convexity,
               static_cast<double>(iteration));
  const double bias =
      contraction * (in.delta0_sq +
                     2.0 * c * in.gamma * in.gamma * in.b_squared);
  return bias + predict_saturation(in);
}

AveragingResult gamma_opt_averaging(const TheoryInput& in) {
  if (in.horizon < 1) throw std::invalid_argument("averaging: K >= 1");
  const double n = in.workers;
  const double k = static_cast<double>(in.horizon);
  const double gmax = gamma_max(in);
  const double e = constant_E(in);
  const double c = in.with_memory() ? constant_C_interval(in).lo : 0.0;
  AveragingResult out;
  if (e > 0.0) {
    out.gamma_opt = std::min(std::sqrt(n * in.delta0_sq / (2.0 * e * k)), gmax);
  } else {
    out.gamma_opt = gmax;
  }
  const double sqrt_term =
      e > 0.0 ? std::sqrt(2.0 * in.delta0_sq * e / (n * k)) : 0.0;
  out.bound = 2.0 * std::max(sqrt_term, in.delta0_sq / (gmax * k)) +
              2.0 * gmax * c * in.b_squared / k;
  return out;
}

}  // namespace artemis
