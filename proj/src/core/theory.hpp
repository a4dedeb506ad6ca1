#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace artemis {

// Everything needed to evaluate the convergence constants of a configuration.
struct TheoryInput {
  int workers = 1;              // N
  double omega_up = 0.0;
  double omega_down = 0.0;
  double smoothness = 1.0;      // L
  double strong_convexity = 1.0;  // mu
  double b_squared = 0.0;
  double sigma_star_sq = 0.0;
  int batch = 1;                // b (>= 1 here; full batch folds into sigma*)
  double participation = 1.0;   // p
  double alpha = 0.0;           // memory rate; 0 = memoryless
  double gamma = 0.0;
  double delta0_sq = 0.0;       // ||w0 - w*||^2
  long long horizon = 1;        // K

  bool with_memory() const { return alpha != 0.0; }
  double noise() const {
    return sigma_star_sq / static_cast<double>(batch < 1 ? 1 : batch);
  }
};

// Largest admissible step size. Memoryless:
//   pN / (L (omega_down+1) (pN + 2(omega_up+1))).
// With memory: the minimum of the three explicit bounds of the memory-case
// theorem (nonpositive denominators make a bound vacuous).
double gamma_max(const TheoryInput& in);

struct AlphaRange {
  double lo = 0.0;
  double hi = 0.0;
};
// Admissible memory rate interval [1/(2(omega_up+1)), alpha_max) for the
// given gamma. Throws if the range is empty.
AlphaRange alpha_range(const TheoryInput& in);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
// Admissible interval for the Lyapunov weight C. The lower end is used for
// reporting (tightest admissible constant).
Interval constant_C_interval(const TheoryInput& in);

// Variance constant E of the convergence theorem. Memoryless:
//   (omega_down+1)((omega_up+1) sigma*^2/b + (omega_up+1-p) B^2).
// With memory (p-dependent form, valid for full participation and the
// single-server-memory participation scheme):
//   sigma*^2/b ((omega_down+1)(2(omega_up+1)/p - 1)
//               + 2 p C (2 alpha^2 (omega_up+1) - alpha)), C = C_lo.
double constant_E(const TheoryInput& in);

// Predicted limit of E||w_k - w*||^2: 2 gamma E / (mu N) with memory,
// 2 gamma E / (mu p N) memoryless.
double predict_saturation(const TheoryInput& in);

// (1 - gamma mu)^k (delta0^2 + 2 C gamma^2 B^2) + saturation.
double theorem_bound(const TheoryInput& in, long long iteration);

struct AveragingResult {
  double gamma_opt = 0.0;
  double bound = 0.0;
};
// Step size and excess-loss bound for the Polyak-Ruppert averaged iterate:
// gamma = min(sqrt(N delta0^2 / (2 E K)), gamma_max) and
// bound = 2 max(sqrt(2 delta0^2 E / (N K)), delta0^2/(gamma_max K))
//         + 2 gamma_max C B^2 / K.
AveragingResult gamma_opt_averaging(const TheoryInput& in);

}  // namespace artemis
