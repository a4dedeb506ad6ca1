#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rng.hpp"

namespace artemis {

using Vec = Eigen::VectorXd;

// Unbiased compression operator selector. Quantization follows the stochastic
// s-level scheme (sign, norm, randomized integer level); sparsification keeps
// each coordinate independently with probability q and rescales by 1/q.
struct CompressionKind {
  enum class Type { Identity, Quantization, Sparsification };

  Type type = Type::Identity;
  int levels = 1;        // s, quantization only
  double keep_prob = 1;  // q, sparsification only

  static CompressionKind identity() { return {}; }
  static CompressionKind quantization(int s);
  static CompressionKind sparsification(double q);

  bool is_identity() const { return type == Type::Identity; }
};

struct CompressedMessage {
  Vec payload;
  long long bits = 0;
  CompressionKind kind;
};

// Variance factor omega: E||C(v) - v||^2 <= omega * ||v||^2.
double omega(const CompressionKind& kind, int dim);

// Elias-code budget for an s-quantized d-vector:
// ceil((3 + (3/2) log2(2(s^2+d)/(s(s+sqrt(d))))) * s(s+sqrt(d)) + 32).
// Accounting only; no coder is implemented.
long long elias_bit_bound(int dim, int s);

// Bits charged for one message of the given kind (nonzero payload).
long long message_bits(const CompressionKind& kind, int dim);

CompressedMessage compress(const Vec& v, const CompressionKind& kind,
                           RngStream& rng);

// Sparsification with an explicit shared mask, so that the same draw can be
// applied to several vectors. C(x) - C(y) = C(x - y) holds exactly then.
std::vector<std::uint8_t> draw_mask(int dim, double keep_prob, RngStream& rng);
Vec apply_mask(const Vec& v, const std::vector<std::uint8_t>& mask,
               double keep_prob);

}  // namespace artemis
