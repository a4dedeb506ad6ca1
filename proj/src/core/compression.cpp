#include "compression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace artemis {

CompressionKind CompressionKind::quantization(int s) {
  if (s < 1) throw std::invalid_argument("quantization: s must be >= 1");
  CompressionKind k;
  k.type = Type::Quantization;
  k.levels = s;
  return k;
}

CompressionKind CompressionKind::sparsification(double q) {
  if (!(q > 0.0) || q > 1.0)
    throw std::invalid_argument("sparsification: q must be in (0, 1]");
  CompressionKind k;
  k.type = Type::Sparsification;
  k.keep_prob = q;
  return k;
}

double omega(const CompressionKind& kind, int dim) {
  if (dim < 1) throw std::invalid_argument("omega: dim must be >= 1");
  switch (kind.type) {
    case CompressionKind::Type::Identity:
      return 0.0;
    case CompressionKind::Type::Quantization: {
      const double s = kind.levels;
      const double d = dim;
      return std::min(d / (s * s), std::sqrt(d) / s);
    }
    case CompressionKind::Type::Sparsification:
      return 1.0 / kind.keep_prob - 1.0;
  }
  return 0.0;
}

long long elias_bit_bound(int dim, int s) {
  if (dim < 1 || s < 1)
    throw std::invalid_argument("elias_bit_bound: dim and s must be >= 1");
  const double d = dim;
  const double sd = s * (s + std::sqrt(d));
  const double ratio = 2.0 * (static_cast<double>(s) * s + d) / sd;
  const double bits = (3.0 + 1.5 * std::log2(ratio)) * sd + 32.0;
  return static_cast<long long>(std::ceil(bits));
}

long long message_bits(const CompressionKind& kind, int dim) {
  switch (kind.type) {
    case CompressionKind::Type::Identity:
      return 32LL * dim;
    case CompressionKind::Type::Quantization:
      return elias_bit_bound(dim, kind.levels);
    case CompressionKind::Type::Sparsification:
      // Expected cost: 32 bits per kept coordinate plus the mask, which is
      // free when q = 1.
      if (kind.keep_prob >= 1.0) return 32LL * dim;
      return static_cast<long long>(
                 std::ceil(32.0 * kind.keep_prob * dim)) + dim;
  }
  return 0;
}

namespace {

void check_finite(const Vec& v) {
  if (!v.allFinite())
    throw std::invalid_argument("compress: input vector is not finite");
}

Vec quantize(const Vec& v, int s, RngStream& rng) {
  const double norm = v.norm();
  Vec out = Vec::Zero(v.size());
  if (norm == 0.0) return out;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double r = s * std::abs(v[j]) / norm;
    double level = std::floor(r);
    const double p_up = r - level;
    // Exact levels (p_up == 0) are deterministic.
    if (p_up > 0.0 && rng.uniform() < p_up) level += 1.0;
    const double sign = v[j] < 0.0 ? -1.0 : 1.0;
    out[j] = sign * norm * level / s;
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> draw_mask(int dim, double keep_prob, RngStream& rng) {
  std::vector<std::uint8_t> mask(dim);
  for (int j = 0; j < dim; ++j)
    mask[j] = keep_prob >= 1.0 || rng.bernoulli(keep_prob) ? 1 : 0;
  return mask;
}

Vec apply_mask(const Vec& v, const std::vector<std::uint8_t>& mask,
               double keep_prob) {
  Vec out = Vec::Zero(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (mask[j]) out[j] = v[j] / keep_prob;
  return out;
}

CompressedMessage compress(const Vec& v, const CompressionKind& kind,
                           RngStream& rng) {
  check_finite(v);
  CompressedMessage msg;
  msg.kind = kind;
  const int dim = static_cast<int>(v.size());
  switch (kind.type) {
    case CompressionKind::Type::Identity:
      msg.payload = v;
      msg.bits = 32LL * dim;
      break;
    case CompressionKind::Type::Quantization:
      msg.payload = quantize(v, kind.levels, rng);
      // Zero in, zero out: only the norm is worth charging.
      msg.bits = v.norm() == 0.0 ? 32 : elias_bit_bound(dim, kind.levels);
      break;
    case CompressionKind::Type::Sparsification: {
      const auto mask = draw_mask(dim, kind.keep_prob, rng);
      msg.payload = apply_mask(v, mask, kind.keep_prob);
      msg.bits = message_bits(kind, dim);
      break;
    }
  }
  return msg;
}

}  // namespace artemis
