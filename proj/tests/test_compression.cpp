#include <cmath>
#include <limits>
#include <vector>

#include "compression.hpp"
#include "doctest.h"
#include "rng.hpp"

using namespace artemis;

namespace {

Vec random_vector(int dim, std::uint64_t seed) {
  RngStream rng(seed, 0, 0, Draw::DataGen);
  Vec v(dim);
  for (int j = 0; j < dim; ++j) v[j] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("variance factors") {
  CHECK(omega(CompressionKind::identity(), 20) == 0.0);
  CHECK(omega(CompressionKind::quantization(1), 20) ==
        doctest::Approx(std::sqrt(20.0)).epsilon(1e-12));
  // s large enough that d/s^2 is the smaller branch
  CHECK(omega(CompressionKind::quantization(5), 20) ==
        doctest::Approx(0.8).epsilon(1e-12));
  CHECK(omega(CompressionKind::sparsification(0.25), 7) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(omega(CompressionKind::sparsification(1.0), 7) == 0.0);
}

TEST_CASE("bit budget formula") {
  CHECK(elias_bit_bound(16, 1) == 68);
  CHECK(elias_bit_bound(1, 1) == 41);
  CHECK(message_bits(CompressionKind::identity(), 20) == 640);
  for (int d = 16; d <= 256; ++d)
    CHECK(elias_bit_bound(d, 1) < 32LL * d);
}

TEST_CASE("quantization edge cases") {
  RngStream rng(1, 0, 0, Draw::UplinkCompress);
  const CompressionKind q1 = CompressionKind::quantization(1);

  const CompressedMessage zero = compress(Vec::Zero(5), q1, rng);
  CHECK(zero.payload.isZero(0.0));
  CHECK(zero.bits == 32);

  // |v_1|/||v|| = 1 sits exactly on a level: no randomness is consumed.
  Vec axis(2);
  axis << 3.0, 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    RngStream r(k, 0, 0, Draw::UplinkCompress);
    const CompressedMessage msg = compress(axis, q1, r);
    CHECK(msg.payload[0] == 3.0);
    CHECK(msg.payload[1] == 0.0);
  }

  Vec bad(2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(compress(bad, q1, rng), std::invalid_argument);
}

TEST_CASE("quantization is unbiased with bounded variance") {
  const int dim = 20;
  const int trials = 100000;
  const Vec v = random_vector(dim, 7);
  const CompressionKind kind = CompressionKind::quantization(1);
  const double w = omega(kind, dim);

  Vec mean = Vec::Zero(dim);
  Vec second = Vec::Zero(dim);
  double err_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(99, 0, static_cast<std::uint64_t>(t), Draw::UplinkCompress);
    const CompressedMessage msg = compress(v, kind, rng);
    mean += msg.payload;
    second += msg.payload.cwiseProduct(msg.payload);
    err_sq += (msg.payload - v).squaredNorm();
  }
  mean /= trials;
  second /= trials;

  for (int j = 0; j < dim; ++j) {
    const double var = second[j] - mean[j] * mean[j];
    const double se = std::sqrt(std::max(var, 1e-30) / trials);
    CHECK(std::abs(mean[j] - v[j]) <= 4.0 * se + 1e-12);
  }
  const double rel_var = err_sq / trials / v.squaredNorm();
  CHECK(rel_var <= w * (1.0 + 3.0 / std::sqrt(static_cast<double>(trials))));
}

TEST_CASE("sparsification matches its exact variance") {
  const int dim = 20;
  const int trials = 100000;
  const double q = 0.25;
  const Vec v = random_vector(dim, 11);
  const CompressionKind kind = CompressionKind::sparsification(q);

  Vec mean = Vec::Zero(dim);
  double err_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(5, 0, static_cast<std::uint64_t>(t), Draw::UplinkCompress);
    const CompressedMessage msg = compress(v, kind, rng);
    mean += msg.payload;
    err_sq += (msg.payload - v).squaredNorm();
  }
  mean /= trials;
  for (int j = 0; j < dim; ++j) {
    // keep/drop variance of coordinate j is v_j^2 (1-q)/q
    const double se = std::sqrt(v[j] * v[j] * (1.0 - q) / q / trials);
    CHECK(std::abs(mean[j] - v[j]) <= 4.0 * se + 1e-12);
  }
  const double rel_var = err_sq / trials / v.squaredNorm();
  const double expected = 1.0 / q - 1.0;  // equality, not only a bound
  CHECK(rel_var == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("sparsification with q=1 is the identity") {
  const Vec v = random_vector(6, 3);
  RngStream rng(0, 0, 0, Draw::UplinkCompress);
  const CompressedMessage msg =
      compress(v, CompressionKind::sparsification(1.0), rng);
  CHECK(msg.payload == v);
  CHECK(msg.bits == 32 * 6);
}

TEST_CASE("shared-mask difference identity") {
  const double q = 0.5;

  SUBCASE("hand-checked mask") {
    Vec x(2), y(2);
    x << 2.0, 0.0;
    y << 0.0, 2.0;
    const std::vector<std::uint8_t> mask = {1, 0};
    const Vec cx = apply_mask(x, mask, q);
    const Vec cy = apply_mask(y, mask, q);
    const Vec cdiff = apply_mask(x - y, mask, q);
    CHECK(cx[0] == 4.0);
    CHECK(cx[1] == 0.0);
    CHECK(Vec(cx - cy) == cdiff);
  }

  SUBCASE("randomized draws") {
    for (int t = 0; t < 1000; ++t) {
      const Vec x = random_vector(12, 100 + t);
      const Vec y = random_vector(12, 5000 + t);
      RngStream rng(42, 0, static_cast<std::uint64_t>(t),
                    Draw::UplinkCompress);
      const auto mask = draw_mask(12, q, rng);
      const Vec lhs = apply_mask(x, mask, q) - apply_mask(y, mask, q);
      const Vec rhs = apply_mask(x - y, mask, q);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("identical stream keys give bit-identical messages") {
  const Vec v = random_vector(15, 21);
  for (const CompressionKind& kind :
       {CompressionKind::quantization(2), CompressionKind::sparsification(0.3),
        CompressionKind::identity()}) {
    RngStream a(8, 3, 17, Draw::DownlinkCompress);
    RngStream b(8, 3, 17, Draw::DownlinkCompress);
    const CompressedMessage ma = compress(v, kind, a);
    const CompressedMessage mb = compress(v, kind, b);
    CHECK(ma.bits == mb.bits);
    CHECK((ma.payload.array() == mb.payload.array()).all());
  }
}
