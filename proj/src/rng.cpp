// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rng.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace walsh {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_key(std::span<const std::uint64_t> key) {
  std::uint64_t h = splitmix64(0x5EED5EED5EED5EEDULL ^ key.size());
  for (std::uint64_t k : key) h = splitmix64(h ^ splitmix64(k));
  return h;
}

}  // namespace

PhiloxBlock philox4x32(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

double u64_to_open_unit(std::uint64_t bits) {
  // 52 random bits, shifted by half a step so both 0 and 1 are excluded
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

RngStream::RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> key)
    : root_seed_(root_seed), key_(std::move(key)), stream_id_(hash_key(key_)) {}

RngStream RngStream::child(std::initializer_list<std::uint64_t> suffix) const {
  return child(std::span<const std::uint64_t>(suffix.begin(), suffix.size()));
}

RngStream RngStream::child(std::span<const std::uint64_t> suffix) const {
  std::vector<std::uint64_t> key = key_;
  key.insert(key.end(), suffix.begin(), suffix.end());
  return RngStream(root_seed_, std::move(key));
}

void RngStream::seek(std::uint64_t position) {
  position_ = position;
  has_spare_ = false;
}

std::uint64_t RngStream::draw_at(std::uint64_t position) const {
  // one Philox block yields two 64-bit draws
  const std::uint64_t block = position >> 1;
  const PhiloxBlock out = philox4x32(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
      {static_cast<std::uint32_t>(root_seed_), static_cast<std::uint32_t>(root_seed_ >> 32)});
  const int half = static_cast<int>(position & 1U) * 2;
  return (static_cast<std::uint64_t>(out[half]) << 32) | out[half + 1];
}

std::uint64_t RngStream::next_u64() { return draw_at(position_++); }

double RngStream::uniform() { return u64_to_open_unit(next_u64()); }

double RngStream::uniform_at(std::uint64_t position) const {
  return u64_to_open_unit(draw_at(position));
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int RngStream::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) fail(ErrorCode::InvalidArgument, "categorical weights sum to zero");
  const double target = uniform() * total;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += weights[i];
    if (target < acc) return last_positive;
  }
  return last_positive;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) fail(ErrorCode::InvalidArgument, "gamma shape must be positive");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace walsh
