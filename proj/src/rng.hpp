// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Counter-based random streams (Philox4x32-10). A stream is identified by a
// root seed and a key path; the same (seed, key) always replays the same
// draws, and draws can be addressed by position without replaying history.

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace walsh {

using PhiloxBlock = std::array<std::uint32_t, 4>;

PhiloxBlock philox4x32(PhiloxBlock counter, std::array<std::uint32_t, 2> key);

// Key-path components identifying what a stream is used for.
namespace purpose {
inline constexpr std::uint64_t kBrownian = 1;
inline constexpr std::uint64_t kExcursionRay = 2;
inline constexpr std::uint64_t kReplica = 3;
inline constexpr std::uint64_t kLatticeCoins = 4;
inline constexpr std::uint64_t kPlusMark = 5;
inline constexpr std::uint64_t kMinusMark = 6;
inline constexpr std::uint64_t kBridge = 7;
inline constexpr std::uint64_t kWalk = 8;
inline constexpr std::uint64_t kFilterGamma = 9;
inline constexpr std::uint64_t kMeasureFamily = 10;
inline constexpr std::uint64_t kMeta = 11;
}  // namespace purpose

class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> key = {});

  std::uint64_t root_seed() const { return root_seed_; }
  std::span<const std::uint64_t> key() const { return key_; }

  /// Stream whose key path extends this one.
  RngStream child(std::initializer_list<std::uint64_t> suffix) const;
  RngStream child(std::span<const std::uint64_t> suffix) const;

  /// Reposition at the given 64-bit draw index.
  void seek(std::uint64_t position);
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Index i with probability weights[i] / Σ weights.
  int categorical(std::span<const double> weights);
  /// Marsaglia–Tsang gamma with unit scale.
  double gamma(double shape);

  /// Random access to the i-th uniform without disturbing the cursor.
  double uniform_at(std::uint64_t position) const;

 private:
  std::uint64_t root_seed_;
  std::vector<std::uint64_t> key_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;

  std::uint64_t draw_at(std::uint64_t position) const;
};

double u64_to_open_unit(std::uint64_t bits);

}  // namespace walsh
