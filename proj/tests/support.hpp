// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Hand-rolled generators for property tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rng.hpp"
#include "stargraph.hpp"

namespace walsh::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : stream_(seed, {0xC0FFEE}) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * stream_.uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(stream_.next_u64() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (stream_.next_u64() & 1U) != 0; }

  /// Valid graph with N in [lo, hi] rays, random weights and split point p.
  GraphSpec graph(int lo = 1, int hi = 6) {
    const int n = integer(lo, hi);
    std::vector<double> alpha(n);
    double total = 0.0;
    for (double& a : alpha) total += (a = uniform(0.05, 1.0));
    for (double& a : alpha) a /= total;
    double sum = 0.0;
    for (int i = 0; i + 1 < n; ++i) sum += alpha[i];
    alpha[n - 1] = 1.0 - sum;
    const int p = integer(0, n);
    std::vector<int> eps(n);
    for (int i = 0; i < n; ++i) eps[i] = i < p ? 1 : -1;
    return GraphSpec::create(alpha, eps);
  }

  GraphPoint point(const GraphSpec& spec, double max_radius = 5.0) {
    if (integer(0, 7) == 0) return GraphPoint::origin(spec.n_rays());
    return GraphPoint::make(integer(1, spec.n_rays()), uniform(0.0, max_radius), spec.n_rays());
  }

  RngStream& stream() { return stream_; }

 private:
  RngStream stream_;
};

}  // namespace walsh::testing
