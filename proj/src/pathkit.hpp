// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Driving paths on a time grid, reflection, excursion bookkeeping, the
// excursion-flipping Walsh construction and the random-walk approximation.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rng.hpp"
#include "stargraph.hpp"

namespace walsh {

struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  int steps = 1;

  static TimeGrid make(double t0, double dt, int steps);
  double time(int k) const { return t0 + k * dt; }
  double end_time() const { return time(steps); }
  /// Number of grid times, steps + 1.
  int size() const { return steps + 1; }
};

struct ScalarPath {
  TimeGrid grid;
  std::vector<double> values;
};

ScalarPath sample_brownian(const TimeGrid& grid, RngStream stream, double start = 0.0);

/// B_t - min_{u≤t} B_u on the grid.
ScalarPath reflect_path(const ScalarPath& path);

struct Reflection {
  ScalarPath path;        // |x| + B - min((|x| + B) ∧ 0)
  ScalarPath local_time;  // -min((|x| + B) ∧ 0)
};

Reflection skorokhod_reflection(double start_radius, const ScalarPath& brownian);

/// (1/2ε) Σ_{k < t_index} 1{X_k ≤ ε} dt
double local_time_band(const ScalarPath& x, double eps, int t_index);

/// k / 2^exponent
struct DyadicLabel {
  std::int64_t numerator = 0;
  int exponent = 0;

  double value() const;
  friend bool operator==(const DyadicLabel&, const DyadicLabel&) = default;
};

/// Least dyadic of minimal exponent in the open interval (u, v).
DyadicLabel dyadic_label(double u, double v);

/// Zero-index sentinel for an excursion still open at the grid end.
inline constexpr int kOpenEnd = -1;

struct ExcursionIndices {
  int g = 0;
  int d = kOpenEnd;
};

/// Last zero at or before t_index and first zero at or after it (exact zeros).
ExcursionIndices excursion_interval(const ScalarPath& x, int t_index);

/// The continuous path vanishes somewhere in [time(first), time(last)].
struct ZeroBracket {
  int first = 0;
  int last = 0;
};

/// Nonnegative path with its zero set resolved to grid brackets.
struct ReflectedPath {
  ScalarPath path;
  std::vector<ZeroBracket> zeros;  // increasing, disjoint
};

/// Brackets at the exact zeros of a grid path.
ReflectedPath with_exact_zeros(const ScalarPath& x);

/// Reflection B - min B with the running minimum taken over the continuous
/// path: between grid times the minimum is drawn from the Brownian bridge.
/// A new minimum inside (t_k, t_{k+1}) becomes the bracket [k, k+1].
ReflectedPath reflect_path_bridge(const ScalarPath& brownian, RngStream stream);

/// A maximal run of grid indices where the path is strictly positive.
struct Excursion {
  int first = 0;
  int last = 0;
  double left_time = 0.0;   // zero before the run
  double right_time = 0.0;  // zero after the run, or the grid end
  bool complete = false;
  bool has_left_zero = true;
  DyadicLabel label;
};

/// Runs between zero brackets, labelled by the dyadic of (left_time, right_time).
/// A point bracket contributes its own time; an interval bracket its midpoint.
std::vector<Excursion> excursions(const ReflectedPath& x);

struct WalshPath {
  TimeGrid grid;
  std::vector<GraphPoint> points;
  ScalarPath driver;                    // radius process
  std::optional<ScalarPath> brownian;   // B with driver = |z| + B + L̃
};

/// Rays drawn per excursion from Σ α_i δ_i, keyed by the excursion label so
/// equal labels give equal rays. A run before the first zero keeps start_ray.
WalshPath wbm_flip_construct(const ReflectedPath& reflected, const GraphSpec& spec,
                             RngStream stream, int start_ray = 0);
WalshPath wbm_flip_construct(const ScalarPath& reflected, const GraphSpec& spec,
                             RngStream stream, int start_ray = 0);

/// Reflected Brownian path from z (exact zeros) flipped into a Walsh path.
WalshPath sample_walsh_path(const GraphPoint& start, const TimeGrid& grid,
                            const GraphSpec& spec, RngStream stream);

struct LatticePoint {
  int ray = 1;
  std::int64_t level = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

struct Transition {
  LatticePoint to;
  double probability;
};

class WalkMatrix {
 public:
  explicit WalkMatrix(GraphSpec spec) : spec_(std::move(spec)) {}
  std::vector<Transition> row(const LatticePoint& from) const;
  const GraphSpec& spec() const { return spec_; }

 private:
  GraphSpec spec_;
};

WalkMatrix walk_matrix(const GraphSpec& spec);

/// M_{⌊2^{2n} t⌋} / 2^n for the chain started at 0, one sample per replica.
std::vector<GraphPoint> scaled_walk_marginal(const GraphSpec& spec, int n, double t,
                                             int replicas, const RngStream& stream);

/// f(Z_T) - f(z) - Σ f'(Z_k) ΔB_k - ½ Σ f''(Z_k) dt - flux·L̃_T with left
/// endpoints. L̃ is the Skorokhod term, or the band estimate when eps_local > 0.
double freidlin_sheu_residual(const PiecewiseFunction& f, const WalshPath& z,
                              const GraphSpec& spec, double eps_local = 0.0);

void write_csv(std::ostream& out, const ScalarPath& path);
void write_csv(std::ostream& out, const WalshPath& path);

}  // namespace walsh
