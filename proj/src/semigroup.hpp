// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Walsh Brownian motion semigroup evaluated through one-dimensional heat
// kernel convolutions, plus the generator and derivative identities.

#pragma once

#include <vector>

#include "stargraph.hpp"

namespace walsh {

struct QuadratureConfig {
  double truncation_radius_multiplier = 10.0;  // window x ± m·√t
  int node_count = 2001;                       // composite Simpson, odd
  int time_node_count = 129;                   // generator time integral, odd, ≥ 65

  void validate() const;
};

double heat_kernel(double t, double x, double y);

/// p_t f_i(x) = ∫_0^∞ f_i(y) p_t(x, y) dy, f_i extended by 0 on (-∞, 0).
double halfline_convolution(const ScalarFn& component, double t, double x,
                            const QuadratureConfig& cfg = {});

double wbm_semigroup_apply(const PiecewiseFunction& f, const GraphPoint& x, double t,
                           const GraphSpec& spec, const QuadratureConfig& cfg = {});

/// (P_t f)'(x) = -P_t f'(x) + 2 p_t f_j'(|x|) for x on ray j, x off the junction.
double semigroup_derivative(const PiecewiseFunction& f, const GraphPoint& x, double t,
                            const GraphSpec& spec, const QuadratureConfig& cfg = {});

/// P_t f(x) - f(x) - ½ ∫_0^t P_u f''(x) du for f ∈ D(α).
double generator_residual(const PiecewiseFunction& f, const GraphPoint& x, double t,
                          const GraphSpec& spec, const QuadratureConfig& cfg = {},
                          double domain_tol = kDomainTolerance);

struct TabulationConfig {
  int nodes = 400;
  double radius_multiplier = 12.0;  // table reaches at least this many √s
  double min_radius = 0.0;          // extend the table further when needed
};

/// P_s f tabulated on a per-ray radius grid and interpolated with local
/// four-point cubics; constant beyond the table end.
PiecewiseFunction tabulate_semigroup(const PiecewiseFunction& f, double s,
                                     const GraphSpec& spec,
                                     const QuadratureConfig& cfg = {},
                                     const TabulationConfig& table = {});

/// |P_{s+t} f(x) - P_t(P_s f)(x)| with the inner P_s f tabulated.
double semigroup_law_defect(const PiecewiseFunction& f, const GraphPoint& x, double s,
                            double t, const GraphSpec& spec,
                            const QuadratureConfig& cfg = {});

}  // namespace walsh
