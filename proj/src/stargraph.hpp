// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Star graph geometry: N half lines glued at one junction, points on it, and
// piecewise test functions given ray by ray.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace walsh {

inline constexpr double kWeightSumTolerance = 1e-12;
inline constexpr double kDomainTolerance = 1e-9;

/// Validated star graph. Rays are numbered 1..N; rays 1..p carry sign +1 and
/// rays p+1..N carry sign -1.
class GraphSpec {
 public:
  static GraphSpec create(std::vector<double> alpha, std::vector<int> eps);

  int n_rays() const { return static_cast<int>(alpha_.size()); }
  int p() const { return p_; }
  double alpha(int ray) const { return alpha_.at(ray - 1); }
  int eps(int ray) const { return eps_.at(ray - 1); }
  double alpha_plus() const { return alpha_plus_; }
  double alpha_minus() const { return alpha_minus_; }
  std::span<const double> alphas() const { return alpha_; }
  std::span<const int> signs() const { return eps_; }

  bool is_plus_ray(int ray) const { return ray <= p_; }
  /// α_i/α⁺ for plus rays, α_i/α⁻ for minus rays (0 if that side is empty).
  double conditional_weight(int ray) const;

 private:
  GraphSpec() = default;
  std::vector<double> alpha_;
  std::vector<int> eps_;
  int p_ = 0;
  double alpha_plus_ = 0.0;
  double alpha_minus_ = 0.0;
};

/// A point h·e_ray of G. The junction is always stored as (N, 0).
struct GraphPoint {
  int ray = 1;
  double radius = 0.0;

  static GraphPoint make(int ray, double radius, int n_rays);
  static GraphPoint origin(int n_rays) { return {n_rays, 0.0}; }

  bool is_origin() const { return radius == 0.0; }
  friend bool operator==(const GraphPoint&, const GraphPoint&) = default;
};

double distance(const GraphPoint& x, const GraphPoint& y);

/// ε(x): sign of the ray carrying x, with ε(0) = ε_N.
int sign_of(const GraphPoint& x, const GraphSpec& spec);

/// Real line onto the two-ray graph: y ≥ 0 to ray 1, y < 0 to ray 2.
GraphPoint embed_line(double y, const GraphSpec& spec);
double project_line(const GraphPoint& x, const GraphSpec& spec);

using ScalarFn = std::function<double(double)>;

/// One ray component f_i on [0, ∞) with optional analytic derivatives.
struct RayFunction {
  ScalarFn value;
  ScalarFn first;
  ScalarFn second;
};

/// Central difference with the given step; cross-checks only.
double finite_difference(const ScalarFn& fn, double h, double step = 1e-5);

/// A function on G given by its ray components f_1..f_N.
class PiecewiseFunction {
 public:
  PiecewiseFunction() = default;
  explicit PiecewiseFunction(std::vector<RayFunction> components);
  static PiecewiseFunction uniform(const RayFunction& component, int n_rays);

  int n_rays() const { return static_cast<int>(components_.size()); }
  const RayFunction& component(int ray) const { return components_.at(ray - 1); }

  double operator()(const GraphPoint& x) const;
  /// Derivative along e(x); at the junction f'(0) = f_N'(0+).
  double derivative(const GraphPoint& x) const;
  double second_derivative(const GraphPoint& x) const;

  /// f' and f'' as functions on G (one derivative order is lost per step).
  PiecewiseFunction derivative_function() const;
  PiecewiseFunction second_derivative_function() const;

  /// max_i |f_i(0) - f_N(0)|
  double junction_mismatch() const;

  PiecewiseFunction scaled(double a) const;
  friend PiecewiseFunction operator+(const PiecewiseFunction& f,
                                     const PiecewiseFunction& g);

 private:
  std::vector<RayFunction> components_;
};

/// Σ α_i f_i'(0+); f ∈ D(α) iff this vanishes.
double flux_defect(const PiecewiseFunction& f, const GraphSpec& spec);
bool in_domain(const PiecewiseFunction& f, const GraphSpec& spec,
               double tol = kDomainTolerance);

}  // namespace walsh
