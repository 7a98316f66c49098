// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "stargraph.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace walsh {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::SignsNotBlockSorted: return "SignsNotBlockSorted";
    case ErrorCode::WrongRayCount: return "WrongRayCount";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::QuadratureDiverged: return "QuadratureDiverged";
    case ErrorCode::OriginNotDifferentiable: return "OriginNotDifferentiable";
    case ErrorCode::NotInDomain: return "NotInDomain";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::NotInExcursion: return "NotInExcursion";
    case ErrorCode::OffLatticeStart: return "OffLatticeStart";
    case ErrorCode::SamplerInvalid: return "SamplerInvalid";
    case ErrorCode::BeforeHitting: return "BeforeHitting";
    case ErrorCode::MissingIntermediateStart: return "MissingIntermediateStart";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::ZeroExpected: return "ZeroExpected";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
    case ErrorCode::CheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

GraphSpec GraphSpec::create(std::vector<double> alpha, std::vector<int> eps) {
  if (alpha.empty()) fail(ErrorCode::WrongRayCount, "graph needs at least one ray");
  if (eps.size() != alpha.size())
    fail(ErrorCode::WrongRayCount, "alpha and eps lengths differ");
  for (double a : alpha) {
    if (!(a > 0.0)) fail(ErrorCode::NonPositiveWeight, "ray weight " + std::to_string(a));
  }
  const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTolerance)
    fail(ErrorCode::WeightsNotNormalized, "weights sum to " + std::to_string(total));

  int p = 0;
  while (p < static_cast<int>(eps.size()) && eps[p] == 1) ++p;
  for (std::size_t i = p; i < eps.size(); ++i) {
    if (eps[i] != -1)
      fail(ErrorCode::SignsNotBlockSorted, "signs must be a +1 block followed by a -1 block");
  }

  GraphSpec spec;
  spec.alpha_ = std::move(alpha);
  spec.eps_ = std::move(eps);
  spec.p_ = p;
  spec.alpha_plus_ = std::accumulate(spec.alpha_.begin(), spec.alpha_.begin() + p, 0.0);
  spec.alpha_minus_ = 1.0 - spec.alpha_plus_;
  return spec;
}

double GraphSpec::conditional_weight(int ray) const {
  if (is_plus_ray(ray)) return alpha_plus_ > 0.0 ? alpha(ray) / alpha_plus_ : 0.0;
  return alpha_minus_ > 0.0 ? alpha(ray) / alpha_minus_ : 0.0;
}

GraphPoint GraphPoint::make(int ray, double radius, int n_rays) {
  if (ray < 1 || ray > n_rays)
    fail(ErrorCode::InvalidArgument, "ray " + std::to_string(ray) + " outside [1," +
                                         std::to_string(n_rays) + "]");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    fail(ErrorCode::InvalidArgument, "radius must be finite and nonnegative");
  if (radius == 0.0) return origin(n_rays);
  return {ray, radius};
}

double distance(const GraphPoint& x, const GraphPoint& y) {
  // The origin sits on ray N with radius 0, so both branches agree there.
  if (x.ray == y.ray) return std::abs(x.radius - y.radius);
  return x.radius + y.radius;
}

int sign_of(const GraphPoint& x, const GraphSpec& spec) { return spec.eps(x.ray); }

GraphPoint embed_line(double y, const GraphSpec& spec) {
  if (spec.n_rays() != 2) fail(ErrorCode::WrongRayCount, "line embedding needs N = 2");
  return y >= 0.0 ? GraphPoint::make(1, y, 2) : GraphPoint::make(2, -y, 2);
}

double project_line(const GraphPoint& x, const GraphSpec& spec) {
  if (spec.n_rays() != 2) fail(ErrorCode::WrongRayCount, "line projection needs N = 2");
  return x.ray == 1 ? x.radius : -x.radius;
}

double finite_difference(const ScalarFn& fn, double h, double step) {
  return (fn(h + step) - fn(h - step)) / (2.0 * step);
}

PiecewiseFunction::PiecewiseFunction(std::vector<RayFunction> components)
    : components_(std::move(components)) {
  if (components_.empty()) fail(ErrorCode::WrongRayCount, "function needs at least one ray");
  for (const auto& c : components_) {
    if (!c.value) fail(ErrorCode::InvalidArgument, "ray component without a value evaluator");
  }
}

PiecewiseFunction PiecewiseFunction::uniform(const RayFunction& component, int n_rays) {
  return PiecewiseFunction(std::vector<RayFunction>(n_rays, component));
}

double PiecewiseFunction::operator()(const GraphPoint& x) const {
  return component(x.ray).value(x.radius);
}

double PiecewiseFunction::derivative(const GraphPoint& x) const {
  const auto& c = component(x.ray);
  if (!c.first) fail(ErrorCode::DerivativeUnavailable, "no first derivative on ray " + std::to_string(x.ray));
  return c.first(x.radius);
}

double PiecewiseFunction::second_derivative(const GraphPoint& x) const {
  const auto& c = component(x.ray);
  if (!c.second) fail(ErrorCode::DerivativeUnavailable, "no second derivative on ray " + std::to_string(x.ray));
  return c.second(x.radius);
}

PiecewiseFunction PiecewiseFunction::derivative_function() const {
  std::vector<RayFunction> out;
  out.reserve(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (!components_[i].first)
      fail(ErrorCode::DerivativeUnavailable, "no first derivative on ray " + std::to_string(i + 1));
    out.push_back({components_[i].first, components_[i].second, {}});
  }
  return PiecewiseFunction(std::move(out));
}

PiecewiseFunction PiecewiseFunction::second_derivative_function() const {
  std::vector<RayFunction> out;
  out.reserve(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (!components_[i].second)
      fail(ErrorCode::DerivativeUnavailable, "no second derivative on ray " + std::to_string(i + 1));
    out.push_back({components_[i].second, {}, {}});
  }
  return PiecewiseFunction(std::move(out));
}

double PiecewiseFunction::junction_mismatch() const {
  const double ref = components_.back().value(0.0);
  double worst = 0.0;
  for (const auto& c : components_) worst = std::max(worst, std::abs(c.value(0.0) - ref));
  return worst;
}

namespace {

ScalarFn scale_fn(const ScalarFn& f, double a) {
  if (!f) return {};
  return [f, a](double h) { return a * f(h); };
}

ScalarFn add_fn(const ScalarFn& f, const ScalarFn& g) {
  if (!f || !g) return {};
  return [f, g](double h) { return f(h) + g(h); };
}

}  // namespace

PiecewiseFunction PiecewiseFunction::scaled(double a) const {
  std::vector<RayFunction> out;
  for (const auto& c : components_)
    out.push_back({scale_fn(c.value, a), scale_fn(c.first, a), scale_fn(c.second, a)});
  return PiecewiseFunction(std::move(out));
}

PiecewiseFunction operator+(const PiecewiseFunction& f, const PiecewiseFunction& g) {
  if (f.n_rays() != g.n_rays()) fail(ErrorCode::WrongRayCount, "adding functions on different graphs");
  std::vector<RayFunction> out;
  for (int r = 1; r <= f.n_rays(); ++r) {
    const auto& a = f.component(r);
    const auto& b = g.component(r);
    out.push_back({add_fn(a.value, b.value), add_fn(a.first, b.first), add_fn(a.second, b.second)});
  }
  return PiecewiseFunction(std::move(out));
}

double flux_defect(const PiecewiseFunction& f, const GraphSpec& spec) {
  if (f.n_rays() != spec.n_rays()) fail(ErrorCode::WrongRayCount, "function and graph disagree on N");
  double total = 0.0;
  for (int r = 1; r <= spec.n_rays(); ++r) {
    const auto& c = f.component(r);
    if (!c.first) fail(ErrorCode::DerivativeUnavailable, "no first derivative on ray " + std::to_string(r));
    total += spec.alpha(r) * c.first(0.0);
  }
  return total;
}

bool in_domain(const PiecewiseFunction& f, const GraphSpec& spec, double tol) {
  return std::abs(flux_defect(f, spec)) <= tol;
}

}  // namespace walsh
