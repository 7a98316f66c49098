// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

namespace walsh {

void QuadratureConfig::validate() const {
  if (node_count < 3 || node_count % 2 == 0)
    fail(ErrorCode::InvalidArgument, "node_count must be odd and >= 3");
  if (time_node_count < 65 || time_node_count % 2 == 0)
    fail(ErrorCode::InvalidArgument, "time_node_count must be odd and >= 65");
  if (!(truncation_radius_multiplier >= 6.0))
    fail(ErrorCode::InvalidArgument, "truncation multiplier must be >= 6");
}

double heat_kernel(double t, double x, double y) {
  if (!(t > 0.0)) fail(ErrorCode::NonPositiveTime, "t = " + std::to_string(t));
  const double d = y - x;
  return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

namespace {

template <class F>
double simpson(F&& integrand, double lo, double hi, int nodes) {
  const int intervals = nodes - 1;
  const double h = (hi - lo) / intervals;
  double acc = integrand(lo) + integrand(hi);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * integrand(lo + k * h);
  return acc * h / 3.0;
}

}  // namespace

double halfline_convolution(const ScalarFn& component, double t, double x,
                            const QuadratureConfig& cfg) {
  if (!(t > 0.0)) fail(ErrorCode::NonPositiveTime, "t = " + std::to_string(t));
  const double half_width = cfg.truncation_radius_multiplier * std::sqrt(t);
  const double lo = std::max(0.0, x - half_width);
  const double hi = x + half_width;
  if (hi <= 0.0) return 0.0;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
  const double result = simpson(
      [&](double y) {
        const double v = component(y);
        if (!std::isfinite(v))
          fail(ErrorCode::QuadratureDiverged, "non-finite integrand at y = " + std::to_string(y));
        const double d = y - x;
        return v * norm * std::exp(-d * d / (2.0 * t));
      },
      lo, hi, cfg.node_count);
  return result;
}

double wbm_semigroup_apply(const PiecewiseFunction& f, const GraphPoint& x, double t,
                           const GraphSpec& spec, const QuadratureConfig& cfg) {
  if (f.n_rays() != spec.n_rays()) fail(ErrorCode::WrongRayCount, "function and graph disagree on N");
  const double h = x.radius;
  double junction = 0.0;
  for (int i = 1; i <= spec.n_rays(); ++i)
    junction += spec.alpha(i) * halfline_convolution(f.component(i).value, t, -h, cfg);
  junction *= 2.0;
  if (x.is_origin()) return junction;
  const auto& fj = f.component(x.ray).value;
  return junction + halfline_convolution(fj, t, h, cfg) - halfline_convolution(fj, t, -h, cfg);
}

double semigroup_derivative(const PiecewiseFunction& f, const GraphPoint& x, double t,
                            const GraphSpec& spec, const QuadratureConfig& cfg) {
  if (x.is_origin())
    fail(ErrorCode::OriginNotDifferentiable, "P_t f is differentiated along rays only");
  const PiecewiseFunction df = f.derivative_function();
  return -wbm_semigroup_apply(df, x, t, spec, cfg) +
         2.0 * halfline_convolution(df.component(x.ray).value, t, x.radius, cfg);
}

double generator_residual(const PiecewiseFunction& f, const GraphPoint& x, double t,
                          const GraphSpec& spec, const QuadratureConfig& cfg,
                          double domain_tol) {
  cfg.validate();
  const double flux = flux_defect(f, spec);
  if (std::abs(flux) > domain_tol)
    fail(ErrorCode::NotInDomain, "flux defect " + std::to_string(flux));
  const PiecewiseFunction d2 = f.second_derivative_function();
  // u = v² removes the √u behaviour of P_u f''(x) near u = 0.
  const double integral = simpson(
      [&](double v) {
        if (v == 0.0) return 0.0;
        return 2.0 * v * wbm_semigroup_apply(d2, x, v * v, spec, cfg);
      },
      0.0, std::sqrt(t), cfg.time_node_count);
  return wbm_semigroup_apply(f, x, t, spec, cfg) - f(x) - 0.5 * integral;
}

namespace {

struct RayTable {
  double step;
  std::vector<double> values;

  double operator()(double h) const {
    const int n = static_cast<int>(values.size());
    if (h <= 0.0) return values.front();
    const double pos = h / step;
    if (pos >= n - 1) return values.back();
    // four-point stencil, shifted inward at the ends
    int k = static_cast<int>(pos) - 1;
    k = std::clamp(k, 0, n - 4);
    double result = 0.0;
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (b != a) w *= (pos - (k + b)) / static_cast<double>(a - b);
      }
      result += w * values[k + a];
    }
    return result;
  }
};

}  // namespace

PiecewiseFunction tabulate_semigroup(const PiecewiseFunction& f, double s,
                                     const GraphSpec& spec, const QuadratureConfig& cfg,
                                     const TabulationConfig& table) {
  if (table.nodes < 4) fail(ErrorCode::InvalidArgument, "tabulation needs at least 4 nodes");
  const double radius = std::max(table.radius_multiplier * std::sqrt(s), table.min_radius);
  const double step = radius / (table.nodes - 1);
  std::vector<RayFunction> components;
  for (int ray = 1; ray <= spec.n_rays(); ++ray) {
    auto tab = std::make_shared<RayTable>();
    tab->step = step;
    tab->values.resize(table.nodes);
    for (int k = 0; k < table.nodes; ++k) {
      const GraphPoint pt = GraphPoint::make(ray, k * step, spec.n_rays());
      tab->values[k] = wbm_semigroup_apply(f, pt, s, spec, cfg);
    }
    components.push_back({[tab](double h) { return (*tab)(h); }, {}, {}});
  }
  return PiecewiseFunction(std::move(components));
}

double semigroup_law_defect(const PiecewiseFunction& f, const GraphPoint& x, double s,
                            double t, const GraphSpec& spec, const QuadratureConfig& cfg) {
  TabulationConfig table;
  // the outer convolution reads P_s f up to |x| + m·√t
  table.min_radius = x.radius + cfg.truncation_radius_multiplier * std::sqrt(t);
  const PiecewiseFunction inner = tabulate_semigroup(f, s, spec, cfg, table);
  const double direct = wbm_semigroup_apply(f, x, s + t, spec, cfg);
  const double composed = wbm_semigroup_apply(inner, x, t, spec, cfg);
  return std::abs(direct - composed);
}

}  // namespace walsh
