// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "pathkit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "csv.hpp"

namespace walsh {

TimeGrid TimeGrid::make(double t0, double dt, int steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "grid step must be positive");
  if (steps < 1) fail(ErrorCode::InvalidArgument, "grid needs at least one step");
  return {t0, dt, steps};
}

ScalarPath sample_brownian(const TimeGrid& grid, RngStream stream, double start) {
  ScalarPath out{grid, std::vector<double>(grid.size())};
  const double sd = std::sqrt(grid.dt);
  out.values[0] = start;
  for (int k = 0; k < grid.steps; ++k) out.values[k + 1] = out.values[k] + sd * stream.normal();
  return out;
}

ScalarPath reflect_path(const ScalarPath& path) {
  ScalarPath out = path;
  double running_min = path.values.front();
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    running_min = std::min(running_min, path.values[k]);
    out.values[k] = path.values[k] - running_min;
  }
  return out;
}

Reflection skorokhod_reflection(double start_radius, const ScalarPath& brownian) {
  if (!(start_radius >= 0.0)) fail(ErrorCode::InvalidArgument, "start radius must be nonnegative");
  if (brownian.values.empty() || brownian.values.front() != 0.0)
    fail(ErrorCode::InvalidArgument, "driver must start at 0");
  Reflection out{brownian, brownian};
  double running_min = 0.0;
  for (std::size_t k = 0; k < brownian.values.size(); ++k) {
    const double shifted = start_radius + brownian.values[k];
    running_min = std::min(running_min, shifted);
    out.path.values[k] = shifted - running_min;
    out.local_time.values[k] = -running_min;
  }
  return out;
}

double local_time_band(const ScalarPath& x, double eps, int t_index) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "band width must be positive");
  if (t_index < 0 || t_index >= static_cast<int>(x.values.size()))
    fail(ErrorCode::InvalidArgument, "time index outside the grid");
  int hits = 0;
  for (int k = 0; k < t_index; ++k) hits += x.values[k] <= eps ? 1 : 0;
  return hits * x.grid.dt / (2.0 * eps);
}

double DyadicLabel::value() const { return std::ldexp(static_cast<double>(numerator), -exponent); }

DyadicLabel dyadic_label(double u, double v) {
  if (!(u < v)) fail(ErrorCode::EmptyInterval, "need u < v");
  for (int n = 0; n <= 62; ++n) {
    const double k = std::floor(std::ldexp(u, n)) + 1.0;
    if (std::ldexp(k, -n) < v) return {static_cast<std::int64_t>(k), n};
  }
  fail(ErrorCode::InvalidArgument, "interval narrower than 2^-62");
}

ExcursionIndices excursion_interval(const ScalarPath& x, int t_index) {
  const int n = static_cast<int>(x.values.size());
  if (t_index < 0 || t_index >= n) fail(ErrorCode::InvalidArgument, "time index outside the grid");
  if (!(x.values[t_index] > 0.0)) fail(ErrorCode::NotInExcursion, "path is at zero");
  int g = t_index;
  while (g >= 0 && x.values[g] != 0.0) --g;
  if (g < 0) fail(ErrorCode::NotInExcursion, "no zero before the time index");
  int d = t_index;
  while (d < n && x.values[d] != 0.0) ++d;
  return {g, d < n ? d : kOpenEnd};
}

ReflectedPath with_exact_zeros(const ScalarPath& x) {
  ReflectedPath out{x, {}};
  for (int k = 0; k < static_cast<int>(x.values.size()); ++k) {
    if (x.values[k] < 0.0) fail(ErrorCode::InvalidArgument, "reflected path must be nonnegative");
    if (x.values[k] == 0.0) out.zeros.push_back({k, k});
  }
  return out;
}

ReflectedPath reflect_path_bridge(const ScalarPath& brownian, RngStream stream) {
  const auto& b = brownian.values;
  const double dt = brownian.grid.dt;
  ReflectedPath out{brownian, {{0, 0}}};
  out.path.values[0] = 0.0;
  double running_min = b.front();
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    const double gap = b[k + 1] - b[k];
    // minimum of the bridge from b[k] to b[k+1] over one step
    const double bridge_min =
        0.5 * (b[k] + b[k + 1] - std::sqrt(gap * gap - 2.0 * dt * std::log(stream.uniform())));
    if (bridge_min < running_min) {
      running_min = bridge_min;
      out.zeros.push_back({static_cast<int>(k), static_cast<int>(k) + 1});
    }
    out.path.values[k + 1] = b[k + 1] - running_min;
  }
  return out;
}

std::vector<Excursion> excursions(const ReflectedPath& x) {
  const TimeGrid& grid = x.path.grid;
  const int last_index = static_cast<int>(x.path.values.size()) - 1;
  std::vector<Excursion> out;
  int pos = 0;
  bool has_left = false;
  double left_time = grid.t0;
  auto emit = [&](int first, int last, double right_time, bool complete) {
    Excursion e;
    e.first = first;
    e.last = last;
    e.left_time = left_time;
    e.right_time = right_time;
    e.complete = complete;
    e.has_left_zero = has_left;
    if (has_left) e.label = dyadic_label(left_time, right_time);
    out.push_back(e);
  };
  for (const ZeroBracket& br : x.zeros) {
    const bool point = br.first == br.last;
    const double zero_time =
        point ? grid.time(br.first) : 0.5 * (grid.time(br.first) + grid.time(br.last));
    const int run_end = point ? br.first - 1 : br.first;
    if (run_end >= pos) emit(pos, run_end, zero_time, true);
    has_left = true;
    left_time = zero_time;
    pos = std::max(pos, point ? br.first + 1 : br.last);
  }
  if (pos <= last_index) emit(pos, last_index, grid.end_time(), false);
  return out;
}

namespace {

int excursion_ray(const RngStream& stream, const DyadicLabel& label, const GraphSpec& spec) {
  RngStream s = stream.child({purpose::kExcursionRay, static_cast<std::uint64_t>(label.numerator),
                              static_cast<std::uint64_t>(label.exponent)});
  return s.categorical(spec.alphas()) + 1;
}

}  // namespace

WalshPath wbm_flip_construct(const ReflectedPath& reflected, const GraphSpec& spec,
                             RngStream stream, int start_ray) {
  const ScalarPath& x = reflected.path;
  WalshPath out{x.grid, std::vector<GraphPoint>(x.values.size(), GraphPoint::origin(spec.n_rays())),
                x, std::nullopt};
  for (const Excursion& e : excursions(reflected)) {
    int ray = start_ray;
    if (e.has_left_zero) {
      ray = excursion_ray(stream, e.label, spec);
    } else if (ray < 1 || ray > spec.n_rays()) {
      fail(ErrorCode::InvalidArgument, "path starts off the junction without a start ray");
    }
    for (int k = e.first; k <= e.last; ++k) out.points[k] = GraphPoint::make(ray, x.values[k], spec.n_rays());
  }
  return out;
}

WalshPath wbm_flip_construct(const ScalarPath& reflected, const GraphSpec& spec, RngStream stream,
                             int start_ray) {
  return wbm_flip_construct(with_exact_zeros(reflected), spec, std::move(stream), start_ray);
}

WalshPath sample_walsh_path(const GraphPoint& start, const TimeGrid& grid, const GraphSpec& spec,
                            RngStream stream) {
  ScalarPath b = sample_brownian(grid, stream.child({purpose::kBrownian}), 0.0);
  Reflection r = skorokhod_reflection(start.radius, b);
  WalshPath z = wbm_flip_construct(r.path, spec, stream, start.is_origin() ? 0 : start.ray);
  z.brownian = std::move(b);
  return z;
}

std::vector<Transition> WalkMatrix::row(const LatticePoint& from) const {
  if (from.level < 0) fail(ErrorCode::InvalidArgument, "negative lattice level");
  std::vector<Transition> out;
  if (from.level == 0) {
    for (int i = 1; i <= spec_.n_rays(); ++i) out.push_back({{i, 1}, spec_.alpha(i)});
    return out;
  }
  const int n = spec_.n_rays();
  if (from.ray < 1 || from.ray > n) fail(ErrorCode::InvalidArgument, "ray outside the graph");
  const LatticePoint down = from.level == 1 ? LatticePoint{n, 0} : LatticePoint{from.ray, from.level - 1};
  out.push_back({down, 0.5});
  out.push_back({{from.ray, from.level + 1}, 0.5});
  return out;
}

WalkMatrix walk_matrix(const GraphSpec& spec) { return WalkMatrix(spec); }

std::vector<GraphPoint> scaled_walk_marginal(const GraphSpec& spec, int n, double t, int replicas,
                                             const RngStream& stream) {
  if (n < 1 || n > 15) fail(ErrorCode::InvalidArgument, "scale level must be in [1, 15]");
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "time must be nonnegative");
  const auto steps = static_cast<std::int64_t>(std::floor(std::ldexp(t, 2 * n)));
  const double scale = std::ldexp(1.0, -n);
  std::vector<GraphPoint> out;
  out.reserve(replicas);
  for (int r = 0; r < replicas; ++r) {
    RngStream s = stream.child({purpose::kWalk, static_cast<std::uint64_t>(r)});
    int ray = spec.n_rays();
    std::int64_t level = 0;
    std::uint64_t bits = 0;
    int bits_left = 0;
    for (std::int64_t k = 0; k < steps; ++k) {
      if (level == 0) {
        ray = s.categorical(spec.alphas()) + 1;
        level = 1;
        continue;
      }
      if (bits_left == 0) {
        bits = s.next_u64();
        bits_left = 64;
      }
      level += (bits & 1U) ? 1 : -1;
      bits >>= 1;
      --bits_left;
    }
    out.push_back(GraphPoint::make(ray, level * scale, spec.n_rays()));
  }
  return out;
}

double freidlin_sheu_residual(const PiecewiseFunction& f, const WalshPath& z, const GraphSpec& spec,
                              double eps_local) {
  if (!z.brownian) fail(ErrorCode::InvalidArgument, "Walsh path carries no driving Brownian path");
  const auto& b = z.brownian->values;
  const auto& x = z.driver.values;
  const int last = static_cast<int>(z.points.size()) - 1;
  if (static_cast<int>(b.size()) != last + 1) fail(ErrorCode::InvalidArgument, "driver length mismatch");
  const double dt = z.grid.dt;
  double ito = 0.0;
  double drift = 0.0;
  for (int k = 0; k < last; ++k) {
    ito += f.derivative(z.points[k]) * (b[k + 1] - b[k]);
    drift += f.second_derivative(z.points[k]);
  }
  drift *= 0.5 * dt;
  const double local_time = eps_local > 0.0 ? local_time_band(z.driver, eps_local, last)
                                            : x[last] - x[0] - b[last];
  return f(z.points[last]) - f(z.points[0]) - ito - drift - flux_defect(f, spec) * local_time;
}

void write_csv(std::ostream& out, const ScalarPath& path) {
  out << "time,value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k)
    out << format_number(path.grid.time(static_cast<int>(k))) << ',' << format_number(path.values[k]) << '\n';
}

void write_csv(std::ostream& out, const WalshPath& path) {
  out << "time,ray,radius\n";
  for (std::size_t k = 0; k < path.points.size(); ++k)
    out << format_number(path.grid.time(static_cast<int>(k))) << ',' << path.points[k].ray << ','
        << format_number(path.points[k].radius) << '\n';
}

}  // namespace walsh
