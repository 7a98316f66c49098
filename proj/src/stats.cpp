// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <string>

namespace walsh {

std::string TestReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["statistic"] = statistic;
  j["threshold"] = threshold;
  j["replicas"] = replicas;
  j["pass"] = pass;
  nlohmann::ordered_json d = nlohmann::ordered_json::object();
  for (const auto& [key, value] : details) {
    if (std::isfinite(value)) d[key] = value;
    else d[key] = nullptr;
  }
  j["details"] = d;
  return j.dump();
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) fail(ErrorCode::Empty, "empirical CDF of no samples");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

EmpiricalCdf empirical_cdf(std::vector<double> samples) { return EmpiricalCdf(std::move(samples)); }

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_statistic(std::vector<double> samples, const Cdf& reference) {
  if (samples.empty()) fail(ErrorCode::Empty, "KS test of no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = reference(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d)};
}

ChiSquareResult chi_square_rays(const std::vector<long long>& counts,
                                const std::vector<double>& expected) {
  if (counts.size() != expected.size() || counts.empty())
    fail(ErrorCode::InvalidArgument, "counts and expected probabilities differ in length");
  for (double e : expected) {
    if (!(e > 0.0)) fail(ErrorCode::ZeroExpected, "expected probability must be positive");
  }
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0LL));
  if (!(total > 0.0)) fail(ErrorCode::InsufficientSamples, "no counts");
  const double norm = std::accumulate(expected.begin(), expected.end(), 0.0);
  ChiSquareResult out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = total * expected[i] / norm;
    const double diff = static_cast<double>(counts[i]) - e;
    out.statistic += diff * diff / e;
  }
  out.dof = static_cast<int>(counts.size()) - 1;
  if (out.dof == 0) {
    out.p_value = 1.0;
    return out;
  }
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

PowerLawFit powerlaw_fit_coalescence(std::vector<double> levels, double y) {
  if (levels.size() < 1000) fail(ErrorCode::InsufficientSamples, "need at least 1000 merge levels");
  if (!(y > 0.0)) fail(ErrorCode::InvalidArgument, "start gap must be positive");
  std::sort(levels.begin(), levels.end());
  const double n = static_cast<double>(levels.size());
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double u = levels[i];
    if (!std::isfinite(u) || !(u > y)) continue;
    // evaluate the step CDF at the last copy of a tied value
    if (i + 1 < levels.size() && levels[i + 1] == u) continue;
    const double f = (i + 1) / n;
    if (f < 0.1 || f > 0.9) continue;
    xs.push_back(std::log1p(-y / u));
    ys.push_back(std::log(f));
  }
  if (xs.size() < 3) fail(ErrorCode::InsufficientSamples, "fewer than 3 points in the fit band");
  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(ErrorCode::InsufficientSamples, "degenerate fit band");
  PowerLawFit fit;
  fit.lambda = sxy / sxx;
  fit.r_squared = sxy * sxy / (sxx * syy);
  fit.points = static_cast<int>(xs.size());
  return fit;
}

MeanTest mean_z_test(const std::vector<double>& values, double reference) {
  if (values.size() < 2) fail(ErrorCode::InsufficientSamples, "need at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  MeanTest out;
  out.mean = mean;
  out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  double diff = mean - reference;
  // summation rounding of a constant sample is not a deviation
  if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(reference))) diff = 0.0;
  if (out.standard_error > 0.0) out.z = diff / out.standard_error;
  else out.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return out;
}

double folded_gaussian_cdf(double r, double t) {
  if (r <= 0.0) return 0.0;
  return std::erf(r / std::sqrt(2.0 * t));
}

TestReport marginal_vs_semigroup(const std::vector<GraphPoint>& samples,
                                 const std::vector<PiecewiseFunction>& fs, const GraphSpec& spec,
                                 double t, const MarginalCheckConfig& cfg,
                                 const QuadratureConfig& quad) {
  TestReport report;
  report.name = "marginal_vs_semigroup";
  report.replicas = static_cast<long long>(samples.size());
  report.threshold = cfg.p_floor;
  bool pass = true;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& x : samples) values.push_back(fs[i](x));
    const double exact = wbm_semigroup_apply(fs[i], GraphPoint::origin(spec.n_rays()), t, spec, quad);
    const MeanTest z = mean_z_test(values, exact);
    report.details.emplace_back("f" + std::to_string(i) + "_mean", z.mean);
    report.details.emplace_back("f" + std::to_string(i) + "_exact", exact);
    report.details.emplace_back("f" + std::to_string(i) + "_z", z.z);
    worst_z = std::max(worst_z, std::abs(z.z));
    pass = pass && std::abs(z.z) <= cfg.z_bound;
  }
  std::vector<double> radii;
  radii.reserve(samples.size());
  std::vector<long long> counts(spec.n_rays(), 0);
  for (const auto& x : samples) {
    radii.push_back(x.radius);
    if (!x.is_origin()) ++counts[x.ray - 1];
  }
  const KsResult ks = ks_statistic(radii, [t](double r) { return folded_gaussian_cdf(r, t); });
  const ChiSquareResult chi =
      chi_square_rays(counts, std::vector<double>(spec.alphas().begin(), spec.alphas().end()));
  report.details.emplace_back("radius_ks_d", ks.d);
  report.details.emplace_back("radius_ks_p", ks.p_value);
  report.details.emplace_back("ray_chi2", chi.statistic);
  report.details.emplace_back("ray_chi2_p", chi.p_value);
  report.details.emplace_back("max_abs_z", worst_z);
  pass = pass && ks.p_value > cfg.p_floor && chi.p_value > cfg.p_floor;
  report.statistic = std::min(ks.p_value, chi.p_value);
  report.pass = pass;
  return report;
}

}  // namespace walsh
