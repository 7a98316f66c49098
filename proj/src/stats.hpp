// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Hypothesis tests and estimators used to turn distributional claims into
// pass/fail checks.

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "semigroup.hpp"
#include "stargraph.hpp"

namespace walsh {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;  // p-value or bound, depending on the test
  long long replicas = 0;
  bool pass = false;
  std::vector<std::pair<std::string, double>> details;

  /// One JSON object on a single line.
  std::string to_json_line() const;
};

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  double operator()(double x) const;
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

EmpiricalCdf empirical_cdf(std::vector<double> samples);

using Cdf = std::function<double(double)>;

struct KsResult {
  double d = 0.0;
  double p_value = 0.0;
};

/// Asymptotic Kolmogorov tail Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}.
double kolmogorov_tail(double lambda);

KsResult ks_statistic(std::vector<double> samples, const Cdf& reference);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 0.0;
  int dof = 0;
};

ChiSquareResult chi_square_rays(const std::vector<long long>& counts,
                                const std::vector<double>& expected);

struct PowerLawFit {
  double lambda = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Regress log F̂(u) on log(1 - y/u) over the F̂ ∈ [0.1, 0.9] band. Samples
/// may be +∞ for censored merges beyond the observation cap.
PowerLawFit powerlaw_fit_coalescence(std::vector<double> levels, double y);

/// Two-sided z-score of a sample mean against a reference value.
struct MeanTest {
  double mean = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
};
MeanTest mean_z_test(const std::vector<double>& values, double reference);

/// |N(0, t)| CDF.
double folded_gaussian_cdf(double r, double t);

struct MarginalCheckConfig {
  double z_bound = 3.0;
  double p_floor = 0.01;
};

/// Mean z-tests against the semigroup for each f, KS of the radius against
/// the folded Gaussian (start at the origin) and chi-square of ray counts
/// among samples off the junction.
TestReport marginal_vs_semigroup(const std::vector<GraphPoint>& samples,
                                 const std::vector<PiecewiseFunction>& fs,
                                 const GraphSpec& spec, double t,
                                 const MarginalCheckConfig& cfg = {},
                                 const QuadratureConfig& quad = {});

}  // namespace walsh
