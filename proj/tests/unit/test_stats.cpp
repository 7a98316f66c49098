// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stats.hpp"
#include "support.hpp"

using namespace walsh;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::CheckFailed;
}

double brute_ks(std::vector<double> xs, const Cdf& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("empirical cdf example") {
  const auto f = empirical_cdf({3.0, 1.0, 2.0});
  CHECK(f(2.5) == doctest::Approx(2.0 / 3.0));
  CHECK(f(0.0) == 0.0);
  CHECK(f(3.0) == 1.0);
  CHECK(f(2.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ks statistic matches brute force") {
  const Cdf uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_statistic({0.1, 0.5, 0.9}, uniform).d == doctest::Approx(brute_ks({0.1, 0.5, 0.9}, uniform)));
  testing::Gen gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(gen.integer(1, 40));
    for (double& x : xs) x = gen.uniform(-0.2, 1.2);
    const auto r = ks_statistic(xs, uniform);
    CHECK(r.d == doctest::Approx(brute_ks(xs, uniform)).epsilon(1e-12));
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
  }
}

TEST_CASE("kolmogorov tail values") {
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(1.36) == doctest::Approx(0.0494).epsilon(2e-3));
  CHECK(kolmogorov_tail(1.0) == doctest::Approx(0.26999967).epsilon(1e-6));
}

TEST_CASE("ks on uniform draws is not rejected") {
  RngStream s(32);
  std::vector<double> xs(20000);
  for (double& x : xs) x = s.uniform();
  const auto r = ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(r.p_value > 0.001);
  CHECK(code_of([] { ks_statistic({}, [](double x) { return x; }); }) == ErrorCode::Empty);
}

TEST_CASE("chi square example") {
  const auto r = chi_square_rays({60, 40}, {0.5, 0.5});
  CHECK(r.statistic == doctest::Approx(4.0));
  CHECK(r.dof == 1);
  CHECK(r.p_value == doctest::Approx(0.0455003).epsilon(1e-5));
  CHECK(code_of([] { chi_square_rays({1, 2}, {0.5, 0.0}); }) == ErrorCode::ZeroExpected);
  CHECK(code_of([] { chi_square_rays({1, 2}, {1.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("power law fit recovers the exponent") {
  RngStream s(33);
  const double y = 1.0;
  const double lambda = 2.0;
  std::vector<double> levels(20000);
  // F(u) = (1 - y/u)^λ for u > y
  for (double& u : levels) u = y / (1.0 - std::pow(s.uniform(), 1.0 / lambda));
  const auto fit = powerlaw_fit_coalescence(levels, y);
  CHECK(fit.lambda == doctest::Approx(lambda).epsilon(0.03));
  CHECK(fit.r_squared >= 0.99);
  CHECK(fit.points >= 3);
  CHECK(code_of([&] { powerlaw_fit_coalescence({2.0, 3.0}, y); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("mean z test") {
  const auto r = mean_z_test({1.0, 2.0, 3.0}, 2.0);
  CHECK(r.mean == 2.0);
  CHECK(r.z == 0.0);
  CHECK(r.standard_error == doctest::Approx(std::sqrt(1.0 / 3.0)));
}

TEST_CASE("folded gaussian cdf") {
  CHECK(folded_gaussian_cdf(0.0, 1.0) == 0.0);
  CHECK(folded_gaussian_cdf(1.0, 1.0) == doctest::Approx(0.6826894921));
  CHECK(folded_gaussian_cdf(2.0, 4.0) == doctest::Approx(0.6826894921));
}

TEST_CASE("report json line") {
  TestReport r;
  r.name = "demo";
  r.statistic = 0.5;
  r.threshold = 1.0;
  r.replicas = 10;
  r.pass = true;
  r.details.push_back({"x", 2.0});
  const std::string line = r.to_json_line();
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.find("\"name\":\"demo\"") != std::string::npos);
  CHECK(line.find("\"pass\":true") != std::string::npos);
}
