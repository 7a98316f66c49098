// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stargraph.hpp"
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

RayFunction linear(double slope) {
  return {[slope](double h) { return slope * h; }, [slope](double) { return slope; },
          [](double) { return 0.0; }};
}

RayFunction square() {
  return {[](double h) { return h * h; }, [](double h) { return 2.0 * h; }, [](double) { return 2.0; }};
}

}  // namespace

TEST_CASE("graph spec derives p and alpha plus") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  CHECK(spec.n_rays() == 3);
  CHECK(spec.p() == 2);
  CHECK(spec.alpha_plus() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(spec.alpha_plus() + spec.alpha_minus() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spec.conditional_weight(1) == doctest::Approx(0.625));
  CHECK(spec.conditional_weight(3) == doctest::Approx(1.0));
}

TEST_CASE("single ray graph") {
  const auto spec = GraphSpec::create({1.0}, {1});
  CHECK(spec.p() == 1);
  CHECK(spec.alpha_plus() == 1.0);
  CHECK(spec.alpha_minus() == 0.0);
}

TEST_CASE("graph spec rejects bad input") {
  CHECK(code_of([] { GraphSpec::create({0.5, 0.6}, {1, -1}); }) == ErrorCode::WeightsNotNormalized);
  CHECK(code_of([] { GraphSpec::create({1.2, -0.2}, {1, -1}); }) == ErrorCode::NonPositiveWeight);
  CHECK(code_of([] { GraphSpec::create({0.5, 0.0, 0.5}, {1, 1, -1}); }) == ErrorCode::NonPositiveWeight);
  CHECK(code_of([] { GraphSpec::create({0.5, 0.5}, {-1, 1}); }) == ErrorCode::SignsNotBlockSorted);
  CHECK(code_of([] { GraphSpec::create({0.5, 0.5}, {1, 0}); }) == ErrorCode::SignsNotBlockSorted);
  CHECK(code_of([] { GraphSpec::create({}, {}); }) == ErrorCode::WrongRayCount);
  CHECK(code_of([] { GraphSpec::create({0.5, 0.5}, {1}); }) == ErrorCode::WrongRayCount);
}

TEST_CASE("origin is canonicalized to the last ray") {
  const auto x = GraphPoint::make(1, 0.0, 3);
  CHECK(x.ray == 3);
  CHECK(x.is_origin());
  CHECK(x == GraphPoint::origin(3));
  CHECK(code_of([] { GraphPoint::make(4, 1.0, 3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { GraphPoint::make(1, -1.0, 3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("distance examples") {
  CHECK(distance({1, 2.0}, {1, 3.0}) == 1.0);
  CHECK(distance({1, 2.0}, {2, 3.0}) == 5.0);
  CHECK(distance(GraphPoint::make(2, 0.0, 3), GraphPoint::origin(3)) == 0.0);
  CHECK(distance({2, 1.75}, GraphPoint::origin(3)) == 1.75);
}

TEST_CASE("distance is a metric") {
  testing::Gen gen(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto spec = gen.graph(1, 6);
    const auto x = gen.point(spec);
    const auto y = gen.point(spec);
    const auto z = gen.point(spec);
    CHECK(distance(x, y) == distance(y, x));
    CHECK(distance(x, x) == 0.0);
    CHECK(distance(x, y) >= 0.0);
    CHECK(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-12);
    CHECK(distance(x, GraphPoint::origin(spec.n_rays())) == x.radius);
  }
}

TEST_CASE("sign of a point follows its ray, origin uses the last ray") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  CHECK(sign_of({1, 1.0}, spec) == 1);
  CHECK(sign_of({3, 1.0}, spec) == -1);
  CHECK(sign_of(GraphPoint::origin(3), spec) == -1);
}

TEST_CASE("flux defect examples") {
  const auto three = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  CHECK(flux_defect(PiecewiseFunction::uniform(square(), 3), three) == 0.0);
  const auto even = GraphSpec::create({0.5, 0.5}, {1, -1});
  const PiecewiseFunction odd({linear(1.0), linear(-1.0)});
  CHECK(flux_defect(odd, even) == 0.0);
  CHECK(in_domain(odd, even));
  const auto skew = GraphSpec::create({0.7, 0.3}, {1, -1});
  CHECK(flux_defect(odd, skew) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_FALSE(in_domain(odd, skew));
}

TEST_CASE("flux defect is linear") {
  testing::Gen gen(12);
  for (int trial = 0; trial < 500; ++trial) {
    const auto spec = gen.graph(1, 6);
    std::vector<RayFunction> fs;
    std::vector<RayFunction> gs;
    for (int i = 0; i < spec.n_rays(); ++i) {
      fs.push_back(linear(gen.uniform(-3.0, 3.0)));
      gs.push_back(linear(gen.uniform(-3.0, 3.0)));
    }
    const PiecewiseFunction f(fs);
    const PiecewiseFunction g(gs);
    const double a = gen.uniform(-2.0, 2.0);
    const double b = gen.uniform(-2.0, 2.0);
    const double lhs = flux_defect(f.scaled(a) + g.scaled(b), spec);
    const double rhs = a * flux_defect(f, spec) + b * flux_defect(g, spec);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("missing derivative is reported") {
  const auto spec = GraphSpec::create({0.5, 0.5}, {1, -1});
  const PiecewiseFunction f({RayFunction{[](double h) { return h; }, nullptr, nullptr},
                             RayFunction{[](double h) { return h; }, nullptr, nullptr}});
  CHECK(code_of([&] { flux_defect(f, spec); }) == ErrorCode::DerivativeUnavailable);
}

TEST_CASE("piecewise evaluation uses the ray of the point and f_N at the origin") {
  const PiecewiseFunction f({linear(1.0), linear(2.0), linear(-3.0)});
  CHECK(f({2, 1.5}) == 3.0);
  CHECK(f.derivative({1, 0.5}) == 1.0);
  CHECK(f.derivative(GraphPoint::origin(3)) == -3.0);
  CHECK(f.junction_mismatch() == 0.0);
}

TEST_CASE("finite difference cross-check") {
  const ScalarFn fn = [](double h) { return std::sin(h); };
  CHECK(finite_difference(fn, 0.4) == doctest::Approx(std::cos(0.4)).epsilon(1e-9));
}

TEST_CASE("line embedding examples") {
  const auto spec = GraphSpec::create({0.6, 0.4}, {1, -1});
  CHECK(embed_line(1.5, spec) == GraphPoint{1, 1.5});
  CHECK(embed_line(0.0, spec) == GraphPoint::origin(2));
  CHECK(embed_line(-2.0, spec) == GraphPoint{2, 2.0});
  const auto three = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  CHECK(code_of([&] { embed_line(1.0, three); }) == ErrorCode::WrongRayCount);
}

TEST_CASE("line embedding and projection are inverse") {
  const auto spec = GraphSpec::create({0.3, 0.7}, {1, -1});
  testing::Gen gen(13);
  for (int trial = 0; trial < 5000; ++trial) {
    const double y = gen.uniform(-50.0, 50.0);
    CHECK(project_line(embed_line(y, spec), spec) == y);
    const auto x = gen.point(spec);
    CHECK(embed_line(project_line(x, spec), spec) == x);
  }
}
