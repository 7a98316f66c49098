// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "pathkit.hpp"
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

ScalarPath path_of(std::vector<double> values, double dt = 1.0) {
  return {TimeGrid::make(0.0, dt, static_cast<int>(values.size()) - 1), std::move(values)};
}

RayFunction constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

RayFunction identity() {
  return {[](double h) { return h; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

}  // namespace

TEST_CASE("time grid") {
  const auto g = TimeGrid::make(1.0, 0.25, 4);
  CHECK(g.size() == 5);
  CHECK(g.end_time() == 2.0);
  CHECK(code_of([] { TimeGrid::make(0.0, 0.0, 3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { TimeGrid::make(0.0, 0.1, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("reflection examples") {
  CHECK(reflect_path(path_of({0.0, -1.0, -0.5})).values == std::vector<double>{0.0, 0.0, 0.5});
  CHECK(reflect_path(path_of({0.0, 1.0, 2.0})).values == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(reflect_path(path_of({0.0, 2.0, -1.0})).values == std::vector<double>{0.0, 2.0, 0.0});
}

TEST_CASE("skorokhod reflection from a positive start") {
  const auto r = skorokhod_reflection(1.0, path_of({0.0, -2.0, -1.5, 1.0}));
  CHECK(r.path.values == std::vector<double>{1.0, 0.0, 0.5, 3.0});
  CHECK(r.local_time.values == std::vector<double>{0.0, 1.0, 1.0, 1.0});
  CHECK(code_of([] { skorokhod_reflection(-1.0, path_of({0.0, 1.0})); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { skorokhod_reflection(1.0, path_of({0.5, 1.0})); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("skorokhod reflection properties") {
  testing::Gen gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = sample_brownian(TimeGrid::make(0.0, 0.01, 200), gen.stream().child({static_cast<std::uint64_t>(trial)}));
    const double x0 = gen.uniform(0.0, 1.0);
    const auto r = skorokhod_reflection(x0, b);
    for (std::size_t k = 0; k < b.values.size(); ++k) {
      CHECK(r.path.values[k] >= 0.0);
      CHECK(r.path.values[k] == doctest::Approx(x0 + b.values[k] + r.local_time.values[k]));
      if (k > 0) {
        CHECK(r.local_time.values[k] >= r.local_time.values[k - 1]);
        // the local time grows only when the path sits at 0
        if (r.local_time.values[k] > r.local_time.values[k - 1]) CHECK(r.path.values[k] == 0.0);
      }
    }
  }
}

TEST_CASE("local time band examples") {
  const auto at_zero = path_of(std::vector<double>(11, 0.0), 0.1);
  CHECK(local_time_band(at_zero, 0.1, 10) == doctest::Approx(5.0));
  const auto away = path_of(std::vector<double>(11, 1.0), 0.1);
  CHECK(local_time_band(away, 0.1, 10) == 0.0);
  CHECK(code_of([&] { local_time_band(away, 0.0, 10); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("dyadic label examples") {
  CHECK(dyadic_label(0.3, 0.8) == DyadicLabel{1, 1});
  CHECK(dyadic_label(1.1, 3.2) == DyadicLabel{2, 0});
  CHECK(dyadic_label(0.26, 0.49) == DyadicLabel{3, 3});
  CHECK(dyadic_label(0.26, 0.49).value() == 0.375);
  CHECK(code_of([] { dyadic_label(0.5, 0.5); }) == ErrorCode::EmptyInterval);
}

TEST_CASE("dyadic label is the coarsest dyadic in the interval") {
  testing::Gen gen(42);
  for (int trial = 0; trial < 10000; ++trial) {
    const double u = gen.uniform(0.0, 4.0);
    const double v = u + std::pow(10.0, gen.uniform(-6.0, 0.5));
    const DyadicLabel label = dyadic_label(u, v);
    CHECK(label.value() > u);
    CHECK(label.value() < v);
    // no dyadic of a coarser exponent lies in (u, v)
    for (int n = 0; n < label.exponent; ++n) {
      const double k = std::floor(std::ldexp(u, n)) + 1.0;
      CHECK(std::ldexp(k, -n) >= v);
    }
    // the smallest of its exponent
    CHECK(std::ldexp(static_cast<double>(label.numerator - 1), -label.exponent) <= u);
  }
}

TEST_CASE("excursion interval examples") {
  const auto x = path_of({0.0, 1.0, 2.0, 1.0, 0.0, 3.0});
  const auto e = excursion_interval(x, 2);
  CHECK(e.g == 0);
  CHECK(e.d == 4);
  const auto open = excursion_interval(x, 5);
  CHECK(open.g == 4);
  CHECK(open.d == kOpenEnd);
  CHECK(code_of([&] { excursion_interval(x, 4); }) == ErrorCode::NotInExcursion);
  CHECK(code_of([] { excursion_interval(path_of({1.0, 2.0, 1.0}), 1); }) == ErrorCode::NotInExcursion);
}

TEST_CASE("excursions of a path with exact zeros") {
  const auto x = with_exact_zeros(path_of({0.0, 1.0, 2.0, 1.0, 0.0, 3.0}));
  const auto es = excursions(x);
  REQUIRE(es.size() == 2);
  CHECK(es[0].first == 1);
  CHECK(es[0].last == 3);
  CHECK(es[0].complete);
  CHECK(es[0].label == dyadic_label(0.0, 4.0));
  CHECK(es[1].first == 5);
  CHECK_FALSE(es[1].complete);
}

TEST_CASE("flip construction keeps one ray per excursion") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  RngStream root(43);
  std::vector<long long> counts(3, 0);
  for (int r = 0; r < 300; ++r) {
    const RngStream s = root.child({static_cast<std::uint64_t>(r)});
    const auto b = sample_brownian(TimeGrid::make(0.0, 0.01, 200), s.child({purpose::kBrownian}));
    const auto refl = reflect_path_bridge(b, s.child({purpose::kBridge}));
    const auto z = wbm_flip_construct(refl, spec, s);
    for (const auto& e : excursions(refl)) {
      const int ray = z.points[e.first].ray;
      for (int k = e.first; k <= e.last; ++k) {
        CHECK(z.points[k].ray == ray);
        CHECK(z.points[k].radius == refl.path.values[k]);
      }
      ++counts[ray - 1];
    }
  }
  const auto chi = chi_square_rays(counts, {0.5, 0.3, 0.2});
  CHECK(chi.p_value > 0.001);
}

TEST_CASE("bridge reflection starts at zero and stays nonnegative") {
  const auto b = sample_brownian(TimeGrid::make(0.0, 0.1, 100), RngStream(44));
  const auto refl = reflect_path_bridge(b, RngStream(45));
  CHECK(refl.path.values.front() == 0.0);
  for (double v : refl.path.values) CHECK(v >= 0.0);
  for (std::size_t i = 1; i < refl.zeros.size(); ++i) CHECK(refl.zeros[i].first >= refl.zeros[i - 1].last);
}

TEST_CASE("walsh path from a point off the junction keeps its ray until the first zero") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  const auto z = sample_walsh_path({2, 1.0}, TimeGrid::make(0.0, 0.001, 2000), spec, RngStream(46));
  CHECK(z.points.front() == GraphPoint{2, 1.0});
  for (std::size_t k = 0; k < z.points.size() && !z.points[k].is_origin(); ++k) CHECK(z.points[k].ray == 2);
  REQUIRE(z.brownian.has_value());
}

TEST_CASE("walk matrix rows") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  const auto w = walk_matrix(spec);
  const auto origin_row = w.row({3, 0});
  REQUIRE(origin_row.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(origin_row[i].to == LatticePoint{i + 1, 1});
    CHECK(origin_row[i].probability == spec.alpha(i + 1));
  }
  const auto inner = w.row({2, 1});
  REQUIRE(inner.size() == 2);
  CHECK(inner[0].to == LatticePoint{3, 0});
  CHECK(inner[1].to == LatticePoint{2, 2});
  const auto far = w.row({1, 5});
  CHECK(far[0].to == LatticePoint{1, 4});
  CHECK(far[0].probability + far[1].probability == 1.0);
  CHECK(code_of([&] { w.row({4, 2}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scaled walk lands on the lattice") {
  const auto spec = GraphSpec::create({0.6, 0.4}, {1, -1});
  const auto xs = scaled_walk_marginal(spec, 3, 1.0, 500, RngStream(47));
  REQUIRE(xs.size() == 500);
  for (const auto& x : xs) {
    const double scaled = x.radius * 8.0;
    CHECK(scaled == std::round(scaled));
    // 64 steps keep an even level
    CHECK(static_cast<long long>(scaled) % 2 == 0);
  }
  CHECK(code_of([&] { scaled_walk_marginal(spec, 0, 1.0, 1, RngStream(1)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("freidlin sheu residual of simple functions") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  const auto z = sample_walsh_path(GraphPoint::origin(3), TimeGrid::make(0.0, 0.001, 1000), spec, RngStream(48));
  CHECK(std::abs(freidlin_sheu_residual(PiecewiseFunction::uniform(constant(2.0), 3), z, spec)) <= 1e-12);
  // the radius satisfies the identity exactly with the discrete local time
  CHECK(std::abs(freidlin_sheu_residual(PiecewiseFunction::uniform(identity(), 3), z, spec)) <= 1e-10);
  WalshPath bare = z;
  bare.brownian.reset();
  CHECK(code_of([&] { freidlin_sheu_residual(PiecewiseFunction::uniform(identity(), 3), bare, spec); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("csv output of a walsh path") {
  const auto spec = GraphSpec::create({0.6, 0.4}, {1, -1});
  const auto z = sample_walsh_path(GraphPoint::origin(2), TimeGrid::make(0.0, 0.1, 5), spec, RngStream(49));
  std::ostringstream os;
  write_csv(os, z);
  int lines = 0;
  for (char c : os.str()) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 7);
}

TEST_CASE("ray-dependent junction slopes converge slower than the square-root rate") {
  const auto spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  auto linear = [](double c) {
    return RayFunction{[c](double h) { return c * h; }, [c](double) { return c; }, [](double) { return 0.0; }};
  };
  const PiecewiseFunction f({linear(1.0), linear(2.0), linear(-1.0)});
  const int fine = 4096;
  const RngStream root(50);
  double ss_fine = 0.0;
  double ss_coarse = 0.0;
  for (int p = 0; p < 200; ++p) {
    const RngStream s = root.child({static_cast<std::uint64_t>(p)});
    const auto b = sample_brownian(TimeGrid::make(0.0, 1.0 / fine, fine), s.child({purpose::kBrownian}));
    for (int sub : {1, 4}) {
      ScalarPath coarse{TimeGrid::make(0.0, static_cast<double>(sub) / fine, fine / sub),
                        std::vector<double>(fine / sub + 1)};
      for (int j = 0; j <= fine / sub; ++j) coarse.values[j] = b.values[j * sub];
      WalshPath z = wbm_flip_construct(skorokhod_reflection(0.0, coarse).path, spec, s);
      z.brownian = coarse;
      const double r = freidlin_sheu_residual(f, z, spec);
      (sub == 1 ? ss_fine : ss_coarse) += r * r;
    }
  }
  const double ratio = std::sqrt(ss_coarse / ss_fine);
  CHECK(ratio > 1.0);
  CHECK(ratio < 1.7);
}
