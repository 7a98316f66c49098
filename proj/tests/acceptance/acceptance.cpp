// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "flows.hpp"
#include "semigroup.hpp"
#include "stats.hpp"

using namespace walsh;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::path(WALSHFLOW_WORK_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig base_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.out = work_dir(name).string();
  return cfg;
}

const TestReport* find_report(const RunResult& r, const std::string& name) {
  for (const auto& rep : r.reports) {
    if (rep.name == name) return &rep;
  }
  return nullptr;
}

double detail(const TestReport& r, const std::string& key) {
  for (const auto& [k, v] : r.details) {
    if (k == key) return v;
  }
  return std::nan("");
}

bool passed(const RunResult& r, const std::string& name) {
  const TestReport* rep = find_report(r, name);
  return rep != nullptr && rep->pass;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<GraphSpec>& three_graphs() {
  static const std::vector<GraphSpec> specs{
      GraphSpec::create({0.6, 0.4}, {1, -1}), GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1}),
      GraphSpec::create({0.1, 0.2, 0.3, 0.25, 0.15}, {1, 1, -1, -1, -1})};
  return specs;
}

RayFunction constant_one() {
  return {[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Verdict conservation_and_positivity() {
  double worst = 0.0;
  double min_value = 1.0;
  for (const auto& spec : three_graphs()) {
    const int n = spec.n_rays();
    const auto one = PiecewiseFunction::uniform(constant_one(), n);
    const auto bounded = marginal_test_functions(spec);
    const std::vector<GraphPoint> xs{GraphPoint::origin(n), GraphPoint::make(1, 0.3, n), GraphPoint::make(n, 0.7, n),
                                     GraphPoint::make(1, 1.5, n), GraphPoint::make(std::max(1, n / 2), 3.0, n)};
    for (const auto& x : xs) {
      for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        worst = std::max(worst, std::abs(wbm_semigroup_apply(one, x, t, spec) - 1.0));
        min_value = std::min(min_value, wbm_semigroup_apply(bounded[0], x, t, spec));
      }
    }
  }
  return {worst <= 1e-8 && min_value >= 0.0,
          "max |P_t 1 - 1| = " + num(worst) + ", min P_t f = " + num(min_value) + " over N in {2,3,5}"};
}

Verdict semigroup_law() {
  const GraphSpec spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  const auto fns = marginal_test_functions(spec);
  double worst = 0.0;
  for (const auto& f : fns) {
    for (double s : {0.25, 1.0}) {
      for (double t : {0.25, 1.0}) {
        for (const auto& x : {GraphPoint::origin(3), GraphPoint::make(1, 0.3, 3), GraphPoint::make(3, 0.7, 3)})
          worst = std::max(worst, semigroup_law_defect(f, x, s, t, spec));
      }
    }
  }
  return {fns.size() >= 3 && worst <= 1e-5,
          std::to_string(fns.size()) + " functions, max defect " + num(worst)};
}

Verdict generator_identity() {
  double worst = 0.0;
  std::size_t count = 0;
  bool all_in_domain = true;
  for (const auto& spec : three_graphs()) {
    const int n = spec.n_rays();
    const auto fns = domain_test_functions(spec);
    count = fns.empty() ? 0 : (count == 0 ? fns.size() : std::min(count, fns.size()));
    for (const auto& f : fns) {
      all_in_domain = all_in_domain && in_domain(f, spec);
      for (const auto& x : {GraphPoint::origin(n), GraphPoint::make(1, 0.3, n), GraphPoint::make(n, 0.7, n)})
        worst = std::max(worst, std::abs(generator_residual(f, x, 0.5, spec)));
    }
  }
  return {count >= 5 && all_in_domain && worst <= 1e-4,
          std::to_string(count) + " functions per graph, max residual " + num(worst)};
}

Verdict derivative_identity() {
  const GraphSpec spec = GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, -1});
  const int n = spec.n_rays();
  const PiecewiseFunction g = domain_test_functions(spec)[2];
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int ray = 1 + i % n;
    const double radius = 0.2 + 0.15 * i;
    const double t = i % 2 ? 0.5 : 1.0;
    const double analytic = semigroup_derivative(g, GraphPoint::make(ray, radius, n), t, spec);
    const double h = 1e-4;
    const double fd = (wbm_semigroup_apply(g, GraphPoint::make(ray, radius + h, n), t, spec) -
                       wbm_semigroup_apply(g, GraphPoint::make(ray, radius - h, n), t, spec)) /
                      (2.0 * h);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-3));
  }
  return {worst <= 1e-5, "20 points, max relative error " + num(worst)};
}

Verdict flip_construction() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = base_config("simulate");
  cfg.replicas = 100000;
  cfg.dt = 0.01;
  cfg.horizon = 1.0;
  cfg.seed = 5;
  const RunResult main = run_experiment("simulate-wbm", cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const TestReport* rep = find_report(main, "marginal_vs_semigroup");
  int flakes = 0;
  const int seeds = 100;
  ExperimentConfig meta = base_config("simulate_meta");
  meta.replicas = 100000;
  meta.dt = 0.25;
  for (int s = 0; s < seeds; ++s) {
    meta.seed = 1000 + s;
    flakes += passed(run_experiment("simulate-wbm", meta), "marginal_vs_semigroup") ? 0 : 1;
  }
  const bool ok = rep != nullptr && rep->pass && flakes < 5 && seconds < 120.0;
  std::string d = "runtime " + num(seconds) + " s, meta failures " + std::to_string(flakes) + "/100";
  if (rep) {
    d += ", ray p = " + num(detail(*rep, "ray_chi2_p")) + ", radius p = " + num(detail(*rep, "radius_ks_p")) +
         ", max |z| = " + num(detail(*rep, "max_abs_z"));
  }
  return {ok, d};
}

Verdict walk_convergence() {
  ExperimentConfig cfg = base_config("walk");
  cfg.replicas = 100000;
  cfg.level = 5;
  cfg.seed = 6;
  const RunResult r = run_experiment("walk-converge", cfg);
  const TestReport* rep = find_report(r, "walk_ks_monotone");
  if (!rep) return {false, "no report: " + r.error};
  std::string d = "KS distance";
  for (int n = 2; n <= 5; ++n) d += " " + num(detail(*rep, "d_n" + std::to_string(n)));
  d += ", worst ratio " + num(rep->statistic);
  return {rep->pass && passed(r, "walk_rays"), d};
}

Verdict freidlin_sheu() {
  ExperimentConfig cfg = base_config("freidlin_sheu");
  cfg.replicas = 200;
  cfg.dt = 1e-4;
  cfg.horizon = 1.0;
  cfg.seed = 7;
  const RunResult r = run_experiment("verify-freidlin-sheu", cfg);
  bool ok = r.exit_code != 2;
  bool outside_domain = false;
  std::string d;
  for (int f = 0; f < 3; ++f) {
    const TestReport* rate = find_report(r, "fs_rate_f" + std::to_string(f));
    const TestReport* rms = find_report(r, "fs_rms_f" + std::to_string(f));
    if (!rate || !rms) return {false, "missing reports: " + r.error};
    ok = ok && rate->pass && rms->pass;
    outside_domain = outside_domain || std::abs(detail(*rate, "flux")) > 1e-9;
    d += (f ? "; " : "") + std::string("f") + std::to_string(f) + " ratios " + num(detail(*rate, "ratio_fine")) +
         "/" + num(detail(*rate, "ratio_coarse")) + " rms " + num(rms->statistic);
  }
  return {ok && outside_domain, d};
}

Verdict local_time() {
  ExperimentConfig cfg = base_config("local_time");
  cfg.replicas = 100;
  cfg.dt = 1e-4;
  cfg.horizon = 1.0;
  cfg.seed = 8;
  const RunResult r = run_experiment("verify-freidlin-sheu", cfg);
  const TestReport* rep = find_report(r, "local_time_band");
  if (!rep) return {false, "no report: " + r.error};
  return {rep->pass, "mean error " + num(detail(*rep, "eps_0.2")) + " / " + num(detail(*rep, "eps_0.1")) + " / " +
                         num(detail(*rep, "eps_0.05")) + ", worst ratio " + num(rep->statistic)};
}

Verdict flow_invariant_suite() {
  const std::vector<GraphSpec> specs{
      GraphSpec::create({0.5, 0.5}, {1, -1}),           GraphSpec::create({0.7, 0.3}, {1, -1}),
      GraphSpec::create({0.6, 0.4}, {1, 1}),            GraphSpec::create({0.3, 0.2, 0.5}, {1, 1, -1}),
      GraphSpec::create({0.4, 0.3, 0.3}, {1, 1, -1}),   GraphSpec::create({0.5, 0.3, 0.2}, {1, 1, 1})};
  FlowInvariantCounts total;
  long long ensembles = 0;
  for (std::size_t g = 0; g < specs.size(); ++g) {
    const auto cfg = standard_flow_starts(specs[g], 4, 1.0);
    for (auto kind : {MeasureKind::Wiener, MeasureKind::DiracVertices}) {
      const auto m = MeasurePairSampler::create(specs[g], kind);
      const RngStream root(9, {g, static_cast<std::uint64_t>(kind)});
      for (int r = 0; r < 1000; ++r) {
        total += flow_invariants(cfg, specs[g], m, root.child({purpose::kReplica, static_cast<std::uint64_t>(r)}));
        ++ensembles;
      }
    }
  }
  return {total.pairs > 0 && total.violations() == 0,
          std::to_string(ensembles) + " ensembles, " + std::to_string(total.pairs) + " pairs, violations: monotone " +
              std::to_string(total.monotone) + ", permanence " + std::to_string(total.permanence) + ", off zero " +
              std::to_string(total.merge_off_zero) + ", kernel after merge " +
              std::to_string(total.merge_before_hitting) + ", flow property " + std::to_string(total.flow_property)};
}

Verdict coalescence_law() {
  ExperimentConfig cfg = base_config("coalescence");
  cfg.alpha = {0.5, 0.2, 0.3};
  cfg.eps = {1, 1, -1};
  cfg.replicas = 10;
  cfg.merges = 10000;
  cfg.merge_level = 8;
  cfg.seed = 10;
  const RunResult r = run_experiment("flow-experiment", cfg);
  const TestReport* rep = find_report(r, "coalescence_powerlaw");
  if (!rep) return {false, "no report: " + r.error};
  return {rep->pass, "R^2 = " + num(rep->statistic) + " (need 0.98), lambda_hat = " +
                         num(detail(*rep, "lambda_hat")) + ", censored " + num(detail(*rep, "censored")) +
                         " of 10000"};
}

Verdict kernel_structure() {
  const GraphSpec spec = GraphSpec::create({0.3, 0.2, 0.5}, {1, 1, -1});
  const auto cfg = standard_flow_starts(spec, 4, 1.0);
  MeasureOptions at_ratio;
  for (int i = 1; i <= spec.n_rays(); ++i)
    (spec.is_plus_ray(i) ? at_ratio.custom_plus : at_ratio.custom_minus).push_back(spec.conditional_weight(i));
  const auto custom = MeasurePairSampler::create(spec, MeasureKind::Custom, at_ratio);
  const auto vertices = MeasurePairSampler::create(spec, MeasureKind::DiracVertices);
  long long kernels = 0;
  long long wiener_mismatch = 0;
  long long non_dirac = 0;
  const RngStream root(11);
  for (int r = 0; r < 300; ++r) {
    const RngStream s = root.child({purpose::kReplica, static_cast<std::uint64_t>(r)});
    const FlowEnsemble a = sample_kernel_flow(cfg, spec, custom, s);
    const FlowEnsemble b = sample_kernel_flow(cfg, spec, vertices, s);
    for (int q = 0; q < a.n_starts(); ++q) {
      for (int k = cfg.starts[q].time_index; k <= a.scalar().steps(); ++k) {
        ++kernels;
        wiener_mismatch += a.kernel(q, k) == wiener_kernel(a.scalar(), q, k, spec) ? 0 : 1;
        non_dirac += b.kernel(q, k).atoms.size() == 1 ? 0 : 1;
      }
    }
  }
  ExperimentConfig wiener = base_config("kernel_wiener");
  wiener.seed = 11;
  const RunResult w = run_experiment("kernel-experiment", wiener);
  ExperimentConfig dv = base_config("kernel_dirac");
  dv.measure = "dirac-vertices";
  dv.seed = 11;
  const RunResult d = run_experiment("kernel-experiment", dv);
  return {wiener_mismatch == 0 && non_dirac == 0 && passed(w, "kernel_structure") && passed(d, "kernel_structure"),
          std::to_string(kernels) + " kernels per measure, K^W mismatches " + std::to_string(wiener_mismatch) +
              ", non-Dirac vertex kernels " + std::to_string(non_dirac)};
}

Verdict moment_conditions() {
  std::string d;
  bool ok = true;
  for (const char* kind : {"dirichlet", "dirac-vertices"}) {
    ExperimentConfig cfg = base_config(std::string("moments_") + kind);
    cfg.measure = kind;
    cfg.concentration = 2.0;
    cfg.horizon = 4.0;
    cfg.replicas = 2000;
    cfg.seed = 12;
    const RunResult r = run_experiment("kernel-experiment", cfg);
    const TestReport* marks = find_report(r, "excursion_marks_mean");
    const TestReport* proj = find_report(r, "project_kernel_to_wiener");
    if (!marks || !proj) return {false, std::string(kind) + ": missing reports: " + r.error};
    ok = ok && marks->pass && marks->replicas >= 100000 && proj->pass && passed(r, "measure_moments");
    d += std::string(kind) + " " + std::to_string(marks->replicas) + " excursions |z| " + num(marks->statistic) +
         ", projection |z| " + num(detail(*proj, "max_abs_z")) + "; ";
  }
  ExperimentConfig biased = base_config("moments_biased");
  biased.measure = "custom-weights";
  biased.custom_plus = {0.9, 0.1};
  biased.custom_minus = {1.0};
  biased.allow_biased = true;
  biased.horizon = 4.0;
  biased.replicas = 1000;
  biased.seed = 12;
  const RunResult b = run_experiment("kernel-experiment", biased);
  const TestReport* marks = find_report(b, "excursion_marks_mean");
  const bool control_fails = b.exit_code == 1 && marks != nullptr && !marks->pass;
  d += "biased control " + std::string(control_fails ? "rejected" : "NOT rejected");
  if (marks) d += " (|z| " + num(marks->statistic) + ")";
  return {ok && control_fails, d};
}

Verdict filtering() {
  const GraphSpec spec = GraphSpec::create({0.3, 0.2, 0.5}, {1, 1, -1});
  const auto m = MeasurePairSampler::create(spec, MeasureKind::Dirichlet);
  const TestReport r = filter_mapping_to_kernel(standard_flow_starts(spec, 4, 1.0), spec, m, 10000, RngStream(13));
  return {r.pass, "10000 replicas, max |z| " + num(detail(r, "max_abs_z"))};
}

Verdict special_cases() {
  ExperimentConfig cfg = base_config("tanaka");
  cfg.alpha = {0.7, 0.3};
  cfg.eps = {1, -1};
  cfg.replicas = 10000;
  cfg.seed = 14;
  const RunResult r = run_experiment("tanaka-special-case", cfg);
  const TestReport* sign = find_report(r, "skew_sign_law");
  if (!sign) return {false, "no report: " + r.error};
  return {passed(r, "tanaka_weights") && passed(r, "skew_embedding") && sign->pass,
          "Tanaka mismatches " + num(find_report(r, "tanaka_weights")->statistic) + ", sign law |z| " +
              num(sign->statistic)};
}

Verdict determinism() {
  const fs::path dir = work_dir("determinism");
  ExperimentConfig cfg;
  cfg.replicas = 200;
  cfg.seed = 15;
  cfg.out = (dir / "unused").string();
  std::ofstream(dir / "flow.ini") << cfg.serialize();
  auto run = [&](int workers) {
    const fs::path out = dir / ("w" + std::to_string(workers));
    const std::string cmd = std::string("\"") + WALSHFLOW_CLI_PATH + "\" flow-experiment --config \"" +
                            (dir / "flow.ini").string() + "\" --workers " + std::to_string(workers) + " --out \"" +
                            out.string() + "\" --quiet";
    const int rc = std::system(cmd.c_str());
    return std::make_pair(rc, slurp(out / "flow-experiment.csv"));
  };
  const auto serial = run(1);
  const auto parallel = run(8);
  const bool ok = serial.first == 0 && parallel.first == 0 && !serial.second.empty() &&
                  serial.second == parallel.second;
  return {ok, std::to_string(serial.second.size()) + " bytes, " +
                  (serial.second == parallel.second ? "identical" : "different")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
    double budget_seconds;  // 0: no runtime bound
  };
  const std::vector<Criterion> criteria{
      {"semigroup conservation and positivity", conservation_and_positivity, 10.0},
      {"semigroup law", semigroup_law, 60.0},
      {"generator identity", generator_identity, 0.0},
      {"derivative identity", derivative_identity, 0.0},
      {"excursion flip construction vs semigroup", flip_construction, 0.0},
      {"random walk convergence", walk_convergence, 0.0},
      {"Freidlin-Sheu expansion", freidlin_sheu, 0.0},
      {"local time band estimator", local_time, 0.0},
      {"lattice flow invariants", flow_invariant_suite, 0.0},
      {"coalescence law form", coalescence_law, 0.0},
      {"kernel flow structure", kernel_structure, 0.0},
      {"moment conditions", moment_conditions, 0.0},
      {"filtering", filtering, 0.0},
      {"special cases", special_cases, 0.0},
      {"determinism", determinism, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0.0 && seconds >= criteria[i].budget_seconds) {
      v.pass = false;
      v.detail += ", over the " + num(criteria[i].budget_seconds) + " s budget";
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].name << ": " << v.detail
              << " [" << num(seconds) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
