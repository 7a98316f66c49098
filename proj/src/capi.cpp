// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "walshflow/walshflow.h"

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "experiments.hpp"
#include "flows.hpp"
#include "pathkit.hpp"
#include "semigroup.hpp"
#include "stargraph.hpp"

struct wf_graph {
  walsh::GraphSpec spec;
};

struct wf_ensemble {
  walsh::FlowEnsemble ensemble;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_reports;

wf_status record(wf_status status, const std::string& what) {
  last_error = what;
  return status;
}

template <class F>
wf_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return WF_OK;
  } catch (const walsh::Error& e) {
    return record(static_cast<wf_status>(e.code()), e.what());
  } catch (const std::exception& e) {
    return record(WF_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(WF_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) walsh::fail(walsh::ErrorCode::InvalidArgument, what);
}

walsh::GraphPoint to_point(const wf_point& p, const walsh::GraphSpec& spec) {
  return walsh::GraphPoint::make(p.ray, p.radius, spec.n_rays());
}

wf_point from_point(const walsh::GraphPoint& p) { return {p.ray, p.radius}; }

walsh::PiecewiseFunction wrap(wf_ray_function f, void* user, int n_rays) {
  require(f != nullptr, "null function");
  std::vector<walsh::RayFunction> parts;
  for (int ray = 1; ray <= n_rays; ++ray) {
    parts.push_back({[f, user, ray](double h) { return f(ray, h, 0, user); },
                     [f, user, ray](double h) { return f(ray, h, 1, user); },
                     [f, user, ray](double h) { return f(ray, h, 2, user); }});
  }
  return walsh::PiecewiseFunction(std::move(parts));
}

}  // namespace

extern "C" {

WF_API const char* wf_status_name(wf_status status) {
  if (status == WF_OK) return "Ok";
  if (status == WF_ERR_INTERNAL) return "Internal";
  return walsh::to_string(static_cast<walsh::ErrorCode>(status));
}

WF_API const char* wf_last_error(void) { return last_error.c_str(); }

WF_API wf_status wf_graph_create(const double* alpha, const int* eps, int n_rays, wf_graph** out) {
  return guarded([&] {
    require(out != nullptr && alpha != nullptr && eps != nullptr, "null argument");
    require(n_rays > 0, "ray count must be positive");
    *out = nullptr;
    auto spec = walsh::GraphSpec::create(std::vector<double>(alpha, alpha + n_rays),
                                         std::vector<int>(eps, eps + n_rays));
    *out = new wf_graph{std::move(spec)};
  });
}

WF_API void wf_graph_destroy(wf_graph* graph) { delete graph; }

WF_API wf_status wf_graph_alpha_plus(const wf_graph* graph, double* out) {
  return guarded([&] {
    require(graph != nullptr && out != nullptr, "null argument");
    *out = graph->spec.alpha_plus();
  });
}

WF_API wf_status wf_graph_distance(const wf_graph* graph, wf_point x, wf_point y, double* out) {
  return guarded([&] {
    require(graph != nullptr && out != nullptr, "null argument");
    *out = walsh::distance(to_point(x, graph->spec), to_point(y, graph->spec));
  });
}

WF_API wf_status wf_semigroup_apply(const wf_graph* graph, wf_ray_function f, void* user, wf_point x,
                                    double t, double* out) {
  return guarded([&] {
    require(graph != nullptr && out != nullptr, "null argument");
    const auto fn = wrap(f, user, graph->spec.n_rays());
    *out = walsh::wbm_semigroup_apply(fn, to_point(x, graph->spec), t, graph->spec);
  });
}

WF_API wf_status wf_generator_residual(const wf_graph* graph, wf_ray_function f, void* user,
                                       wf_point x, double t, double* out) {
  return guarded([&] {
    require(graph != nullptr && out != nullptr, "null argument");
    const auto fn = wrap(f, user, graph->spec.n_rays());
    *out = walsh::generator_residual(fn, to_point(x, graph->spec), t, graph->spec);
  });
}

WF_API wf_status wf_dyadic_label(double u, double v, int64_t* numerator, int* exponent) {
  return guarded([&] {
    require(numerator != nullptr && exponent != nullptr, "null argument");
    const walsh::DyadicLabel label = walsh::dyadic_label(u, v);
    *numerator = label.numerator;
    *exponent = label.exponent;
  });
}

WF_API wf_status wf_flow_sample(const wf_graph* graph, int level, double horizon,
                                const double* start_times, const wf_point* start_points,
                                int n_starts, const char* measure, uint64_t seed,
                                wf_ensemble** out) {
  return guarded([&] {
    require(graph != nullptr && out != nullptr && measure != nullptr, "null argument");
    require(n_starts > 0 && start_times != nullptr && start_points != nullptr, "flow needs starts");
    *out = nullptr;
    walsh::LatticeFlowConfig cfg;
    cfg.level = level;
    cfg.horizon = horizon;
    for (int i = 0; i < n_starts; ++i) {
      cfg.starts.push_back(
          walsh::lattice_start(graph->spec, level, start_times[i], to_point(start_points[i], graph->spec)));
    }
    const auto m = walsh::MeasurePairSampler::create(graph->spec, walsh::parse_measure_kind(measure));
    *out = new wf_ensemble{walsh::sample_kernel_flow(cfg, graph->spec, m, walsh::RngStream(seed))};
  });
}

WF_API void wf_ensemble_destroy(wf_ensemble* ensemble) { delete ensemble; }

WF_API wf_status wf_ensemble_steps(const wf_ensemble* ensemble, int* out) {
  return guarded([&] {
    require(ensemble != nullptr && out != nullptr, "null argument");
    *out = ensemble->ensemble.scalar().steps();
  });
}

WF_API wf_status wf_ensemble_kernel(const wf_ensemble* ensemble, int start, int k, wf_point* points,
                                    double* weights, int capacity, int* count) {
  return guarded([&] {
    require(ensemble != nullptr && count != nullptr, "null argument");
    const auto& e = ensemble->ensemble;
    require(start >= 0 && start < e.n_starts(), "start index out of range");
    const walsh::KernelMeasure km = e.kernel(start, k);
    *count = static_cast<int>(km.atoms.size());
    require(capacity >= *count && points != nullptr && weights != nullptr, "output buffers too small");
    for (int i = 0; i < *count; ++i) {
      points[i] = from_point(km.atoms[i].point);
      weights[i] = km.atoms[i].weight;
    }
  });
}

WF_API wf_status wf_run_experiment(const char* subcommand, const char* config_path,
                                   const wf_run_options* options, int* exit_code) {
  return guarded([&] {
    require(subcommand != nullptr && config_path != nullptr && exit_code != nullptr, "null argument");
    last_reports.clear();
    walsh::ExperimentConfig cfg;
    try {
      cfg = walsh::ExperimentConfig::load(config_path);
    } catch (const walsh::Error& e) {
      *exit_code = walsh::exit_code_for(e.code());
      last_error = e.what();
      return;
    }
    if (options) {
      if (options->has_seed) cfg.seed = options->seed;
      if (options->replicas > 0) cfg.replicas = options->replicas;
      if (options->workers > 0) cfg.workers = options->workers;
      if (options->out_dir) cfg.out = options->out_dir;
    }
    const walsh::RunResult r = walsh::run_experiment(subcommand, cfg);
    *exit_code = r.exit_code;
    last_error = r.error;
    for (const auto& report : r.reports) last_reports += report.to_json_line() + "\n";
  });
}

WF_API const char* wf_last_run_reports(void) { return last_reports.c_str(); }

}  // extern "C"
