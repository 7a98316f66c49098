/* Copyright 2026 The walshflow Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the walshflow library: star graphs, the Walsh semigroup,
 * lattice flows of kernels and the experiment runner. Every function returns
 * a wf_status; on failure wf_last_error() describes the most recent error on
 * the calling thread. */

#ifndef WALSHFLOW_WALSHFLOW_H_
#define WALSHFLOW_WALSHFLOW_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(WALSHFLOW_BUILDING)
#define WF_API __declspec(dllexport)
#else
#define WF_API __declspec(dllimport)
#endif
#else
#define WF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wf_status {
  WF_OK = 0,
  WF_ERR_NON_POSITIVE_WEIGHT = 10,
  WF_ERR_WEIGHTS_NOT_NORMALIZED = 11,
  WF_ERR_SIGNS_NOT_BLOCK_SORTED = 12,
  WF_ERR_WRONG_RAY_COUNT = 13,
  WF_ERR_INVALID_ARGUMENT = 14,
  WF_ERR_DERIVATIVE_UNAVAILABLE = 20,
  WF_ERR_NON_POSITIVE_TIME = 21,
  WF_ERR_QUADRATURE_DIVERGED = 22,
  WF_ERR_ORIGIN_NOT_DIFFERENTIABLE = 23,
  WF_ERR_NOT_IN_DOMAIN = 24,
  WF_ERR_EMPTY_INTERVAL = 30,
  WF_ERR_NOT_IN_EXCURSION = 31,
  WF_ERR_OFF_LATTICE_START = 40,
  WF_ERR_SAMPLER_INVALID = 41,
  WF_ERR_BEFORE_HITTING = 42,
  WF_ERR_MISSING_INTERMEDIATE_START = 43,
  WF_ERR_EMPTY = 50,
  WF_ERR_ZERO_EXPECTED = 51,
  WF_ERR_INSUFFICIENT_SAMPLES = 52,
  WF_ERR_CONFIG_INVALID = 60,
  WF_ERR_IO = 61,
  WF_ERR_CHECK_FAILED = 62,
  WF_ERR_INTERNAL = 99
} wf_status;

typedef struct wf_graph wf_graph;
typedef struct wf_ensemble wf_ensemble;

typedef struct wf_point {
  int ray;       /* 1..N; the junction is reported as (N, 0) */
  double radius; /* >= 0 */
} wf_point;

/* Ray component f_ray^(deriv)(h) for deriv in {0, 1, 2}. */
typedef double (*wf_ray_function)(int ray, double h, int deriv, void* user);

WF_API const char* wf_status_name(wf_status status);
/* Message of the last failure on this thread; empty when none. */
WF_API const char* wf_last_error(void);

WF_API wf_status wf_graph_create(const double* alpha, const int* eps, int n_rays, wf_graph** out);
WF_API void wf_graph_destroy(wf_graph* graph);
WF_API wf_status wf_graph_alpha_plus(const wf_graph* graph, double* out);
WF_API wf_status wf_graph_distance(const wf_graph* graph, wf_point x, wf_point y, double* out);

WF_API wf_status wf_semigroup_apply(const wf_graph* graph, wf_ray_function f, void* user, wf_point x,
                                    double t, double* out);
WF_API wf_status wf_generator_residual(const wf_graph* graph, wf_ray_function f, void* user,
                                       wf_point x, double t, double* out);

WF_API wf_status wf_dyadic_label(double u, double v, int64_t* numerator, int* exponent);

/* Kernel flow on the lattice of the given level. Starts are
 * (time, point) pairs on the lattice; measure names: wiener, dirac-vertices,
 * dirichlet, uniform-simplex. */
WF_API wf_status wf_flow_sample(const wf_graph* graph, int level, double horizon,
                                const double* start_times, const wf_point* start_points,
                                int n_starts, const char* measure, uint64_t seed,
                                wf_ensemble** out);
WF_API void wf_ensemble_destroy(wf_ensemble* ensemble);
WF_API wf_status wf_ensemble_steps(const wf_ensemble* ensemble, int* out);
/* Writes up to `capacity` atoms of K(start, time index k); `count` receives
 * the number of atoms. Fails with WF_ERR_INVALID_ARGUMENT when capacity is
 * too small. */
WF_API wf_status wf_ensemble_kernel(const wf_ensemble* ensemble, int start, int k, wf_point* points,
                                    double* weights, int capacity, int* count);

typedef struct wf_run_options {
  uint64_t seed;
  int has_seed;    /* nonzero: seed overrides the configuration */
  int replicas;    /* > 0 overrides the configuration */
  int workers;     /* > 0 overrides the configuration */
  const char* out_dir; /* non-null overrides the configuration */
} wf_run_options;

/* Runs a subcommand with the configuration file at config_path. exit_code
 * receives 0 (all checks pass), 1 (a check failed), 2 (bad configuration)
 * or 3 (output error). */
WF_API wf_status wf_run_experiment(const char* subcommand, const char* config_path,
                                   const wf_run_options* options, int* exit_code);
/* Report lines (one JSON object per line) of the last run on this thread. */
WF_API const char* wf_last_run_reports(void);

#ifdef __cplusplus
}
#endif

#endif /* WALSHFLOW_WALSHFLOW_H_ */
