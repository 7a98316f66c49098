// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment runner: INI configuration, the subcommands, tabular output and
// a replica worker pool whose results are ordered by replica index.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "flows.hpp"
#include "stargraph.hpp"
#include "stats.hpp"

namespace walsh {

struct ExperimentConfig {
  // [graph]
  std::vector<double> alpha{0.5, 0.3, 0.2};
  std::vector<int> eps{1, 1, -1};
  // [scheme]
  int level = 4;
  double dt = 1e-3;
  double horizon = 1.0;
  // [run]
  int replicas = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "walshflow_out";
  int merges = 0;
  int merge_level = 8;
  int export_stride = 8;
  // [measure]
  std::string measure = "wiener";
  double concentration = 1.0;
  std::vector<double> custom_plus;
  std::vector<double> custom_minus;
  bool allow_biased = false;

  /// Throws ConfigInvalid on unknown sections or keys and malformed values.
  static ExperimentConfig parse(const std::string& text);
  /// Throws ConfigInvalid when the file is missing or unreadable.
  static ExperimentConfig load(const std::string& path);
  std::string serialize() const;
  /// Checks every knob; throws ConfigInvalid.
  void validate() const;

  GraphSpec graph() const;
  MeasurePairSampler measure_pair() const;
  LatticeFlowConfig lattice() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_cell(const Cell& cell);
/// Throws InvalidArgument for ragged rows and Io when the file cannot be written.
void emit_csv(const Table& table, const std::string& path);
/// Comma-split rows of a file written by emit_csv, header included.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

inline constexpr const char* kSubcommands[] = {
    "verify-semigroup",     "simulate-wbm",      "walk-converge",       "verify-freidlin-sheu",
    "flow-experiment",      "kernel-experiment", "tanaka-special-case",
};

bool is_subcommand(const std::string& name);

struct RunResult {
  int exit_code = 0;
  std::vector<TestReport> reports;
  std::string csv_path;
  std::string reports_path;
  std::string error;  // message when exit_code is 2 or 3, or a run aborted
};

/// Runs one subcommand and writes <out>/<subcommand>.csv and
/// <out>/<subcommand>_reports.jsonl. Exit codes: 0 all mandatory checks pass,
/// 1 a check failed, 2 invalid configuration, 3 output error.
RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& cfg);

int exit_code_for(ErrorCode code);

/// Violation counts of the exact lattice-flow invariants over one ensemble.
struct FlowInvariantCounts {
  long long pairs = 0;
  long long monotone = 0;
  long long permanence = 0;
  long long merge_off_zero = 0;
  long long merge_before_hitting = 0;
  long long flow_property = 0;

  long long violations() const {
    return monotone + permanence + merge_off_zero + merge_before_hitting + flow_property;
  }
  FlowInvariantCounts& operator+=(const FlowInvariantCounts& o);
};

/// Standard start set: time 0 points on both sides plus two later starts.
LatticeFlowConfig standard_flow_starts(const GraphSpec& spec, int level, double horizon);

/// Samples the ensemble with intermediate starts at the midpoint registered
/// for start 0 and counts invariant violations.
FlowInvariantCounts flow_invariants(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                    const MeasurePairSampler& m, const RngStream& stream,
                                    std::optional<FlowEnsemble>* out = nullptr);

/// Bounded test functions for marginal checks.
std::vector<PiecewiseFunction> marginal_test_functions(const GraphSpec& spec);
/// Functions in D(α) with bounded second derivatives near the window.
std::vector<PiecewiseFunction> domain_test_functions(const GraphSpec& spec);
/// C_b² functions off the junction with equal one-sided slopes on all rays;
/// the second is in D(α), the others carry nonzero flux.
std::vector<PiecewiseFunction> freidlin_sheu_test_functions(const GraphSpec& spec);

/// f(i) for i in [0, n), spread over `workers` threads; results by index.
template <class T, class F>
std::vector<T> parallel_map(int n, int workers, F&& f) {
  std::vector<T> out(n > 0 ? n : 0);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  if (workers <= 1 || n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace walsh
