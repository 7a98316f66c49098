// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// walshflow <subcommand> --config <path> [--seed u64] [--replicas n] [--out dir] [--workers n]

#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>

#include "walshflow/walshflow.h"

namespace {

constexpr const char* kSubcommands[] = {
    "verify-semigroup", "simulate-wbm",      "walk-converge",       "verify-freidlin-sheu",
    "flow-experiment",  "kernel-experiment", "tanaka-special-case",
};

std::optional<std::uint64_t> parse_seed(const char* text) {
  if (text == nullptr || *text == '\0') return std::nullopt;
  const std::string s(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walsh Brownian motion and stochastic flows on star graphs"};
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::uint64_t> seed;
  int replicas = 0;
  int workers = 0;
  std::string out;
  bool quiet = false;

  for (const char* name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "INI configuration file")->required();
    sub->add_option("--seed", seed, "root seed, overrides WALSH_SEED and the config");
    sub->add_option("--replicas", replicas, "replica count")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "do not print reports");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  wf_run_options opts{};
  if (seed) {
    opts.seed = *seed;
    opts.has_seed = 1;
  } else if (const char* env = std::getenv("WALSH_SEED"); env != nullptr) {
    const auto parsed = parse_seed(env);
    if (!parsed) {
      std::cerr << "error: WALSH_SEED is not an unsigned 64-bit integer\n";
      return 2;
    }
    opts.seed = *parsed;
    opts.has_seed = 1;
  }
  opts.replicas = replicas;
  opts.workers = workers;
  opts.out_dir = out.empty() ? nullptr : out.c_str();

  const std::string subcommand = app.get_subcommands().front()->get_name();
  int exit_code = 0;
  const wf_status status = wf_run_experiment(subcommand.c_str(), config.c_str(), &opts, &exit_code);
  if (status != WF_OK) {
    std::cerr << "error: " << wf_status_name(status) << ": " << wf_last_error() << "\n";
    return 1;
  }
  if (!quiet) std::cout << wf_last_run_reports();
  if (exit_code != 0) {
    const std::string why = wf_last_error();
    std::cerr << subcommand << ": " << (why.empty() ? "a check failed" : why) << "\n";
  }
  return exit_code;
}
