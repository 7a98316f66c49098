// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "experiments.hpp"

#include <array>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "pathkit.hpp"
#include "semigroup.hpp"

namespace walsh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::ConfigInvalid, "bad value '" + value + "' for " + key);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) bad_value(key, text);
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, text);
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, text);
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(parse_int<int>(key, item));
  return out;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"graph",
       {{"alpha", [](ExperimentConfig& c, const std::string& v) { c.alpha = parse_doubles("graph.alpha", v); }},
        {"eps", [](ExperimentConfig& c, const std::string& v) { c.eps = parse_ints("graph.eps", v); }}}},
      {"scheme",
       {{"level", [](ExperimentConfig& c, const std::string& v) { c.level = parse_int<int>("scheme.level", v); }},
        {"dt", [](ExperimentConfig& c, const std::string& v) { c.dt = parse_double("scheme.dt", v); }},
        {"horizon",
         [](ExperimentConfig& c, const std::string& v) { c.horizon = parse_double("scheme.horizon", v); }}}},
      {"run",
       {{"replicas",
         [](ExperimentConfig& c, const std::string& v) { c.replicas = parse_int<int>("run.replicas", v); }},
        {"seed",
         [](ExperimentConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>("run.seed", v); }},
        {"workers",
         [](ExperimentConfig& c, const std::string& v) { c.workers = parse_int<int>("run.workers", v); }},
        {"out", [](ExperimentConfig& c, const std::string& v) { c.out = trim(v); }},
        {"merges", [](ExperimentConfig& c, const std::string& v) { c.merges = parse_int<int>("run.merges", v); }},
        {"merge_level",
         [](ExperimentConfig& c, const std::string& v) { c.merge_level = parse_int<int>("run.merge_level", v); }},
        {"export_stride",
         [](ExperimentConfig& c, const std::string& v) {
           c.export_stride = parse_int<int>("run.export_stride", v);
         }}}},
      {"measure",
       {{"kind", [](ExperimentConfig& c, const std::string& v) { c.measure = trim(v); }},
        {"concentration",
         [](ExperimentConfig& c, const std::string& v) {
           c.concentration = parse_double("measure.concentration", v);
         }},
        {"custom_plus",
         [](ExperimentConfig& c, const std::string& v) { c.custom_plus = parse_doubles("measure.custom_plus", v); }},
        {"custom_minus",
         [](ExperimentConfig& c, const std::string& v) {
           c.custom_minus = parse_doubles("measure.custom_minus", v);
         }},
        {"allow_biased",
         [](ExperimentConfig& c, const std::string& v) { c.allow_biased = parse_bool("measure.allow_biased", v); }}}},
  };
  return table;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end() || body.empty())
      fail(ErrorCode::ConfigInvalid, "unknown section or top-level key '" + section + "'");
    for (const auto& [key, node] : body) {
      const auto set = sec->second.find(key);
      if (set == sec->second.end()) fail(ErrorCode::ConfigInvalid, "unknown key '" + section + "." + key + "'");
      set->second(cfg, node.data());
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigInvalid, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "[graph]\n";
  os << "alpha = " << join(alpha, exact) << "\n";
  os << "eps = " << join(eps, [](int v) { return std::to_string(v); }) << "\n";
  os << "\n[scheme]\n";
  os << "level = " << level << "\n";
  os << "dt = " << exact(dt) << "\n";
  os << "horizon = " << exact(horizon) << "\n";
  os << "\n[run]\n";
  os << "replicas = " << replicas << "\n";
  os << "seed = " << seed << "\n";
  os << "workers = " << workers << "\n";
  os << "out = " << out << "\n";
  os << "merges = " << merges << "\n";
  os << "merge_level = " << merge_level << "\n";
  os << "export_stride = " << export_stride << "\n";
  os << "\n[measure]\n";
  os << "kind = " << measure << "\n";
  os << "concentration = " << exact(concentration) << "\n";
  os << "custom_plus = " << join(custom_plus, exact) << "\n";
  os << "custom_minus = " << join(custom_minus, exact) << "\n";
  os << "allow_biased = " << (allow_biased ? "true" : "false") << "\n";
  return os.str();
}

void ExperimentConfig::validate() const {
  auto invalid = [](const std::string& what) { fail(ErrorCode::ConfigInvalid, what); };
  try {
    (void)graph();
  } catch (const Error& e) {
    invalid(std::string("graph: ") + e.what());
  }
  if (level < 1 || level > 12) invalid("scheme.level must be in [1, 12]");
  if (!(horizon > 0.0) || horizon > 100.0) invalid("scheme.horizon must be in (0, 100]");
  if (!(dt > 0.0) || dt > horizon) invalid("scheme.dt must be in (0, horizon]");
  if (horizon / dt > 1e8) invalid("scheme.dt too small for the horizon");
  if (std::llround(std::ldexp(horizon, 2 * level)) < 1) invalid("horizon shorter than one lattice step");
  if (replicas < 1 || replicas > 10'000'000) invalid("run.replicas must be in [1, 1e7]");
  if (workers < 1 || workers > 256) invalid("run.workers must be in [1, 256]");
  if (out.empty()) invalid("run.out must not be empty");
  if (merges != 0 && (merges < 1000 || merges > 10'000'000)) invalid("run.merges must be 0 or in [1000, 1e7]");
  if (merge_level < 5 || merge_level > 12) invalid("run.merge_level must be in [5, 12]");
  if (export_stride < 1) invalid("run.export_stride must be positive");
  if (!(concentration > 0.0)) invalid("measure.concentration must be positive");
  try {
    (void)measure_pair();
  } catch (const Error& e) {
    invalid(std::string("measure: ") + e.what());
  }
}

GraphSpec ExperimentConfig::graph() const { return GraphSpec::create(alpha, eps); }

MeasurePairSampler ExperimentConfig::measure_pair() const {
  MeasureOptions opts;
  opts.concentration = concentration;
  opts.custom_plus = custom_plus;
  opts.custom_minus = custom_minus;
  opts.enforce_moments = !allow_biased;
  return MeasurePairSampler::create(graph(), parse_measure_kind(measure), opts);
}

LatticeFlowConfig ExperimentConfig::lattice() const { return standard_flow_starts(graph(), level, horizon); }

void Table::add(std::vector<Cell> row) {
  if (row.size() != header.size()) fail(ErrorCode::InvalidArgument, "row width differs from the header");
  rows.push_back(std::move(row));
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

void emit_csv(const Table& table, const std::string& path) {
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) fail(ErrorCode::InvalidArgument, "ragged table");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    out.push_back(std::move(row));
  }
  return out;
}

bool is_subcommand(const std::string& name) {
  for (const char* s : kSubcommands) {
    if (name == s) return true;
  }
  return false;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid: return 2;
    case ErrorCode::Io: return 3;
    default: return 1;
  }
}

FlowInvariantCounts& FlowInvariantCounts::operator+=(const FlowInvariantCounts& o) {
  pairs += o.pairs;
  monotone += o.monotone;
  permanence += o.permanence;
  merge_off_zero += o.merge_off_zero;
  merge_before_hitting += o.merge_before_hitting;
  flow_property += o.flow_property;
  return *this;
}

LatticeFlowConfig standard_flow_starts(const GraphSpec& spec, int level, double horizon) {
  LatticeFlowConfig cfg;
  cfg.level = level;
  cfg.horizon = horizon;
  const int n = spec.n_rays();
  const int p = spec.p();
  int plus_seen = 0;
  int minus_seen = 0;
  auto add = [&](int time_index, std::int64_t position) {
    if (position > 0 && p == 0) return;
    if (position < 0 && p == n) return;
    int ray = n;
    if (position > 0) ray = 1 + (plus_seen++ % p);
    if (position < 0) ray = p + 1 + (minus_seen++ % (n - p));
    cfg.starts.push_back({time_index, position, ray});
  };
  for (std::int64_t x : {0, 2, -1, 5, -3}) add(0, x);
  const int later = cfg.steps() / 4;
  for (std::int64_t x : {1, -2}) add(later, x);
  return cfg;
}

FlowInvariantCounts flow_invariants(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                    const MeasurePairSampler& m, const RngStream& stream,
                                    std::optional<FlowEnsemble>* out) {
  const int mid = cfg.steps() / 2;
  LatticeFlowConfig full = cfg;
  {
    const FlowEnsemble first = sample_kernel_flow(cfg, spec, m, stream);
    for (int q = 0; q < first.n_starts(); ++q) {
      if (cfg.starts[q].time_index > mid) continue;
      const LatticeFlowConfig with = with_intermediate_starts(first, q, mid);
      for (std::size_t i = cfg.starts.size(); i < with.starts.size(); ++i) {
        if (std::find(full.starts.begin(), full.starts.end(), with.starts[i]) == full.starts.end())
          full.starts.push_back(with.starts[i]);
      }
    }
  }
  const FlowEnsemble e = sample_kernel_flow(full, spec, m, stream);
  const ScalarFlow& flow = e.scalar();
  const int steps = flow.steps();
  FlowInvariantCounts c;
  for (int i = 0; i < e.n_starts(); ++i) {
    for (int j = i + 1; j < e.n_starts(); ++j) {
      ++c.pairs;
      const int from = std::max(full.starts[i].time_index, full.starts[j].time_index);
      const std::int64_t d0 = flow.at(i, from) - flow.at(j, from);
      const int order = (d0 > 0) - (d0 < 0);
      bool met = order == 0;
      for (int k = from + 1; k <= steps; ++k) {
        const std::int64_t d = flow.at(i, k) - flow.at(j, k);
        const int sgn = (d > 0) - (d < 0);
        if (met) {
          if (sgn != 0) ++c.permanence;
          continue;
        }
        if (sgn == -order) ++c.monotone;
        if (sgn == 0) {
          met = true;
          if (flow.at(i, k) != 0) ++c.merge_off_zero;
        }
      }
    }
  }
  for (int q = 0; q < e.n_starts(); ++q) {
    // kernels of merged starts follow their parent from the merge on
    const int t = e.merge_time(q);
    if (t == kNever) continue;
    for (int k = t; k <= steps; ++k) {
      if (!(e.kernel(q, k) == e.kernel(e.parent(q), k))) ++c.merge_before_hitting;
    }
  }
  for (int q = 0; q < static_cast<int>(cfg.starts.size()); ++q) {
    if (cfg.starts[q].time_index > mid) continue;
    for (int r = static_cast<int>(cfg.starts.size()); r < e.n_starts(); ++r) {
      if (full.starts[r].position != flow.at(q, mid)) continue;
      for (int k = mid; k <= steps; ++k) {
        if (flow.at(r, k) != flow.at(q, k)) ++c.flow_property;
      }
    }
    for (int u : {mid, (mid + steps) / 2, steps}) {
      if (flow_property_check(e, q, mid, u) > 1e-12) ++c.flow_property;
    }
  }
  if (out) out->emplace(e);
  return c;
}

namespace {

RayFunction ray_fn(ScalarFn f, ScalarFn f1, ScalarFn f2) { return {std::move(f), std::move(f1), std::move(f2)}; }

/// Σ α_i c_i = 0 with c not identically zero.
std::vector<double> centered_ray_coefficients(const GraphSpec& spec) {
  double mean = 0.0;
  for (int i = 1; i <= spec.n_rays(); ++i) mean += spec.alpha(i) * i;
  std::vector<double> c;
  for (int i = 1; i <= spec.n_rays(); ++i) c.push_back(i - mean);
  return c;
}

}  // namespace

std::vector<PiecewiseFunction> marginal_test_functions(const GraphSpec& spec) {
  const int n = spec.n_rays();
  std::vector<PiecewiseFunction> out;
  out.push_back(PiecewiseFunction::uniform(
      ray_fn([](double h) { return std::exp(-h); }, [](double h) { return -std::exp(-h); },
             [](double h) { return std::exp(-h); }),
      n));
  std::vector<RayFunction> ramp;
  std::vector<RayFunction> wave;
  for (int i = 1; i <= n; ++i) {
    const double a = static_cast<double>(i) / n;
    ramp.push_back(ray_fn([a](double h) { return a * (1.0 - std::exp(-h)); },
                          [a](double h) { return a * std::exp(-h); },
                          [a](double h) { return -a * std::exp(-h); }));
    const double b = i % 2 ? 1.0 : -1.0;
    wave.push_back(ray_fn([b](double h) { return b * h / (1.0 + h); },
                          [b](double h) { return b / ((1.0 + h) * (1.0 + h)); },
                          [b](double h) { return -2.0 * b / ((1.0 + h) * (1.0 + h) * (1.0 + h)); }));
  }
  out.emplace_back(std::move(ramp));
  out.emplace_back(std::move(wave));
  return out;
}

std::vector<PiecewiseFunction> domain_test_functions(const GraphSpec& spec) {
  const int n = spec.n_rays();
  const std::vector<double> c = centered_ray_coefficients(spec);
  std::vector<PiecewiseFunction> out;
  out.push_back(PiecewiseFunction::uniform(
      ray_fn([](double h) { return std::exp(-h * h); }, [](double h) { return -2.0 * h * std::exp(-h * h); },
             [](double h) { return (4.0 * h * h - 2.0) * std::exp(-h * h); }),
      n));
  out.push_back(PiecewiseFunction::uniform(
      ray_fn([](double h) { return std::cos(h); }, [](double h) { return -std::sin(h); },
             [](double h) { return -std::cos(h); }),
      n));
  std::vector<RayFunction> f3;
  std::vector<RayFunction> f4;
  std::vector<RayFunction> f5;
  for (int i = 1; i <= n; ++i) {
    const double ci = c[i - 1];
    f3.push_back(ray_fn([ci](double h) { return ci * h * std::exp(-h); },
                        [ci](double h) { return ci * (1.0 - h) * std::exp(-h); },
                        [ci](double h) { return ci * (h - 2.0) * std::exp(-h); }));
    f4.push_back(ray_fn(
        [ci](double h) { return ci * std::sin(h) + h * h / (1.0 + h * h); },
        [ci](double h) { return ci * std::cos(h) + 2.0 * h / ((1.0 + h * h) * (1.0 + h * h)); },
        [ci](double h) { return -ci * std::sin(h) + (2.0 - 6.0 * h * h) / std::pow(1.0 + h * h, 3); }));
    const double k = static_cast<double>(i) / n;
    f5.push_back(ray_fn([ci, k](double h) { return ci * std::atan(h) + k * (1.0 - std::cos(h)); },
                        [ci, k](double h) { return ci / (1.0 + h * h) + k * std::sin(h); },
                        [ci, k](double h) { return -2.0 * ci * h / ((1.0 + h * h) * (1.0 + h * h)) + k * std::cos(h); }));
  }
  out.emplace_back(std::move(f3));
  out.emplace_back(std::move(f4));
  out.emplace_back(std::move(f5));
  return out;
}

std::vector<PiecewiseFunction> freidlin_sheu_test_functions(const GraphSpec& spec) {
  static constexpr std::array<double, 3> kCurvature{0.3, -0.2, 0.1};
  std::vector<RayFunction> f1;
  std::vector<RayFunction> f2;
  std::vector<RayFunction> f3;
  for (int i = 0; i < spec.n_rays(); ++i) {
    const double k = kCurvature[i % kCurvature.size()];
    f1.push_back(ray_fn([k](double h) { return std::atan(h) + k * (1.0 - std::cos(h)); },
                        [k](double h) { return 1.0 / (1.0 + h * h) + k * std::sin(h); },
                        [k](double h) { return -2.0 * h / ((1.0 + h * h) * (1.0 + h * h)) + k * std::cos(h); }));
    f2.push_back(ray_fn([k](double h) { return 0.5 * std::cos(h) + k * (1.0 - std::cos(h)); },
                        [k](double h) { return (k - 0.5) * std::sin(h); },
                        [k](double h) { return (k - 0.5) * std::cos(h); }));
    f3.push_back(ray_fn([k](double h) { return std::sin(h) + k * h * h / (1.0 + h * h); },
                        [k](double h) { return std::cos(h) + 2.0 * k * h / ((1.0 + h * h) * (1.0 + h * h)); },
                        [k](double h) { return -std::sin(h) + k * (2.0 - 6.0 * h * h) / std::pow(1.0 + h * h, 3); }));
  }
  return {PiecewiseFunction(std::move(f1)), PiecewiseFunction(std::move(f2)), PiecewiseFunction(std::move(f3))};
}

namespace {

RngStream replica_stream(const RngStream& root, int r) {
  return root.child({purpose::kReplica, static_cast<std::uint64_t>(r)});
}

TestReport bound_report(std::string name, double statistic, double threshold, long long replicas) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.threshold = threshold;
  r.replicas = replicas;
  r.pass = statistic <= threshold;
  return r;
}

struct Outcome {
  Table table;
  std::vector<TestReport> reports;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name suffix, contents
  std::string raw_csv;                                           // replaces the table when set
};

Outcome verify_semigroup(const ExperimentConfig& cfg) {
  const GraphSpec spec = cfg.graph();
  const int n = spec.n_rays();
  Outcome o;
  o.table.header = {"check", "function", "ray", "radius", "s", "t", "value"};
  const std::vector<GraphPoint> points{GraphPoint::origin(n), GraphPoint::make(1, 0.3, n),
                                       GraphPoint::make(n, 0.7, n), GraphPoint::make(1, 1.5, n),
                                       GraphPoint::make(std::max(1, n / 2), 3.0, n)};
  const PiecewiseFunction one = PiecewiseFunction::uniform(
      ray_fn([](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }), n);
  const auto bounded = marginal_test_functions(spec);
  double conservation = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  for (const auto& x : points) {
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const double v = wbm_semigroup_apply(one, x, t, spec);
      conservation = std::max(conservation, std::abs(v - 1.0));
      o.table.add({std::string("conservation"), 0LL, static_cast<long long>(x.ray), x.radius, 0.0, t, v});
      const double pos = wbm_semigroup_apply(bounded[0], x, t, spec);
      min_value = std::min(min_value, pos);
      o.table.add({std::string("positivity"), 0LL, static_cast<long long>(x.ray), x.radius, 0.0, t, pos});
    }
  }
  o.reports.push_back(bound_report("conservation", conservation, 1e-8, 0));
  TestReport positivity = bound_report("positivity", -min_value, 0.0, 0);
  positivity.details.emplace_back("min_value", min_value);
  o.reports.push_back(positivity);

  double law = 0.0;
  const std::vector<GraphPoint> law_points{points[0], points[1], points[2]};
  for (std::size_t f = 0; f < bounded.size(); ++f) {
    for (double s : {0.25, 1.0}) {
      for (double t : {0.25, 1.0}) {
        for (const auto& x : law_points) {
          const double d = semigroup_law_defect(bounded[f], x, s, t, spec);
          law = std::max(law, d);
          o.table.add({std::string("semigroup_law"), static_cast<long long>(f), static_cast<long long>(x.ray),
                       x.radius, s, t, d});
        }
      }
    }
  }
  o.reports.push_back(bound_report("semigroup_law", law, 1e-5, 0));

  double generator = 0.0;
  const auto domain = domain_test_functions(spec);
  for (std::size_t f = 0; f < domain.size(); ++f) {
    for (const auto& x : {points[0], points[1], points[2]}) {
      const double r = generator_residual(domain[f], x, 0.5, spec);
      generator = std::max(generator, std::abs(r));
      o.table.add({std::string("generator"), static_cast<long long>(f), static_cast<long long>(x.ray), x.radius,
                   0.0, 0.5, r});
    }
  }
  o.reports.push_back(bound_report("generator", generator, 1e-4, 0));

  double derivative = 0.0;
  const PiecewiseFunction& g = domain[2];
  for (int i = 0; i < 20; ++i) {
    const int ray = 1 + i % n;
    const double radius = 0.2 + 0.15 * i;
    const double t = i % 2 ? 0.5 : 1.0;
    const GraphPoint x = GraphPoint::make(ray, radius, n);
    const double analytic = semigroup_derivative(g, x, t, spec);
    const double h = 1e-4;
    const double fd = (wbm_semigroup_apply(g, GraphPoint::make(ray, radius + h, n), t, spec) -
                       wbm_semigroup_apply(g, GraphPoint::make(ray, radius - h, n), t, spec)) /
                      (2.0 * h);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-3);
    derivative = std::max(derivative, rel);
    o.table.add({std::string("derivative"), 2LL, static_cast<long long>(ray), radius, 0.0, t, rel});
  }
  o.reports.push_back(bound_report("derivative", derivative, 1e-5, 20));
  return o;
}

Outcome simulate_wbm(const ExperimentConfig& cfg) {
  const GraphSpec spec = cfg.graph();
  const RngStream root(cfg.seed);
  const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / cfg.dt)));
  const TimeGrid grid = TimeGrid::make(0.0, cfg.horizon / steps, steps);
  const auto samples = parallel_map<GraphPoint>(cfg.replicas, cfg.workers, [&](int r) {
    const RngStream s = replica_stream(root, r);
    const ScalarPath b = sample_brownian(grid, s.child({purpose::kBrownian}));
    const WalshPath z = wbm_flip_construct(reflect_path_bridge(b, s.child({purpose::kBridge})), spec, s);
    return z.points.back();
  });
  Outcome o;
  o.table.header = {"replica", "ray", "radius"};
  for (int r = 0; r < cfg.replicas; ++r)
    o.table.add({static_cast<long long>(r), static_cast<long long>(samples[r].ray), samples[r].radius});
  o.reports.push_back(marginal_vs_semigroup(samples, marginal_test_functions(spec), spec, grid.end_time()));
  return o;
}

Outcome walk_converge(const ExperimentConfig& cfg) {
  const GraphSpec spec = cfg.graph();
  const RngStream root(cfg.seed);
  const int top = std::clamp(cfg.level, 3, 8);
  const int count = top - 1;
  const auto samples = parallel_map<std::vector<GraphPoint>>(count, cfg.workers, [&](int i) {
    return scaled_walk_marginal(spec, i + 2, cfg.horizon, cfg.replicas,
                                root.child({purpose::kMeta, static_cast<std::uint64_t>(i + 2)}));
  });
  Outcome o;
  o.table.header = {"n", "ks_d", "ks_p", "replicas"};
  std::vector<double> d(count);
  const double t = cfg.horizon;
  for (int i = 0; i < count; ++i) {
    std::vector<double> radii;
    for (const auto& x : samples[i]) radii.push_back(x.radius);
    const KsResult ks = ks_statistic(radii, [t](double r) { return folded_gaussian_cdf(r, t); });
    d[i] = ks.d;
    o.table.add({static_cast<long long>(i + 2), ks.d, ks.p_value, static_cast<long long>(cfg.replicas)});
  }
  TestReport mono;
  mono.name = "walk_ks_monotone";
  mono.replicas = cfg.replicas;
  mono.threshold = 1.1;
  double worst = 0.0;
  for (int i = 0; i + 1 < count; ++i) worst = std::max(worst, d[i + 1] / d[i]);
  for (int i = 0; i < count; ++i) mono.details.emplace_back("d_n" + std::to_string(i + 2), d[i]);
  mono.statistic = worst;
  mono.pass = worst <= mono.threshold;
  o.reports.push_back(mono);

  std::vector<long long> counts(spec.n_rays(), 0);
  for (const auto& x : samples.back()) {
    if (!x.is_origin()) ++counts[x.ray - 1];
  }
  const ChiSquareResult chi =
      chi_square_rays(counts, std::vector<double>(spec.alphas().begin(), spec.alphas().end()));
  TestReport rays;
  rays.name = "walk_rays";
  rays.replicas = cfg.replicas;
  rays.threshold = 0.01;
  rays.statistic = chi.p_value;
  rays.details.emplace_back("chi2", chi.statistic);
  rays.details.emplace_back("n", top);
  rays.pass = chi.p_value > rays.threshold;
  o.reports.push_back(rays);
  return o;
}

Outcome verify_freidlin_sheu(const ExperimentConfig& cfg) {
  const GraphSpec spec = cfg.graph();
  const RngStream root(cfg.seed);
  const int fine = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  if (fine % 16 != 0 || fine < 16)
    fail(ErrorCode::ConfigInvalid, "horizon/dt must be a positive multiple of 16 for the dt sweep");
  const double dt = cfg.horizon / fine;
  const auto fs = freidlin_sheu_test_functions(spec);
  static constexpr std::array<double, 3> kBands{0.2, 0.1, 0.05};
  constexpr int kLevels = 3;
  // per path: residual² per (function, level), then |band - L| per ε
  const int width = static_cast<int>(fs.size()) * kLevels + static_cast<int>(kBands.size());
  const auto rows = parallel_map<std::vector<double>>(cfg.replicas, cfg.workers, [&](int p) {
    const RngStream s = replica_stream(root, p);
    const ScalarPath b = sample_brownian(TimeGrid::make(0.0, dt, fine), s.child({purpose::kBrownian}));
    std::vector<double> out(width);
    for (int lev = 0; lev < kLevels; ++lev) {
      const int sub = 1 << (2 * lev);
      const int k = fine / sub;
      ScalarPath coarse{TimeGrid::make(0.0, dt * sub, k), std::vector<double>(k + 1)};
      for (int j = 0; j <= k; ++j) coarse.values[j] = b.values[j * sub];
      const Reflection r = skorokhod_reflection(0.0, coarse);
      WalshPath z = wbm_flip_construct(r.path, spec, s);
      z.brownian = coarse;
      for (std::size_t f = 0; f < fs.size(); ++f) {
        const double res = freidlin_sheu_residual(fs[f], z, spec);
        out[f * kLevels + lev] = res * res;
      }
      if (lev == 0) {
        for (std::size_t e = 0; e < kBands.size(); ++e) {
          out[fs.size() * kLevels + e] =
              std::abs(local_time_band(r.path, kBands[e], k) - r.local_time.values.back());
        }
      }
    }
    return out;
  });
  const double n = static_cast<double>(cfg.replicas);
  std::vector<double> sums(width, 0.0);
  for (const auto& row : rows) {
    for (int i = 0; i < width; ++i) sums[i] += row[i];
  }
  Outcome o;
  o.table.header = {"quantity", "index", "parameter", "value"};
  const double rms_bound = 5e-3 * std::max(1.0, std::sqrt(dt / 1e-4));
  for (std::size_t f = 0; f < fs.size(); ++f) {
    std::array<double, kLevels> rms{};
    for (int lev = 0; lev < kLevels; ++lev) {
      rms[lev] = std::sqrt(sums[f * kLevels + lev] / n);
      o.table.add({std::string("rms_residual"), static_cast<long long>(f), dt * (1 << (2 * lev)), rms[lev]});
    }
    TestReport rate;
    rate.name = "fs_rate_f" + std::to_string(f);
    rate.replicas = cfg.replicas;
    rate.threshold = 1.7;
    const double r1 = rms[1] / rms[0];
    const double r2 = rms[2] / rms[1];
    rate.statistic = std::min(r1, r2);
    rate.details.emplace_back("flux", flux_defect(fs[f], spec));
    rate.details.emplace_back("ratio_fine", r1);
    rate.details.emplace_back("ratio_coarse", r2);
    rate.pass = r1 >= 1.7 && r1 <= 2.6 && r2 >= 1.7 && r2 <= 2.6;
    o.reports.push_back(rate);
    TestReport abs = bound_report("fs_rms_f" + std::to_string(f), rms[0], rms_bound, cfg.replicas);
    abs.details.emplace_back("dt", dt);
    o.reports.push_back(abs);
  }
  TestReport lt;
  lt.name = "local_time_band";
  lt.replicas = cfg.replicas;
  lt.threshold = 1.1;
  std::array<double, kBands.size()> err{};
  for (std::size_t e = 0; e < kBands.size(); ++e) {
    err[e] = sums[fs.size() * kLevels + e] / n;
    o.table.add({std::string("local_time_error"), static_cast<long long>(e), kBands[e], err[e]});
    lt.details.emplace_back("eps_" + format_number(kBands[e]), err[e]);
  }
  lt.statistic = std::max(err[1] / err[0], err[2] / err[1]);
  lt.pass = lt.statistic <= lt.threshold;
  o.reports.push_back(lt);
  return o;
}

Outcome flow_experiment(const ExperimentConfig& cfg) {
  const GraphSpec spec = cfg.graph();
  const MeasurePairSampler m = cfg.measure_pair();
  const LatticeFlowConfig lattice = cfg.lattice();
  const RngStream root(cfg.seed);
  struct Replica {
    FlowInvariantCounts counts;
    std::string csv;
    std::vector<int> merge;  // coalescence index of each time-0 pair, or kNever
  };
  const auto replicas = parallel_map<Replica>(cfg.replicas, cfg.workers, [&](int r) {
    Replica out;
    std::optional<FlowEnsemble> kept;
    out.counts = flow_invariants(lattice, spec, m, replica_stream(root, r), &kept);
    const FlowEnsemble& e = *kept;
    std::ostringstream csv;
    write_ensemble_csv(csv, e, r, r == 0, cfg.export_stride);
    out.csv = csv.str();
    for (int i = 0; i < static_cast<int>(lattice.starts.size()); ++i) {
      for (int j = i + 1; j < static_cast<int>(lattice.starts.size()); ++j) {
        if (lattice.starts[i].time_index != 0 || lattice.starts[j].time_index != 0) continue;
        const auto t = coalescence_time(e.scalar(), i, j);
        out.merge.push_back(t ? *t : kNever);
      }
    }
    return out;
  });
  Outcome o;
  FlowInvariantCounts total;
  long long pairs = 0;
  long long merged = 0;
  double merge_time_sum = 0.0;
  for (const auto& r : replicas) {
    total += r.counts;
    o.raw_csv += r.csv;
    for (int t : r.merge) {
      ++pairs;
      if (t != kNever) {
        ++merged;
        merge_time_sum += t * lattice.dt();
      }
    }
  }
  if (o.raw_csv.empty()) o.raw_csv = "replica,start_index,time,ray,radius,weight\n";
  TestReport inv;
  inv.name = "flow_invariants";
  inv.replicas = cfg.replicas;
  inv.threshold = 0.0;
  inv.statistic = static_cast<double>(total.violations());
  inv.details = {{"pairs", static_cast<double>(total.pairs)},
                 {"monotone", static_cast<double>(total.monotone)},
                 {"permanence", static_cast<double>(total.permanence)},
                 {"merge_off_zero", static_cast<double>(total.merge_off_zero)},
                 {"kernel_after_merge", static_cast<double>(total.merge_before_hitting)},
                 {"flow_property", static_cast<double>(total.flow_property)}};
  inv.pass = total.violations() == 0;
  o.reports.push_back(inv);

  TestReport coal;
  coal.name = "coalescence_summary";
  coal.replicas = cfg.replicas;
  coal.statistic = pairs ? static_cast<double>(merged) / pairs : 0.0;
  coal.details = {{"pairs", static_cast<double>(pairs)},
                  {"merged", static_cast<double>(merged)},
                  {"mean_merge_time", merged ? merge_time_sum / merged : 0.0}};
  coal.pass = true;
  o.reports.push_back(coal);

  const double ap = spec.alpha_plus();
  if (cfg.merges > 0 && ap > 0.5 && ap < 1.0) {
    const std::int64_t y = std::int64_t{1} << (cfg.merge_level - 4);
    const std::int64_t cap = std::int64_t{1} << cfg.merge_level;
    const std::int64_t max_steps = std::int64_t{1} << 26;
    const RngStream merges = root.child({purpose::kMeta});
    const auto levels = parallel_map<double>(cfg.merges, cfg.workers, [&](int i) {
      return sample_merge_level(cfg.merge_level, y, ap, cap, max_steps, replica_stream(merges, i));
    });
    Table t;
    t.header = {"index", "merge_level"};
    long long censored = 0;
    for (int i = 0; i < cfg.merges; ++i) {
      censored += std::isfinite(levels[i]) ? 0 : 1;
      t.add({static_cast<long long>(i), levels[i]});
    }
    std::ostringstream body;
    for (std::size_t i = 0; i < t.header.size(); ++i) body << (i ? "," : "") << t.header[i];
    body << '\n';
    for (const auto& row : t.rows) body << format_cell(row[0]) << ',' << format_cell(row[1]) << '\n';
    o.extra_files.emplace_back("_merges.csv", body.str());
    const PowerLawFit fit = powerlaw_fit_coalescence(levels, std::ldexp(static_cast<double>(y), -cfg.merge_level));
    TestReport pl;
    pl.name = "coalescence_powerlaw";
    pl.replicas = cfg.merges;
    pl.threshold = 0.98;
    pl.statistic = fit.r_squared;
    pl.details = {{"lambda_hat", fit.lambda},
                  {"points", static_cast<double>(fit.points)},
                  {"censored", static_cast<double>(censored)},
                  {"level", static_cast<double>(cfg.merge_level)}};
    pl.pass = fit.r_squared >= pl.threshold;
    o.reports.push_back(pl);
  }
  return o;
}

Outcome kernel_experiment(const ExperimentConfig& cfg) {
  const GraphSpec spec = cfg.graph();
  const MeasurePairSampler m = cfg.measure_pair();
  const LatticeFlowConfig lattice = cfg.lattice();
  const RngStream root(cfg.seed);
  const int n = spec.n_rays();
  const MeasureKind kind = m.kind();
  struct Replica {
    std::vector<std::vector<Cell>> rows;
    std::vector<std::vector<double>> plus;
    std::vector<std::vector<double>> minus;
    long long mismatches = 0;
    long long kernels = 0;
  };
  const auto replicas = parallel_map<Replica>(cfg.replicas, cfg.workers, [&](int r) {
    Replica out;
    const FlowEnsemble e = sample_kernel_flow(lattice, spec, m, replica_stream(root, r));
    const ScalarFlow& flow = e.scalar();
    for (int q = 0; q < e.n_starts(); ++q) {
      for (int k = lattice.starts[q].time_index; k <= flow.steps(); ++k) {
        const KernelMeasure km = e.kernel(q, k);
        ++out.kernels;
        if (kind == MeasureKind::Wiener) {
          out.mismatches += km == wiener_kernel(flow, q, k, spec) ? 0 : 1;
        } else if (kind == MeasureKind::DiracVertices) {
          out.mismatches += km.atoms.size() == 1 ? 0 : 1;
        } else {
          out.mismatches += std::abs(km.total_mass() - 1.0) <= 1e-12 ? 0 : 1;
        }
      }
      for (const auto& x : e.own_excursions(q)) (x.sign > 0 ? out.plus : out.minus).push_back(e.marks(q, x));
      const auto probe = find_probe(e, q);
      if (!probe) continue;
      const auto kw = e.kernel(q, probe->time_index).ray_masses(n);
      const auto ww = wiener_kernel(flow, q, probe->time_index, spec).ray_masses(n);
      for (int i = 0; i < n; ++i) {
        out.rows.push_back({static_cast<long long>(r), static_cast<long long>(q), probe->time_index * lattice.dt(),
                            static_cast<long long>(i + 1), kw[i], ww[i], kw[i] - ww[i]});
      }
    }
    return out;
  });
  Outcome o;
  o.table.header = {"replica", "start_index", "time", "ray", "kernel_weight", "wiener_weight",
                    "wiener_filter_deviation"};
  long long mismatches = 0;
  long long kernels = 0;
  std::vector<std::vector<double>> plus;
  std::vector<std::vector<double>> minus;
  for (const auto& r : replicas) {
    for (const auto& row : r.rows) o.table.add(row);
    mismatches += r.mismatches;
    kernels += r.kernels;
    plus.insert(plus.end(), r.plus.begin(), r.plus.end());
    minus.insert(minus.end(), r.minus.begin(), r.minus.end());
  }
  TestReport structure = bound_report("kernel_structure", static_cast<double>(mismatches), 0.0, cfg.replicas);
  structure.details.emplace_back("kernels", static_cast<double>(kernels));
  o.reports.push_back(structure);

  o.reports.push_back(m.moment_check(100000, root.child({purpose::kMeasureFamily})));

  TestReport marks;
  marks.name = "excursion_marks_mean";
  marks.replicas = static_cast<long long>(plus.size() + minus.size());
  marks.threshold = 3.0;
  double worst = 0.0;
  for (int sign : {1, -1}) {
    const auto& samples = sign > 0 ? plus : minus;
    const auto& want = m.declared_mean(sign);
    if (samples.size() < 2) continue;
    for (std::size_t i = 0; i < want.size(); ++i) {
      std::vector<double> v;
      v.reserve(samples.size());
      for (const auto& s : samples) v.push_back(s[i]);
      const MeanTest z = mean_z_test(v, want[i]);
      worst = std::max(worst, std::abs(z.z));
      marks.details.emplace_back(std::string(sign > 0 ? "plus" : "minus") + std::to_string(i + 1) + "_mean", z.mean);
    }
  }
  marks.statistic = worst;
  marks.pass = worst <= marks.threshold;
  o.reports.push_back(marks);

  o.reports.push_back(project_kernel_to_wiener(lattice, spec, m, cfg.replicas, root.child({purpose::kMeta, 1})));
  o.reports.push_back(filter_mapping_to_kernel(lattice, spec, m, cfg.replicas, root.child({purpose::kMeta, 2})));
  return o;
}

Outcome tanaka_special_case(const ExperimentConfig& cfg) {
  if (cfg.alpha.size() != 2) fail(ErrorCode::ConfigInvalid, "tanaka-special-case needs a graph with two rays");
  const RngStream root(cfg.seed);
  const GraphSpec tanaka = GraphSpec::create({0.5, 0.5}, {1, 1});
  const GraphSpec skew = GraphSpec::create(cfg.alpha, {1, -1});
  LatticeFlowConfig lt;
  lt.level = cfg.level;
  lt.horizon = cfg.horizon;
  lt.starts = {{0, 0, 2}, {0, 1, 1}, {0, 3, 2}};
  LatticeFlowConfig ls;
  ls.level = cfg.level;
  ls.horizon = cfg.horizon;
  ls.starts = {{0, 0, 2}};
  struct Replica {
    std::vector<std::vector<Cell>> rows;
    long long tanaka_mismatch = 0;
    long long embed_mismatch = 0;
    int sign = 0;  // sign of the skew flow at the horizon
  };
  const auto replicas = parallel_map<Replica>(cfg.replicas, cfg.workers, [&](int r) {
    Replica out;
    const RngStream s = replica_stream(root, r);
    const FlowEnsemble w = sample_wiener_flow(lt, tanaka, s.child({purpose::kMeta, 1}));
    const ScalarFlow& flow = w.scalar();
    for (int q = 0; q < w.n_starts(); ++q) {
      for (int k = w.tau(q) == kNever ? flow.steps() + 1 : w.tau(q); k <= flow.steps(); ++k) {
        const std::int64_t z = flow.at(q, k);
        const double radius = std::ldexp(static_cast<double>(std::abs(z)), -lt.level);
        KernelMeasure want;
        if (z == 0) want = KernelMeasure::dirac(GraphPoint::origin(2));
        else want.atoms = {{GraphPoint::make(1, radius, 2), 0.5}, {GraphPoint::make(2, radius, 2), 0.5}};
        out.tanaka_mismatch += w.kernel(q, k) == want ? 0 : 1;
      }
      const auto km = w.kernel(q, flow.steps()).ray_masses(2);
      out.rows.push_back({std::string("tanaka"), static_cast<long long>(r), static_cast<long long>(q),
                          static_cast<double>(flow.at(q, flow.steps())), km[0], km[1]});
    }
    const FlowEnsemble phi = sample_mapping_flow(ls, skew, s.child({purpose::kMeta, 2}));
    for (int k = 0; k <= phi.scalar().steps(); ++k) {
      const double y = std::ldexp(static_cast<double>(phi.scalar().at(0, k)), -ls.level);
      const KernelMeasure km = phi.kernel(0, k);
      const bool ok = km.atoms.size() == 1 && km.atoms[0].point == embed_line(y, skew) &&
                      project_line(km.atoms[0].point, skew) == y;
      out.embed_mismatch += ok ? 0 : 1;
    }
    const std::int64_t last = phi.scalar().at(0, phi.scalar().steps());
    out.sign = (last > 0) - (last < 0);
    const auto km = phi.kernel(0, phi.scalar().steps()).ray_masses(2);
    out.rows.push_back({std::string("skew"), static_cast<long long>(r), 0LL,
                        std::ldexp(static_cast<double>(last), -ls.level), km[0], km[1]});
    return out;
  });
  Outcome o;
  o.table.header = {"case", "replica", "start_index", "scalar", "ray1_weight", "ray2_weight"};
  long long tanaka_mismatch = 0;
  long long embed_mismatch = 0;
  std::vector<double> positive;
  for (const auto& r : replicas) {
    for (const auto& row : r.rows) o.table.add(row);
    tanaka_mismatch += r.tanaka_mismatch;
    embed_mismatch += r.embed_mismatch;
    if (r.sign != 0) positive.push_back(r.sign > 0 ? 1.0 : 0.0);
  }
  o.reports.push_back(bound_report("tanaka_weights", static_cast<double>(tanaka_mismatch), 0.0, cfg.replicas));
  o.reports.push_back(bound_report("skew_embedding", static_cast<double>(embed_mismatch), 0.0, cfg.replicas));
  TestReport sign;
  sign.name = "skew_sign_law";
  sign.replicas = static_cast<long long>(positive.size());
  sign.threshold = 3.0;
  if (positive.size() >= 2) {
    const double p = skew.alpha_plus();
    double mean = 0.0;
    for (double v : positive) mean += v;
    mean /= static_cast<double>(positive.size());
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(positive.size()));
    sign.statistic = se > 0.0 ? std::abs(mean - p) / se : (mean == p ? 0.0 : std::numeric_limits<double>::infinity());
    sign.details = {{"positive_fraction", mean}, {"alpha_plus", p}};
    sign.pass = sign.statistic <= sign.threshold;
  }
  o.reports.push_back(sign);
  return o;
}

Outcome dispatch(const std::string& sub, const ExperimentConfig& cfg) {
  if (sub == "verify-semigroup") return verify_semigroup(cfg);
  if (sub == "simulate-wbm") return simulate_wbm(cfg);
  if (sub == "walk-converge") return walk_converge(cfg);
  if (sub == "verify-freidlin-sheu") return verify_freidlin_sheu(cfg);
  if (sub == "flow-experiment") return flow_experiment(cfg);
  if (sub == "kernel-experiment") return kernel_experiment(cfg);
  if (sub == "tanaka-special-case") return tanaka_special_case(cfg);
  fail(ErrorCode::ConfigInvalid, "unknown subcommand '" + sub + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace

RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& cfg) {
  RunResult result;
  try {
    if (!is_subcommand(subcommand)) fail(ErrorCode::ConfigInvalid, "unknown subcommand '" + subcommand + "'");
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory '" + cfg.out + "': " + ec.message());
    const Outcome o = dispatch(subcommand, cfg);
    const std::filesystem::path dir(cfg.out);
    result.csv_path = (dir / (subcommand + ".csv")).string();
    result.reports_path = (dir / (subcommand + "_reports.jsonl")).string();
    if (o.raw_csv.empty()) emit_csv(o.table, result.csv_path);
    else write_text(result.csv_path, o.raw_csv);
    for (const auto& [suffix, body] : o.extra_files) write_text((dir / (subcommand + suffix)).string(), body);
    std::string lines;
    for (const auto& r : o.reports) lines += r.to_json_line() + "\n";
    write_text(result.reports_path, lines);
    result.reports = o.reports;
    result.exit_code = 0;
    for (const auto& r : o.reports) {
      if (!r.pass) result.exit_code = 1;
    }
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

}  // namespace walsh
