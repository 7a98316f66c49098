// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>

#include "csv.hpp"

namespace walsh {

double LatticeFlowConfig::dx() const { return std::ldexp(1.0, -level); }
double LatticeFlowConfig::dt() const { return std::ldexp(1.0, -2 * level); }
int LatticeFlowConfig::steps() const { return static_cast<int>(std::llround(horizon / dt())); }
TimeGrid LatticeFlowConfig::grid() const { return TimeGrid::make(0.0, dt(), steps()); }

void LatticeFlowConfig::validate(const GraphSpec& spec) const {
  if (level < 1 || level > 20) fail(ErrorCode::InvalidArgument, "lattice level must be in [1, 20]");
  if (!(horizon > 0.0) || steps() < 1) fail(ErrorCode::InvalidArgument, "horizon shorter than one step");
  if (steps() > 200'000'000) fail(ErrorCode::InvalidArgument, "too many lattice steps");
  if (starts.empty()) fail(ErrorCode::InvalidArgument, "flow needs at least one start");
  for (const auto& s : starts) {
    if (s.time_index < 0 || s.time_index > steps())
      fail(ErrorCode::OffLatticeStart, "start time outside the horizon");
    if (s.ray < 1 || s.ray > spec.n_rays()) fail(ErrorCode::InvalidArgument, "start ray outside the graph");
    if (s.position != 0 && (s.position > 0) != (spec.eps(s.ray) > 0))
      fail(ErrorCode::InvalidArgument, "start position sign disagrees with its ray");
  }
}

namespace {

std::int64_t lattice_units(double value, int exponent, const char* what) {
  const double scaled = std::ldexp(value, exponent);
  if (!std::isfinite(scaled) || scaled != std::floor(scaled) || std::abs(scaled) > 9e15)
    fail(ErrorCode::OffLatticeStart, what);
  return static_cast<std::int64_t>(scaled);
}

}  // namespace

LatticeStart lattice_start(const GraphSpec& spec, int level, double s, const GraphPoint& x) {
  const auto k = lattice_units(s, 2 * level, "start time is not a multiple of the time step");
  const auto r = lattice_units(x.radius, level, "start radius is not a multiple of the space step");
  if (k < 0 || k > std::numeric_limits<int>::max()) fail(ErrorCode::OffLatticeStart, "start time out of range");
  if (r == 0) return {static_cast<int>(k), 0, spec.n_rays()};
  return {static_cast<int>(k), spec.eps(x.ray) * r, x.ray};
}

LatticeStart lattice_start_scalar(const GraphSpec& spec, int level, double s, double x) {
  const int ray = x > 0.0 ? 1 : spec.n_rays();
  if (x != 0.0 && spec.eps(ray) != (x > 0.0 ? 1 : -1))
    fail(ErrorCode::InvalidArgument, "graph has no ray of that sign");
  return lattice_start(spec, level, s, GraphPoint::make(ray, std::abs(x), spec.n_rays()));
}

GraphPoint start_point(const LatticeStart& start, const GraphSpec& spec, int level) {
  return GraphPoint::make(start.ray, std::ldexp(static_cast<double>(std::abs(start.position)), -level),
                          spec.n_rays());
}

OriginRule OriginRule::for_alpha_plus(double alpha_plus) {
  if (!(alpha_plus >= 0.0 && alpha_plus <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha_plus outside [0, 1]");
  if (alpha_plus >= 0.5) return {1.0, (1.0 - alpha_plus) / alpha_plus};
  return {alpha_plus / (1.0 - alpha_plus), 1.0};
}

Coin coin_from_bits(std::uint64_t bits) {
  Coin c;
  c.xi = (bits >> 63) ? 1 : -1;
  c.u = (static_cast<double>(bits & ((1ULL << 53) - 1)) + 0.5) * 0x1.0p-53;
  return c;
}

LatticeCoins::LatticeCoins(const RngStream& stream, int steps) : coins_(steps) {
  RngStream s = stream;
  for (auto& c : coins_) c = coin_from_bits(s.next_u64());
}

std::int64_t lattice_step(std::int64_t z, const Coin& coin, const OriginRule& rule) {
  if (z != 0) return z + coin.xi;
  if (coin.xi > 0) return coin.u < rule.up ? 1 : 0;
  return coin.u < rule.down ? -1 : 0;
}

ScalarFlow::ScalarFlow(LatticeFlowConfig cfg, std::vector<std::vector<std::int64_t>> paths,
                       std::vector<std::int64_t> driver)
    : cfg_(std::move(cfg)), paths_(std::move(paths)), driver_(std::move(driver)) {}

std::int64_t ScalarFlow::at(int q, int k) const {
  if (!defined(q, k)) fail(ErrorCode::InvalidArgument, "trajectory undefined at this time");
  return paths_[q][k - cfg_.starts[q].time_index];
}

ScalarFlow skew_lattice_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                             const RngStream& stream) {
  cfg.validate(spec);
  const int steps = cfg.steps();
  const LatticeCoins coins(stream.child({purpose::kLatticeCoins}), steps);
  const OriginRule rule = OriginRule::for_alpha_plus(spec.alpha_plus());
  std::vector<std::int64_t> driver(steps + 1, 0);
  for (int k = 0; k < steps; ++k) driver[k + 1] = driver[k] + coins[k].xi;
  std::vector<std::vector<std::int64_t>> paths;
  paths.reserve(cfg.starts.size());
  for (const auto& start : cfg.starts) {
    std::vector<std::int64_t> path(steps - start.time_index + 1);
    path[0] = start.position;
    for (int k = start.time_index; k < steps; ++k) {
      const int i = k - start.time_index;
      path[i + 1] = lattice_step(path[i], coins[k], rule);
    }
    paths.push_back(std::move(path));
  }
  return ScalarFlow(cfg, std::move(paths), std::move(driver));
}

int hitting_time(const ScalarFlow& flow, int q) {
  for (int k = flow.config().starts[q].time_index; k <= flow.steps(); ++k) {
    if (flow.at(q, k) == 0) return k;
  }
  return kNever;
}

std::optional<int> coalescence_time(const ScalarFlow& flow, int i, int j) {
  const int from = std::max(flow.config().starts[i].time_index, flow.config().starts[j].time_index);
  for (int k = from; k <= flow.steps(); ++k) {
    if (flow.at(i, k) == flow.at(j, k)) return k;
  }
  return std::nullopt;
}

void KernelMeasure::validate() const {
  if (atoms.empty()) fail(ErrorCode::InvalidArgument, "kernel without atoms");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].weight > 0.0)) fail(ErrorCode::InvalidArgument, "atom weight must be positive");
    total += atoms[i].weight;
    for (std::size_t j = 0; j < i; ++j) {
      if (atoms[i].point == atoms[j].point) fail(ErrorCode::InvalidArgument, "repeated atom");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "kernel mass is not 1");
}

double KernelMeasure::total_mass() const {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  return total;
}

std::vector<double> KernelMeasure::ray_masses(int n_rays) const {
  std::vector<double> out(n_rays, 0.0);
  for (const auto& a : atoms) {
    if (!a.point.is_origin()) out[a.point.ray - 1] += a.weight;
  }
  return out;
}

double total_variation(const KernelMeasure& mu, const KernelMeasure& nu) {
  std::vector<KernelAtom> diff = mu.atoms;
  for (const auto& a : nu.atoms) {
    auto it = std::find_if(diff.begin(), diff.end(), [&](const KernelAtom& b) { return b.point == a.point; });
    if (it == diff.end()) diff.push_back({a.point, -a.weight});
    else it->weight -= a.weight;
  }
  double tv = 0.0;
  for (const auto& a : diff) tv += std::abs(a.weight);
  return tv;
}

MeasureKind parse_measure_kind(const std::string& name) {
  if (name == "wiener") return MeasureKind::Wiener;
  if (name == "dirac-vertices") return MeasureKind::DiracVertices;
  if (name == "dirichlet") return MeasureKind::Dirichlet;
  if (name == "uniform-simplex") return MeasureKind::UniformSimplex;
  if (name == "custom-weights") return MeasureKind::Custom;
  fail(ErrorCode::ConfigInvalid, "unknown measure '" + name + "'");
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Wiener: return "wiener";
    case MeasureKind::DiracVertices: return "dirac-vertices";
    case MeasureKind::Dirichlet: return "dirichlet";
    case MeasureKind::UniformSimplex: return "uniform-simplex";
    case MeasureKind::Custom: return "custom-weights";
  }
  return "unknown";
}

namespace {

void check_simplex(const std::vector<double>& u, std::size_t dim, const char* what) {
  if (u.size() != dim) fail(ErrorCode::SamplerInvalid, std::string(what) + ": wrong dimension");
  if (dim == 0) return;
  double total = 0.0;
  for (double x : u) {
    if (!(x >= 0.0)) fail(ErrorCode::SamplerInvalid, std::string(what) + ": negative coordinate");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::SamplerInvalid, std::string(what) + ": does not sum to 1");
}

}  // namespace

SimplexSampler::SimplexSampler(MeasureKind kind, std::vector<double> ratios, double concentration,
                               std::vector<double> custom)
    : kind_(kind), ratios_(std::move(ratios)), concentration_(concentration), custom_(std::move(custom)) {
  if (kind_ == MeasureKind::Dirichlet && !(concentration_ > 0.0))
    fail(ErrorCode::SamplerInvalid, "Dirichlet concentration must be positive");
  if (kind_ == MeasureKind::Custom) check_simplex(custom_, ratios_.size(), "custom weights");
}

std::vector<double> SimplexSampler::mean() const {
  switch (kind_) {
    case MeasureKind::UniformSimplex:
      return std::vector<double>(ratios_.size(), ratios_.empty() ? 0.0 : 1.0 / ratios_.size());
    case MeasureKind::Custom: return custom_;
    default: return ratios_;
  }
}

std::vector<double> SimplexSampler::sample(RngStream& stream) const {
  const std::size_t k = ratios_.size();
  if (k == 0) return {};
  switch (kind_) {
    case MeasureKind::Wiener: return ratios_;
    case MeasureKind::Custom: return custom_;
    case MeasureKind::DiracVertices: {
      std::vector<double> out(k, 0.0);
      out[stream.categorical(ratios_)] = 1.0;
      return out;
    }
    case MeasureKind::Dirichlet:
    case MeasureKind::UniformSimplex: {
      std::vector<double> out(k);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double shape = kind_ == MeasureKind::Dirichlet ? concentration_ * ratios_[i] : 1.0;
        out[i] = stream.gamma(shape);
        total += out[i];
      }
      for (double& x : out) x /= total;
      return out;
    }
  }
  return ratios_;
}

MeasurePairSampler::MeasurePairSampler(SimplexSampler plus, SimplexSampler minus,
                                       std::vector<double> plus_mean, std::vector<double> minus_mean)
    : plus_(std::move(plus)),
      minus_(std::move(minus)),
      plus_mean_(std::move(plus_mean)),
      minus_mean_(std::move(minus_mean)) {}

MeasurePairSampler MeasurePairSampler::create(const GraphSpec& spec, MeasureKind kind,
                                              const MeasureOptions& opts) {
  std::vector<double> plus_ratio;
  std::vector<double> minus_ratio;
  for (int i = 1; i <= spec.n_rays(); ++i)
    (spec.is_plus_ray(i) ? plus_ratio : minus_ratio).push_back(spec.conditional_weight(i));
  MeasurePairSampler m(SimplexSampler(kind, plus_ratio, opts.concentration, opts.custom_plus),
                       SimplexSampler(kind, minus_ratio, opts.concentration, opts.custom_minus),
                       plus_ratio, minus_ratio);
  if (opts.enforce_moments && m.mean_defect() > 1e-9)
    fail(ErrorCode::SamplerInvalid, "measure mean differs from the ray ratios");
  return m;
}

double MeasurePairSampler::mean_defect() const {
  double worst = 0.0;
  for (int sign : {1, -1}) {
    const auto mean = side(sign).mean();
    const auto& want = declared_mean(sign);
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(mean[i] - want[i]));
  }
  return worst;
}

TestReport MeasurePairSampler::moment_check(int samples, const RngStream& stream) const {
  if (samples < 2) fail(ErrorCode::InsufficientSamples, "moment check needs samples");
  TestReport report;
  report.name = "measure_moments";
  report.replicas = samples;
  report.threshold = 3.0;
  double worst = 0.0;
  for (int sign : {1, -1}) {
    const auto& want = declared_mean(sign);
    if (want.empty()) continue;
    RngStream s = stream.child({purpose::kMeasureFamily, sign > 0 ? 1ULL : 2ULL});
    std::vector<std::vector<double>> coords(want.size());
    for (int r = 0; r < samples; ++r) {
      const auto u = side(sign).sample(s);
      for (std::size_t i = 0; i < u.size(); ++i) coords[i].push_back(u[i]);
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      const MeanTest z = mean_z_test(coords[i], want[i]);
      worst = std::max(worst, std::abs(z.z));
      report.details.emplace_back(std::string(sign > 0 ? "plus" : "minus") + std::to_string(i + 1) + "_mean", z.mean);
    }
  }
  report.statistic = worst;
  report.pass = worst <= report.threshold;
  return report;
}

ExcursionMarker wiener_marker(const GraphSpec& spec) {
  return [spec](int, const DyadicLabel&, int sign) {
    std::vector<double> out;
    for (int i = 1; i <= spec.n_rays(); ++i) {
      if (spec.is_plus_ray(i) == (sign > 0)) out.push_back(spec.conditional_weight(i));
    }
    return out;
  };
}

ExcursionMarker measure_marker(const MeasurePairSampler& m, const RngStream& stream) {
  return [m, stream](int start, const DyadicLabel& label, int sign) {
    RngStream s = stream.child({sign > 0 ? purpose::kPlusMark : purpose::kMinusMark,
                                static_cast<std::uint64_t>(start),
                                static_cast<std::uint64_t>(label.numerator),
                                static_cast<std::uint64_t>(label.exponent)});
    return m.side(sign).sample(s);
  };
}

ExcursionMarker filtered_marker(ExcursionMarker base, const RngStream& stream) {
  return [base = std::move(base), stream](int start, const DyadicLabel& label, int sign) {
    std::vector<double> w = base(start, label, sign);
    RngStream s = stream.child({purpose::kFilterGamma, static_cast<std::uint64_t>(start),
                                static_cast<std::uint64_t>(label.numerator),
                                static_cast<std::uint64_t>(label.exponent),
                                sign > 0 ? 1ULL : 2ULL});
    const int pick = s.categorical(w);
    std::fill(w.begin(), w.end(), 0.0);
    w[pick] = 1.0;
    return w;
  };
}

FlowEnsemble::FlowEnsemble(ScalarFlow flow, GraphSpec spec, ExcursionMarker marker)
    : flow_(std::move(flow)), spec_(std::move(spec)), marker_(std::move(marker)) {
  const int n = flow_.n_starts();
  const int steps = flow_.steps();
  tau_.assign(n, kNever);
  merge_.assign(n, kNever);
  parent_.assign(n, -1);
  zeros_.resize(n);
  std::vector<std::vector<char>> is_zero(n, std::vector<char>(steps + 1, 0));
  for (int q = 0; q < n; ++q) {
    for (int k = flow_.config().starts[q].time_index; k <= steps; ++k) {
      if (flow_.at(q, k) == 0) {
        zeros_[q].push_back(k);
        is_zero[q][k] = 1;
      }
    }
    if (!zeros_[q].empty()) tau_[q] = zeros_[q].front();
    for (int k : zeros_[q]) {
      for (int p = 0; p < q; ++p) {
        if (is_zero[p][k]) {
          merge_[q] = k;
          parent_[q] = p;
          break;
        }
      }
      if (merge_[q] != kNever) break;
    }
  }
}

int FlowEnsemble::root(int q, int k) const {
  int r = q;
  while (merge_[r] != kNever && k >= merge_[r]) r = parent_[r];
  return r;
}

FlowExcursion FlowEnsemble::excursion_at(int q, int k) const {
  const int r = root(q, k);
  const std::int64_t z = flow_.at(r, k);
  if (z == 0 || tau_[r] == kNever || k < tau_[r]) fail(ErrorCode::NotInExcursion, "not inside an excursion");
  const auto& zs = zeros_[r];
  const auto after = std::lower_bound(zs.begin(), zs.end(), k);
  FlowExcursion e;
  e.g = *(after - 1);
  e.d = after == zs.end() ? kOpenEnd : *after;
  e.sign = z > 0 ? 1 : -1;
  const double dt = flow_.config().dt();
  const double right = e.d == kOpenEnd ? flow_.steps() * dt : e.d * dt;
  e.label = dyadic_label(e.g * dt, right);
  return e;
}

std::vector<FlowExcursion> FlowEnsemble::own_excursions(int q) const {
  std::vector<FlowExcursion> out;
  const auto& zs = zeros_[q];
  const int stop = merge_[q] == kNever ? flow_.steps() : merge_[q];
  for (std::size_t i = 0; i < zs.size() && zs[i] < stop; ++i) {
    const int g = zs[i];
    const int next = i + 1 < zs.size() ? zs[i + 1] : kOpenEnd;
    if (next == g + 1 || g == flow_.steps()) continue;
    out.push_back(excursion_at(q, g + 1));
  }
  return out;
}

KernelMeasure FlowEnsemble::kernel(int q, int k) const {
  const int r = root(q, k);
  const std::int64_t z = flow_.at(q, k);
  const int level = flow_.config().level;
  if (tau_[r] == kNever || k < tau_[r]) {
    const LatticeStart& s = flow_.config().starts[q];
    return KernelMeasure::dirac(start_point({s.time_index, z, s.ray}, spec_, level));
  }
  if (z == 0) return KernelMeasure::dirac(GraphPoint::origin(spec_.n_rays()));
  const FlowExcursion e = excursion_at(r, k);
  const std::vector<double> w = marker_(r, e.label, e.sign);
  const int lo = e.sign > 0 ? 1 : spec_.p() + 1;
  const int hi = e.sign > 0 ? spec_.p() : spec_.n_rays();
  check_simplex(w, static_cast<std::size_t>(hi - lo + 1), "excursion marks");
  const double radius = std::ldexp(static_cast<double>(std::abs(z)), -level);
  KernelMeasure out;
  for (int ray = lo; ray <= hi; ++ray) {
    const double weight = w[ray - lo];
    if (weight > 0.0) out.atoms.push_back({GraphPoint::make(ray, radius, spec_.n_rays()), weight});
  }
  return out;
}

FlowEnsemble sample_kernel_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                const MeasurePairSampler& m, const RngStream& stream) {
  return FlowEnsemble(skew_lattice_flow(cfg, spec, stream), spec, measure_marker(m, stream));
}

FlowEnsemble sample_mapping_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                 const RngStream& stream) {
  return FlowEnsemble(skew_lattice_flow(cfg, spec, stream), spec,
                      filtered_marker(wiener_marker(spec), stream));
}

FlowEnsemble sample_wiener_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                const RngStream& stream) {
  return FlowEnsemble(skew_lattice_flow(cfg, spec, stream), spec, wiener_marker(spec));
}

KernelMeasure wiener_kernel(const ScalarFlow& flow, int q, int k, const GraphSpec& spec) {
  const LatticeStart& s = flow.config().starts[q];
  const int level = flow.config().level;
  const std::int64_t z = flow.at(q, k);
  const int tau = hitting_time(flow, q);
  if (tau == kNever || k < tau) return KernelMeasure::dirac(start_point({s.time_index, z, s.ray}, spec, level));
  if (z == 0) return KernelMeasure::dirac(GraphPoint::origin(spec.n_rays()));
  const double radius = std::ldexp(static_cast<double>(std::abs(z)), -level);
  KernelMeasure out;
  for (int ray = 1; ray <= spec.n_rays(); ++ray) {
    if (spec.is_plus_ray(ray) == (z > 0))
      out.atoms.push_back({GraphPoint::make(ray, radius, spec.n_rays()), spec.conditional_weight(ray)});
  }
  return out;
}

RayWeights extract_ray_weights(const FlowEnsemble& ensemble, int q, int k) {
  if (ensemble.tau(q) == kNever || k < ensemble.tau(q))
    fail(ErrorCode::BeforeHitting, "ray weights are defined after the hitting time");
  const GraphSpec& spec = ensemble.spec();
  const std::vector<double> masses = ensemble.kernel(q, k).ray_masses(spec.n_rays());
  RayWeights out;
  out.plus.assign(masses.begin(), masses.begin() + spec.p());
  out.minus.assign(masses.begin() + spec.p(), masses.end());
  return out;
}

namespace {

LatticeStart start_for_atom(const GraphPoint& y, int t_index, const GraphSpec& spec, int level) {
  return lattice_start(spec, level, std::ldexp(static_cast<double>(t_index), -2 * level), y);
}

int find_start(const LatticeFlowConfig& cfg, const LatticeStart& want) {
  for (int i = 0; i < static_cast<int>(cfg.starts.size()); ++i) {
    const LatticeStart& s = cfg.starts[i];
    if (s.time_index == want.time_index && s.position == want.position &&
        (want.position == 0 || s.ray == want.ray))
      return i;
  }
  return -1;
}

}  // namespace

LatticeFlowConfig with_intermediate_starts(const FlowEnsemble& ensemble, int q, int t_index) {
  LatticeFlowConfig cfg = ensemble.scalar().config();
  for (const auto& atom : ensemble.kernel(q, t_index).atoms) {
    const LatticeStart s = start_for_atom(atom.point, t_index, ensemble.spec(), cfg.level);
    if (find_start(cfg, s) < 0) cfg.starts.push_back(s);
  }
  return cfg;
}

double flow_property_check(const FlowEnsemble& ensemble, int q, int t_index, int u_index) {
  const ScalarFlow& flow = ensemble.scalar();
  const int s_index = flow.config().starts[q].time_index;
  if (!(s_index <= t_index && t_index <= u_index && u_index <= flow.steps()))
    fail(ErrorCode::InvalidArgument, "need s <= t <= u within the horizon");
  KernelMeasure composed;
  for (const auto& atom : ensemble.kernel(q, t_index).atoms) {
    const LatticeStart want = start_for_atom(atom.point, t_index, ensemble.spec(), flow.config().level);
    const int idx = find_start(flow.config(), want);
    if (idx < 0) fail(ErrorCode::MissingIntermediateStart, "no start registered at an atom of K_{s,t}(x)");
    for (const auto& inner : ensemble.kernel(idx, u_index).atoms) {
      auto it = std::find_if(composed.atoms.begin(), composed.atoms.end(),
                             [&](const KernelAtom& a) { return a.point == inner.point; });
      if (it == composed.atoms.end()) composed.atoms.push_back({inner.point, atom.weight * inner.weight});
      else it->weight += atom.weight * inner.weight;
    }
  }
  return total_variation(ensemble.kernel(q, u_index), composed);
}

std::optional<Probe> find_probe(const FlowEnsemble& ensemble, int q) {
  if (ensemble.tau(q) == kNever) return std::nullopt;
  for (int k = ensemble.scalar().steps(); k >= ensemble.tau(q); --k) {
    if (ensemble.scalar().at(q, k) != 0) return Probe{q, k};
  }
  return std::nullopt;
}

namespace {

std::optional<Probe> first_probe(const FlowEnsemble& ensemble) {
  for (int q = 0; q < ensemble.n_starts(); ++q) {
    if (auto p = find_probe(ensemble, q)) return p;
  }
  return std::nullopt;
}

TestReport no_probe_report(const std::string& name, int replicas) {
  TestReport r;
  r.name = name;
  r.replicas = replicas;
  r.pass = false;
  r.details.emplace_back("no_probe", 1.0);
  return r;
}

/// Binomial-scale z-scores of averaged ray weights against target weights.
void compare_weights(TestReport& report, const std::vector<double>& mean_deviation,
                     const std::vector<double>& target, int replicas, double z_bound) {
  double worst_dev = 0.0;
  double worst_z = 0.0;
  bool pass = true;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double w = target[i];
    const double dev = mean_deviation[i];
    const double sigma = std::sqrt(w * (1.0 - w) / replicas);
    worst_dev = std::max(worst_dev, std::abs(dev));
    if (sigma > 0.0) {
      worst_z = std::max(worst_z, std::abs(dev) / sigma);
      pass = pass && std::abs(dev) <= z_bound * sigma;
    } else {
      pass = pass && dev == 0.0;
    }
    report.details.emplace_back("ray" + std::to_string(i + 1) + "_target", w);
    report.details.emplace_back("ray" + std::to_string(i + 1) + "_mean", w + dev);
  }
  report.statistic = worst_dev;
  report.threshold = z_bound;
  report.details.emplace_back("max_abs_z", worst_z);
  report.pass = pass;
}

}  // namespace

TestReport filter_mapping_to_kernel(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                    const MeasurePairSampler& m, int replicas,
                                    const RngStream& stream, double z_bound) {
  const FlowEnsemble kernels(skew_lattice_flow(cfg, spec, stream), spec, measure_marker(m, stream));
  const auto probe = first_probe(kernels);
  if (!probe) return no_probe_report("filter_mapping_to_kernel", replicas);
  const std::vector<double> target = kernels.kernel(probe->start, probe->time_index).ray_masses(spec.n_rays());
  std::vector<long long> counts(spec.n_rays(), 0);
  const ExcursionMarker u_marks = measure_marker(m, stream);
  for (int r = 0; r < replicas; ++r) {
    const FlowEnsemble phi(kernels.scalar(), spec,
                           filtered_marker(u_marks, stream.child({purpose::kReplica, static_cast<std::uint64_t>(r)})));
    const KernelMeasure k = phi.kernel(probe->start, probe->time_index);
    ++counts[k.atoms.front().point.ray - 1];
  }
  std::vector<double> deviation(spec.n_rays());
  for (int i = 0; i < spec.n_rays(); ++i)
    deviation[i] = static_cast<double>(counts[i]) / replicas - target[i];
  TestReport report;
  report.name = "filter_mapping_to_kernel";
  report.replicas = replicas;
  compare_weights(report, deviation, target, replicas, z_bound);
  return report;
}

TestReport project_kernel_to_wiener(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                    const MeasurePairSampler& m, int replicas,
                                    const RngStream& stream, double z_bound) {
  const ScalarFlow flow = skew_lattice_flow(cfg, spec, stream);
  const FlowEnsemble wiener(flow, spec, wiener_marker(spec));
  const auto probe = first_probe(wiener);
  if (!probe) return no_probe_report("project_kernel_to_wiener", replicas);
  const std::vector<double> target = wiener.kernel(probe->start, probe->time_index).ray_masses(spec.n_rays());
  std::vector<double> deviation(spec.n_rays(), 0.0);
  for (int r = 0; r < replicas; ++r) {
    const FlowEnsemble k(flow, spec,
                         measure_marker(m, stream.child({purpose::kReplica, static_cast<std::uint64_t>(r)})));
    const std::vector<double> w = k.kernel(probe->start, probe->time_index).ray_masses(spec.n_rays());
    for (int i = 0; i < spec.n_rays(); ++i) deviation[i] += w[i] - target[i];
  }
  for (double& d : deviation) d /= replicas;
  TestReport report;
  report.name = "project_kernel_to_wiener";
  report.replicas = replicas;
  compare_weights(report, deviation, target, replicas, z_bound);
  return report;
}

double sample_merge_level(int level, std::int64_t y, double alpha_plus, std::int64_t cap,
                          std::int64_t max_steps, RngStream stream) {
  if (y <= 0) fail(ErrorCode::InvalidArgument, "start gap must be positive");
  const OriginRule rule = OriginRule::for_alpha_plus(alpha_plus);
  std::int64_t lower = 0;
  std::int64_t upper = y;
  std::int64_t w = 0;
  std::int64_t steps_taken = 0;
  std::uint64_t bits = 0;
  int bits_left = 0;
  // lower - w is the local-time term of the path from 0, a lower bound for U
  while (lower != upper && lower - w < cap && steps_taken < max_steps) {
    ++steps_taken;
    if (bits_left == 0) {
      bits = stream.next_u64();
      bits_left = 64;
    }
    Coin c;
    c.xi = (bits & 1U) ? 1 : -1;
    bits >>= 1;
    --bits_left;
    // the origin coin is only needed when a path sits at 0
    if (lower == 0 || upper == 0) c.u = stream.uniform();
    lower = lattice_step(lower, c, rule);
    upper = lattice_step(upper, c, rule);
    w += c.xi;
  }
  if (lower != upper) return std::numeric_limits<double>::infinity();
  return std::ldexp(-static_cast<double>(w), -level);
}

std::vector<double> sample_merge_levels(int level, std::int64_t y, double alpha_plus, int count,
                                        std::int64_t cap, std::int64_t max_steps,
                                        const RngStream& stream) {
  std::vector<double> out;
  out.reserve(count);
  for (int r = 0; r < count; ++r)
    out.push_back(sample_merge_level(level, y, alpha_plus, cap, max_steps,
                                     stream.child({purpose::kReplica, static_cast<std::uint64_t>(r)})));
  return out;
}

void write_ensemble_csv(std::ostream& out, const FlowEnsemble& ensemble, int replica, bool header,
                        int stride) {
  if (stride < 1) fail(ErrorCode::InvalidArgument, "export stride must be positive");
  if (header) out << "replica,start_index,time,ray,radius,weight\n";
  const ScalarFlow& flow = ensemble.scalar();
  const double dt = flow.config().dt();
  for (int q = 0; q < ensemble.n_starts(); ++q) {
    for (int k = flow.config().starts[q].time_index; k <= flow.steps(); ++k) {
      if (k % stride != 0 && k != flow.steps()) continue;
      for (const auto& a : ensemble.kernel(q, k).atoms) {
        out << replica << ',' << q << ',' << format_number(k * dt) << ',' << a.point.ray << ','
            << format_number(a.point.radius) << ',' << format_number(a.weight) << '\n';
      }
    }
  }
}

}  // namespace walsh
