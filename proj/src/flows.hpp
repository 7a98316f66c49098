// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

// Shared-coin lattice flow of skew Brownian motion, and the kernel and
// mapping flows on G obtained by marking its excursions.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pathkit.hpp"
#include "rng.hpp"
#include "stargraph.hpp"
#include "stats.hpp"

namespace walsh {

inline constexpr int kNever = -1;

/// A start (s, x): s = time_index·dt, scalar position ε(x)|x| in lattice
/// units, and the ray of x (any ray of the right sign when x is the origin).
struct LatticeStart {
  int time_index = 0;
  std::int64_t position = 0;
  int ray = 0;
  friend bool operator==(const LatticeStart&, const LatticeStart&) = default;
};

struct LatticeFlowConfig {
  int level = 6;         // space step 2^-level, time step 4^-level
  double horizon = 1.0;  // rounded to the nearest grid time
  std::vector<LatticeStart> starts;  // order is construction priority

  double dx() const;
  double dt() const;
  int steps() const;
  TimeGrid grid() const;
  void validate(const GraphSpec& spec) const;
};

/// Throws OffLatticeStart when s or |x| is not on the level's grid.
LatticeStart lattice_start(const GraphSpec& spec, int level, double s, const GraphPoint& x);
/// Scalar start for the two-sided flow; the ray is chosen as 1 or N by sign.
LatticeStart lattice_start_scalar(const GraphSpec& spec, int level, double s, double x);
GraphPoint start_point(const LatticeStart& start, const GraphSpec& spec, int level);

/// Behaviour of the walk at 0: after coin ξ = +1 it moves up with
/// probability `up`, after ξ = -1 down with probability `down`, else stays.
struct OriginRule {
  double up = 1.0;
  double down = 1.0;
  static OriginRule for_alpha_plus(double alpha_plus);
};

struct Coin {
  int xi = 1;
  double u = 0.5;
};

/// Per-step coins shared by every start: coin k drives the move k → k+1.
class LatticeCoins {
 public:
  LatticeCoins(const RngStream& stream, int steps);
  const Coin& operator[](int k) const { return coins_[k]; }
  int steps() const { return static_cast<int>(coins_.size()); }

 private:
  std::vector<Coin> coins_;
};

Coin coin_from_bits(std::uint64_t bits);
std::int64_t lattice_step(std::int64_t z, const Coin& coin, const OriginRule& rule);

/// Scalar trajectories Z_{s,·}(x) for all starts, in lattice units.
class ScalarFlow {
 public:
  ScalarFlow(LatticeFlowConfig cfg, std::vector<std::vector<std::int64_t>> paths,
             std::vector<std::int64_t> driver);

  const LatticeFlowConfig& config() const { return cfg_; }
  int n_starts() const { return static_cast<int>(paths_.size()); }
  int steps() const { return static_cast<int>(driver_.size()) - 1; }
  bool defined(int q, int k) const { return k >= cfg_.starts[q].time_index && k <= steps(); }
  std::int64_t at(int q, int k) const;
  /// W_k = Σ_{j<k} ξ_j in lattice units.
  std::int64_t driver(int k) const { return driver_[k]; }

 private:
  LatticeFlowConfig cfg_;
  std::vector<std::vector<std::int64_t>> paths_;  // paths_[q][k - s_q]
  std::vector<std::int64_t> driver_;
};

ScalarFlow skew_lattice_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                             const RngStream& stream);

/// τ_{s,x}: first index ≥ s where the trajectory is 0, or kNever.
int hitting_time(const ScalarFlow& flow, int q);

/// First index where both trajectories are defined and equal; nullopt if
/// they never meet before the horizon.
std::optional<int> coalescence_time(const ScalarFlow& flow, int i, int j);

struct KernelAtom {
  GraphPoint point;
  double weight = 0.0;
  friend bool operator==(const KernelAtom&, const KernelAtom&) = default;
};

struct KernelMeasure {
  std::vector<KernelAtom> atoms;

  static KernelMeasure dirac(const GraphPoint& x) { return {{{x, 1.0}}}; }
  void validate() const;
  double total_mass() const;
  /// Mass of each ray off the junction, indexed by ray - 1.
  std::vector<double> ray_masses(int n_rays) const;
  friend bool operator==(const KernelMeasure&, const KernelMeasure&) = default;
};

/// Σ |μ({x}) - ν({x})| over the union of supports.
double total_variation(const KernelMeasure& mu, const KernelMeasure& nu);

enum class MeasureKind { Wiener, DiracVertices, Dirichlet, UniformSimplex, Custom };

MeasureKind parse_measure_kind(const std::string& name);
std::string to_string(MeasureKind kind);

/// A probability measure on the simplex Δ_k.
class SimplexSampler {
 public:
  SimplexSampler(MeasureKind kind, std::vector<double> ratios, double concentration = 1.0,
                 std::vector<double> custom = {});

  int dimension() const { return static_cast<int>(ratios_.size()); }
  MeasureKind kind() const { return kind_; }
  /// ∫ u m(du), the actual mean of the measure.
  std::vector<double> mean() const;
  std::vector<double> sample(RngStream& stream) const;

 private:
  MeasureKind kind_;
  std::vector<double> ratios_;
  double concentration_;
  std::vector<double> custom_;
};

struct MeasureOptions {
  double concentration = 1.0;         // Dirichlet(κ·ratios)
  std::vector<double> custom_plus;    // Dirac point for the Custom kind
  std::vector<double> custom_minus;
  bool enforce_moments = true;        // reject measures whose mean is not α_i/α±
};

/// (m⁺, m⁻) with declared means (α_i/α⁺)_{i≤p} and (α_j/α⁻)_{j>p}.
class MeasurePairSampler {
 public:
  static MeasurePairSampler create(const GraphSpec& spec, MeasureKind kind,
                                   const MeasureOptions& opts = {});

  const SimplexSampler& side(int sign) const { return sign > 0 ? plus_ : minus_; }
  const std::vector<double>& declared_mean(int sign) const {
    return sign > 0 ? plus_mean_ : minus_mean_;
  }
  MeasureKind kind() const { return plus_.kind(); }
  /// max |mean - declared| over both sides.
  double mean_defect() const;
  /// Empirical means over `samples` draws per side against the declared means at 3σ.
  TestReport moment_check(int samples, const RngStream& stream) const;

 private:
  MeasurePairSampler(SimplexSampler plus, SimplexSampler minus, std::vector<double> plus_mean,
                     std::vector<double> minus_mean);
  SimplexSampler plus_;
  SimplexSampler minus_;
  std::vector<double> plus_mean_;
  std::vector<double> minus_mean_;
};

/// Weights on the rays of one side for the excursion of start `start` with
/// the given label and sign (+1: rays 1..p, -1: rays p+1..N).
using ExcursionMarker =
    std::function<std::vector<double>(int start, const DyadicLabel& label, int sign)>;

ExcursionMarker wiener_marker(const GraphSpec& spec);
ExcursionMarker measure_marker(const MeasurePairSampler& m, const RngStream& stream);
/// One-hot marks γ drawn from categorical(base marks).
ExcursionMarker filtered_marker(ExcursionMarker base, const RngStream& stream);

struct FlowExcursion {
  int g = 0;
  int d = kOpenEnd;
  int sign = 1;
  DyadicLabel label;
};

/// Kernel-valued flow: scalar skeleton, coalescence structure and marks.
class FlowEnsemble {
 public:
  FlowEnsemble(ScalarFlow flow, GraphSpec spec, ExcursionMarker marker);

  const ScalarFlow& scalar() const { return flow_; }
  const GraphSpec& spec() const { return spec_; }
  int n_starts() const { return flow_.n_starts(); }
  int tau(int q) const { return tau_[q]; }
  /// First common zero with an earlier start, or kNever.
  int merge_time(int q) const { return merge_[q]; }
  /// Lowest-index earlier start at 0 at merge_time(q), or -1.
  int parent(int q) const { return parent_[q]; }
  /// The unmerged start whose marks decide K(q) at time k.
  int root(int q, int k) const;

  KernelMeasure kernel(int q, int k) const;
  /// Excursions of Z_q in [τ_q, merge_time(q)) that carry q's own marks.
  std::vector<FlowExcursion> own_excursions(int q) const;
  FlowExcursion excursion_at(int q, int k) const;
  /// Side weights carried by excursion e of start q.
  std::vector<double> marks(int q, const FlowExcursion& e) const { return marker_(q, e.label, e.sign); }

 private:
  ScalarFlow flow_;
  GraphSpec spec_;
  ExcursionMarker marker_;
  std::vector<int> tau_;
  std::vector<int> merge_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> zeros_;  // absolute zero indices per start
};

FlowEnsemble sample_kernel_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                const MeasurePairSampler& m, const RngStream& stream);
FlowEnsemble sample_mapping_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                 const RngStream& stream);
FlowEnsemble sample_wiener_flow(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                const RngStream& stream);

/// Closed-form K^W from the trajectory of start q alone.
KernelMeasure wiener_kernel(const ScalarFlow& flow, int q, int k, const GraphSpec& spec);

struct RayWeights {
  std::vector<double> plus;   // V^{+,i}, i ≤ p
  std::vector<double> minus;  // V^{-,j}, j > p
};

/// Throws BeforeHitting when k < τ_q.
RayWeights extract_ray_weights(const FlowEnsemble& ensemble, int q, int k);

/// Adds starts (t, y) for every atom y of K_{s,t}(x) not already present.
LatticeFlowConfig with_intermediate_starts(const FlowEnsemble& ensemble, int q, int t_index);

/// TV distance between K_{s,u}(x) and ∫ K_{s,t}(x)(dy) K_{t,u}(y).
double flow_property_check(const FlowEnsemble& ensemble, int q, int t_index, int u_index);

struct Probe {
  int start = 0;
  int time_index = 0;
};

/// Latest time index after τ with the trajectory off 0, or nullopt.
std::optional<Probe> find_probe(const FlowEnsemble& ensemble, int q);

/// Fixed W and U-family, γ resampled: ray occupancy of φ vs the kernel weights.
TestReport filter_mapping_to_kernel(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                    const MeasurePairSampler& m, int replicas,
                                    const RngStream& stream, double z_bound = 3.0);

/// Fixed W, U-family resampled: averaged kernel weights vs α_i/α±.
TestReport project_kernel_to_wiener(const LatticeFlowConfig& cfg, const GraphSpec& spec,
                                    const MeasurePairSampler& m, int replicas,
                                    const RngStream& stream, double z_bound = 3.0);

/// Merge levels U(0, y) = -W_T of the pair started at 0 and y (lattice units)
/// at time 0. A pair still apart when its local-time term reaches `cap` or
/// after `max_steps` steps is censored and reported as +∞.
double sample_merge_level(int level, std::int64_t y, double alpha_plus, std::int64_t cap,
                          std::int64_t max_steps, RngStream stream);
/// Sample i uses stream.child({kReplica, i}).
std::vector<double> sample_merge_levels(int level, std::int64_t y, double alpha_plus, int count,
                                        std::int64_t cap, std::int64_t max_steps,
                                        const RngStream& stream);

/// Rows at time indices that are multiples of `stride`, plus the horizon.
void write_ensemble_csv(std::ostream& out, const FlowEnsemble& ensemble, int replica,
                        bool header = true, int stride = 1);

}  // namespace walsh
