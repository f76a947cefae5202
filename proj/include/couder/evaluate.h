#pragma once

// Fluid-model evaluation, baseline constructions and the staged
// reconfiguration simulator.

#include <cstdint>
#include <limits>
#include <vector>

#include "couder/model.h"
#include "couder/optimize.h"

namespace couder {

inline constexpr double kInfiniteMlu = std::numeric_limits<double>::infinity();

struct EvalRecord {
  double mlu = 0.0;  // kInfiniteMlu when demand crosses a missing link
  double ahc = 1.0;
  RealMatrix per_link_util;
  double direct_fraction = 1.0;
  bool feasible = true;

  bool operator==(const EvalRecord&) const = default;
};

// Link loads of t routed with omega over `links` (counts per pair, real or
// integral). An all-zero TM reports mlu 0 and ahc 1.
EvalRecord EvaluateStatic(const RealMatrix& links, const RoutingWeights& omega,
                          const TrafficMatrix& t, double link_bandwidth);
EvalRecord EvaluateStatic(const IntegerTopology& x, const RoutingWeights& omega,
                          const TrafficMatrix& t, double link_bandwidth);

// Smallest MLU over all routings of t on fixed links; kInfiniteMlu when a
// demanded pair has no path.
double OptimalRoutingMlu(const RealMatrix& links, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options = {});
double OptimalRoutingMlu(const IntegerTopology& x, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options = {});

// Min-MLU routing on fixed links; ties broken toward direct paths. Pairs
// without demand route directly.
struct TeRouting {
  double mlu = 0.0;
  RoutingWeights omega;
};
TeRouting OptimalRouting(const RealMatrix& links, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options = {});
TeRouting OptimalRouting(const IntegerTopology& x, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options = {});

// 1 / mu of the joint fractional topology and routing optimum for t alone.
double IdealToeMlu(const PhysicalTopology& phys, const TrafficMatrix& t,
                   const PipelineOptions& options = {});

// Each pod's egress budget spread evenly over the other pods, remainders
// going to the next pods in cyclic order, then packed onto the switches.
IntegerTopology UniformMesh(const PhysicalTopology& phys);

// Per pair, weights proportional to path bottleneck capacity.
RoutingWeights VlbWeights(const IntMatrix& links);
RoutingWeights DirectOnlyWeights(int num_pods);

// Non-blocking spine abstraction: every pod gets pod_uplinks * b / oversub
// up and down; AHC is 2.
EvalRecord FatTreeEval(const TrafficMatrix& t, int pod_uplinks, double link_bandwidth,
                       double oversub);

// SEN_ab = max over paths through (a, b) of omega_p / (links_ab * b).
RealMatrix SensitivityMap(const RealMatrix& links, const RoutingWeights& omega,
                          double link_bandwidth);

// Changing-link stages for a switched fraction p with predicted MLU alpha.
int StageCount(double changed_fraction, double alpha_pred);

// Fraction of circuits of `from` that are not kept in `to`, per switch.
double ChangedFraction(const IntegerTopology& from, const IntegerTopology& to);

struct ReconfigPolicy {
  double frequency = 3600.0;      // seconds between reconfigurations
  double stage_latency = 0.0;     // seconds per stage
  double alpha_pred = 0.5;
  double lookback = 3600.0;       // seconds of history
  int k = 5;
  std::uint64_t seed = 1;
  int ldm_iterations = 50;
  PipelineOptions pipeline;
};

struct SimSample {
  double time = 0.0;
  EvalRecord record;
  int epoch = -1;  // -1 before the first topology exists
  int stage = 0;   // 1-based stage during a transition, 0 otherwise
  double max_sensitivity = 0.0;
};

struct EpochInfo {
  double time = 0.0;
  double changed_fraction = 0.0;
  int stages = 0;
  double mu = 0.0;
};

struct SimResult {
  std::vector<SimSample> samples;
  std::vector<EpochInfo> epochs;
};

// Epochs fall at multiples of policy.frequency after the first TM. Each
// epoch extracts criticals from the lookback window, merges them into the
// growing critical set, runs the pipeline, rounds, recomputes routing and
// switches in StageCount stages. TMs before the first epoch are not scored.
SimResult SimulateReconfig(const PhysicalTopology& phys, const TmSequence& seq,
                           const ReconfigPolicy& policy);

}  // namespace couder
