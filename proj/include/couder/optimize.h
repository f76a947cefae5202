#pragma once

// Fractional topology + routing pipeline: max-min throughput, sensitivity
// reduction and hop-count minimization over the two-hop path universe.

#include <optional>
#include <vector>

#include "couder/lp.h"
#include "couder/model.h"

namespace couder {

// How the sensitivity cap of a path is indexed.
enum class SensitivityCap {
  kPerLink,  // omega_p <= beta * d_ab * b for every link (a, b) on p
  kLiteral,  // omega_p <= beta * d_ij * b with (i, j) the path's own pair
};

struct PipelineOptions {
  double beta_tolerance = 1e-3;  // relative bracket width
  double beta_cap = 1e6;
  SensitivityCap cap_mode = SensitivityCap::kPerLink;
  bool desensitize = true;  // false skips the beta search and its cap
  lp::SolverOptions lp;
};

struct FractionalSolution {
  FractionalTopology d;
  RoutingWeights omega;  // omega.mu / omega.beta mirror the fields below
  double mu = 0.0;
  std::optional<double> beta;
};

// Largest mu such that mu * T_k is routable for every k with one shared
// weight set. Errors: unbounded when every critical TM is zero.
FractionalSolution SolveMaxminThroughput(const PhysicalTopology& phys,
                                         const std::vector<TrafficMatrix>& critical,
                                         const PipelineOptions& options = {});

// Binary search for the smallest sensitivity bound that keeps mu_star
// routable. Returns the solution at the final upper bracket.
FractionalSolution Desensitize(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical, double mu_star,
                               const PipelineOptions& options = {});

// Maximizes the minimum over k of the direct-path traffic at throughput
// mu_star, under the sensitivity cap when beta is given.
FractionalSolution MinimizeAhc(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical, double mu_star,
                               std::optional<double> beta,
                               const PipelineOptions& options = {});

// Steps 1-3 in sequence (step 2 skipped when options.desensitize is false).
FractionalSolution RunPipeline(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical,
                               const PipelineOptions& options = {});

// Steps 1-3 with the link counts frozen. Errors: infeasible when some
// demanded pair cannot be routed at all.
FractionalSolution RecomputeRouting(const PhysicalTopology& phys, const RealMatrix& links,
                                    const std::vector<TrafficMatrix>& critical,
                                    const PipelineOptions& options = {});
FractionalSolution RecomputeRouting(const PhysicalTopology& phys, const IntegerTopology& x,
                                    const std::vector<TrafficMatrix>& critical,
                                    const PipelineOptions& options = {});

// Step 1 alone on frozen link counts: the best throughput any routing
// achieves over `links`.
double FrozenThroughput(const PhysicalTopology& phys, const RealMatrix& links,
                        const std::vector<TrafficMatrix>& critical,
                        const PipelineOptions& options = {});
double FrozenThroughput(const PhysicalTopology& phys, const IntegerTopology& x,
                        const std::vector<TrafficMatrix>& critical,
                        const PipelineOptions& options = {});

// Reference formulation with an independent weight set per critical TM.
struct PerTmSolution {
  FractionalTopology d;
  std::vector<RoutingWeights> omegas;
  double mu = 0.0;
};
PerTmSolution SolveMaxminPerTm(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical,
                               const PipelineOptions& options = {});

// Mean over ordered pairs of the max-flow between them using paths of at
// most max_hops hops, on a hop-layered expansion. Exact for max_hops <= 2;
// for longer paths a link may be reused across layers, so the value is an
// upper bound capped by the egress radix.
double ComputePathCapacity(const IntMatrix& links, double link_bandwidth, int max_hops);

// Largest sensitivity omega_p / (cap of a link on p) over all paths, with
// links[a][b] * b as capacity. Zero-weight paths are ignored.
double MaxSensitivity(const RealMatrix& links, double link_bandwidth,
                      const RoutingWeights& omega);

}  // namespace couder
