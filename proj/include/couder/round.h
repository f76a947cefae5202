#pragma once

// Rounding a fractional topology onto the OCS bank: Lagrangian dual method
// with per-switch min-cost circulation subproblems, a greedy baseline, and
// quality metrics.

#include <vector>

#include "couder/circulation.h"
#include "couder/model.h"
#include "couder/optimize.h"

namespace couder {

// Soft bounds c_minus <= sum_m x_ij^m <= c_plus and their multipliers.
struct DualState {
  RealMatrix p_plus;
  RealMatrix p_minus;
  IntMatrix c_minus;  // floor(d*), after snapping near-integers
  IntMatrix c_plus;   // ceil(d*)
  int iteration = 0;
};

// Zero multipliers; entries within kTolerance of an integer snap to it.
DualState InitialDuals(const FractionalTopology& d_star);

struct RoundingReport {
  IntegerTopology x;
  int goodness = 0;  // off-diagonal pairs meeting their soft bounds
  double violation_ratio = 0.0;
  int iterations_run = 0;
};

inline constexpr int kDefaultLdmIterations = 50;

RoundingReport LdmRound(const PhysicalTopology& phys, const FractionalTopology& d_star,
                        int tau_max = kDefaultLdmIterations);

// One link at a time to the largest residual demand, switch by switch, until
// no port pair is left; ties go to the lexicographically smallest pair.
RoundingReport GreedyRound(const PhysicalTopology& phys, const FractionalTopology& d_star);

int Goodness(const DualState& duals, const IntMatrix& aggregate);
double ViolationRatio(const DualState& duals, const IntMatrix& aggregate);

// Objective U_ij^m(x) = -(x - h_ij^m)^2 with h_ij^m the smaller of the two
// port counts on switch m.
double SwitchUtility(const PhysicalTopology& phys, const IntegerTopology& x);

// sum U + p+ (c+ - X) + p- (X - c-).
double Lagrangian(const PhysicalTopology& phys, const DualState& duals,
                  const IntegerTopology& x);

// Linearized subproblem of switch `ocs` around x_hat: costs 2(x_hat - h) +
// p+ - p-, move limits [max(x_hat - 1, 0), x_hat + 1], the switch's port
// budgets as caps.
SubproblemSpec LdmSubproblem(const PhysicalTopology& phys, const DualState& duals,
                             const IntegerTopology& x_hat, int ocs);

// Projected subgradient step with the given step size.
void UpdateDuals(DualState& duals, const IntMatrix& aggregate, double step);

struct GapResult {
  double gap = 0.0;
  bool clamped = false;  // the raw gap was negative
};

// 1 - mu_int / mu_frac, with mu_frac the best throughput over d_star and
// mu_int the best over the rounded topology. Errors: mu_frac == 0 ->
// undefined.
GapResult OptimalityGap(const PhysicalTopology& phys, const RoundingReport& report,
                        const FractionalTopology& d_star,
                        const std::vector<TrafficMatrix>& critical,
                        const PipelineOptions& options = {});

}  // namespace couder
