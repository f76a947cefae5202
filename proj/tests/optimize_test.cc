#include "couder/optimize.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "couder/evaluate.h"
#include "test_util.h"

namespace couder {
namespace {

using testing_util::DemandedSensitivity;
using testing_util::GridOracleN3;
using testing_util::RandomStriping;
using testing_util::RandomTm;
using testing_util::ToReal;
using testing_util::WorstBoundExcess;

TrafficMatrix Tm(int n, std::initializer_list<std::tuple<int, int, double>> entries) {
  RealMatrix m(n, n, 0.0);
  for (auto [i, j, v] : entries) m(i, j) = v;
  return TrafficMatrix(m);
}

PhysicalTopology TwoPods() { return UniformStriping(2, 1, 4, 1.0); }

double DirectShare(const RoutingWeights& w, const TrafficMatrix& t) {
  PathSet paths(w.num_pods);
  double s = 0;
  for (int i = 0; i < w.num_pods; ++i)
    for (int j = 0; j < w.num_pods; ++j)
      if (i != j) s += t(i, j) * w.weights[paths.PairOffset(i, j)];
  return s;
}

TEST(MaxminThroughputTest, TwoPodClosedForm) {
  FractionalSolution s = SolveMaxminThroughput(TwoPods(), {Tm(2, {{0, 1, 8}, {1, 0, 8}})});
  EXPECT_NEAR(s.mu, 0.5, 1e-9);
  EXPECT_NEAR(s.d.d(0, 1), 4.0, 1e-9);
  EXPECT_NEAR(s.d.d(1, 0), 4.0, 1e-9);
}

TEST(MaxminThroughputTest, IngressBoundBinds) {
  PhysicalTopology phys = UniformStriping(3, 1, 2, 1.0);
  FractionalSolution s = SolveMaxminThroughput(phys, {Tm(3, {{0, 1, 4}})});
  EXPECT_NEAR(s.mu, 0.5, 1e-9);
  EXPECT_NEAR(GridOracleN3(phys, {Tm(3, {{0, 1, 4}})}, 0.05, 0).mu, 0.5, 1e-9);
}

TEST(MaxminThroughputTest, DuplicateCriticalsChangeNothing) {
  std::mt19937_64 rng(3);
  PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
  TrafficMatrix t = RandomTm(rng, 4, 1, 10);
  const double one = SolveMaxminThroughput(phys, {t}).mu;
  const double three = SolveMaxminThroughput(phys, {t, t, t}).mu;
  EXPECT_NEAR(one, three, 1e-9 * one);
}

TEST(MaxminThroughputTest, AllZeroCriticalsAreUnbounded) {
  try {
    SolveMaxminThroughput(TwoPods(), {TrafficMatrix(RealMatrix(2, 2, 0.0))});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnbounded);
  }
}

TEST(MaxminThroughputTest, MatchesGridOracleOnThreePods) {
  for (int seed = 0; seed < 6; ++seed) {
    std::mt19937_64 rng(100 + seed);
    PhysicalTopology phys = RandomStriping(rng, 3, 2, 1, 3);
    std::vector<TrafficMatrix> crit = {RandomTm(rng, 3, 1, 10, 0.4), RandomTm(rng, 3, 1, 10, 0.4)};
    if (crit[0].IsZero() && crit[1].IsZero()) continue;
    const double lp = SolveMaxminThroughput(phys, crit).mu;
    const double grid = GridOracleN3(phys, crit, 0.05, 0).mu;
    EXPECT_LE(grid, lp * (1 + 1e-9)) << "seed " << seed;
    EXPECT_GE(grid, lp * (1 - 5e-2)) << "seed " << seed;
  }
}

TEST(MaxminThroughputTest, PerTmWeightsNeverLoseThroughput) {
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(200 + seed);
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    std::vector<TrafficMatrix> crit;
    for (int k = 0; k < 3; ++k) crit.push_back(RandomTm(rng, 4, 0, 10, 0.3));
    const double shared = SolveMaxminThroughput(phys, crit).mu;
    const double separate = SolveMaxminPerTm(phys, crit).mu;
    EXPECT_GE(separate, shared * (1 - 1e-9));
  }
}

TEST(DesensitizeTest, TwoPodBeta) {
  std::vector<TrafficMatrix> crit = {Tm(2, {{0, 1, 8}, {1, 0, 8}})};
  FractionalSolution s = Desensitize(TwoPods(), crit, 0.5);
  ASSERT_TRUE(s.beta);
  EXPECT_NEAR(*s.beta, 0.25, 0.25 * 2e-3);
}

TEST(DesensitizeTest, HalvedDemandWithDoubledThroughputKeepsBeta) {
  std::mt19937_64 rng(5);
  PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
  TrafficMatrix t = RandomTm(rng, 4, 1, 10);
  RealMatrix half = t.demand();
  for (double& v : half.flat()) v /= 2;
  const double mu = SolveMaxminThroughput(phys, {t}).mu;
  FractionalSolution a = Desensitize(phys, {t}, mu * (1 - 1e-9));
  FractionalSolution b = Desensitize(phys, {TrafficMatrix(half)}, 2 * mu * (1 - 1e-9));
  EXPECT_NEAR(*a.beta, *b.beta, *a.beta * 3e-3);
}

TEST(DesensitizeTest, NoWorseThanStepOneSensitivity) {
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(300 + seed);
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    std::vector<TrafficMatrix> crit = {RandomTm(rng, 4, 1, 10, 0.2), RandomTm(rng, 4, 1, 10, 0.2)};
    FractionalSolution step1 = SolveMaxminThroughput(phys, crit);
    FractionalSolution step2 = Desensitize(phys, crit, step1.mu * (1 - 1e-9));
    const double before = DemandedSensitivity(step1.d.d, step1.omega, crit, 1.0);
    EXPECT_LE(*step2.beta, before * (1 + 2e-3)) << "seed " << seed;
  }
}

TEST(MaxminThroughputTest, UniformDemandOnSymmetricFabric) {
  PhysicalTopology phys = UniformStriping(4, 2, 1, 1.0);
  RealMatrix u(4, 4, 3.0);
  for (int i = 0; i < 4; ++i) u(i, i) = 0;
  // Two-hop paths only cost capacity: each pod spreads radix 2 over demand 9.
  EXPECT_NEAR(SolveMaxminThroughput(phys, {TrafficMatrix(u)}).mu, 2.0 / 9, 1e-9);
}

TEST(MinimizeAhcTest, TwoPodsRouteEverythingDirect) {
  std::vector<TrafficMatrix> crit = {Tm(2, {{0, 1, 8}, {1, 0, 2}})};
  FractionalSolution s = RunPipeline(TwoPods(), crit);
  EXPECT_NEAR(DirectShare(s.omega, crit[0]), 10.0, 1e-9);
}

TEST(MinimizeAhcTest, AmplePortsGiveDirectOnly) {
  PhysicalTopology phys = UniformStriping(4, 2, 4, 1.0);
  std::vector<TrafficMatrix> crit = {Tm(4, {{1, 2, 3}})};
  FractionalSolution s = RunPipeline(phys, crit);
  EvalRecord r = EvaluateStatic(s.d.d, s.omega, crit[0], 1.0);
  EXPECT_NEAR(r.ahc, 1.0, 1e-9);
}

TEST(MinimizeAhcTest, ConstrainedThreePodsNeedNoDetour) {
  // The ingress bound of pod 1 caps every routing at 2 units, which the
  // direct link alone provides; the grid agrees that no detour is needed.
  PhysicalTopology phys = UniformStriping(3, 1, 2, 1.0);
  std::vector<TrafficMatrix> crit = {Tm(3, {{0, 1, 4}})};
  FractionalSolution s = RunPipeline(phys, crit);
  EXPECT_NEAR(s.mu, 0.5, 1e-6);
  const auto grid = GridOracleN3(phys, crit, 0.05, s.mu * (1 - 1e-9));
  EXPECT_NEAR(grid.direct, 4.0, 1e-12);
  EXPECT_NEAR(DirectShare(s.omega, crit[0]), grid.direct, 1e-6);
  EXPECT_NEAR(EvaluateStatic(s.d.d, s.omega, crit[0], 1.0).ahc, 1.0, 1e-9);
}

TEST(MinimizeAhcTest, SensitivityCapTradesDirectShare) {
  IntMatrix h(1, 3, 3);
  PhysicalTopology phys(h, h, 1.0);
  std::vector<TrafficMatrix> crit = {Tm(3, {{0, 1, 6}, {2, 1, 3}})};
  const double mu = SolveMaxminThroughput(phys, crit).mu;
  EXPECT_NEAR(mu, GridOracleN3(phys, crit, 0.05, 0).mu, 1e-9);
  FractionalSolution free = MinimizeAhc(phys, crit, mu * (1 - 1e-9), std::nullopt);
  const auto grid = GridOracleN3(phys, crit, 0.05, mu * (1 - 1e-9));
  EXPECT_NEAR(DirectShare(free.omega, crit[0]), grid.direct, 1e-6);
  // Direct-only loads the thin (2, 1) link with weight 1; the cap forces a
  // split and so fewer direct bytes.
  FractionalSolution capped = RunPipeline(phys, crit);
  EXPECT_LT(DirectShare(capped.omega, crit[0]), grid.direct - 1e-3);
}

TEST(MinimizeAhcTest, MatchesGridOracleOnThreePods) {
  for (int seed = 0; seed < 6; ++seed) {
    std::mt19937_64 rng(400 + seed);
    PhysicalTopology phys = RandomStriping(rng, 3, 2, 1, 2);
    std::vector<TrafficMatrix> crit = {RandomTm(rng, 3, 1, 10, 0.4)};
    if (crit[0].IsZero()) continue;
    const double mu = SolveMaxminThroughput(phys, crit).mu;
    FractionalSolution s = MinimizeAhc(phys, crit, mu * (1 - 1e-9), std::nullopt);
    const double lp = DirectShare(s.omega, crit[0]);
    const double total = crit[0].Total();
    // Exactly feasible grid points bound the LP from below; points within
    // the grid's own throughput loss bound it from above.
    const auto strict = GridOracleN3(phys, crit, 0.05, mu * (1 - 1e-9));
    const auto loose = GridOracleN3(phys, crit, 0.05, mu * (1 - 5e-2));
    if (strict.direct >= 0) EXPECT_GE(lp, strict.direct - 1e-6 * total);
    EXPECT_LE(lp, loose.direct + 5e-2 * total);
  }
}

TEST(PipelineTest, ThroughputSurvivesLaterSteps) {
  for (int seed = 0; seed < 4; ++seed) {
    std::mt19937_64 rng(500 + seed);
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    std::vector<TrafficMatrix> crit = {RandomTm(rng, 4, 1, 10, 0.3), RandomTm(rng, 4, 1, 10, 0.3)};
    const double mu = SolveMaxminThroughput(phys, crit).mu;
    FractionalSolution s = RunPipeline(phys, crit);
    EXPECT_NEAR(s.mu, mu, 1e-8 * mu);
    for (const auto& t : crit) {
      EXPECT_LE(EvaluateStatic(s.d.d, s.omega, t, 1.0).mlu, 1 / s.mu + 1e-6);
    }
  }
}

TEST(PipelineTest, SensitivityCapHoldsOnDemandedPaths) {
  std::mt19937_64 rng(6);
  PhysicalTopology phys = RandomStriping(rng, 5, 2, 1, 3);
  std::vector<TrafficMatrix> crit = {RandomTm(rng, 5, 1, 10, 0.3), RandomTm(rng, 5, 1, 10, 0.3)};
  FractionalSolution s = RunPipeline(phys, crit);
  ASSERT_TRUE(s.beta);
  EXPECT_LE(DemandedSensitivity(s.d.d, s.omega, crit, 1.0), *s.beta * (1 + 1e-6) + 1e-9);
  ValidateRouting(s.omega);
  ValidateFractional(phys, s.d);
}

TEST(PipelineTest, BoundedDemandStaysUnderReciprocalThroughput) {
  for (int seed = 0; seed < 4; ++seed) {
    std::mt19937_64 rng(600 + seed);
    const int n = 4 + 2 * (seed % 2);
    PhysicalTopology phys = RandomStriping(rng, n, 2, 1, 3);
    std::vector<TrafficMatrix> crit;
    for (int k = 0; k < 5; ++k) crit.push_back(RandomTm(rng, n, 0, 10, 0.2));
    FractionalSolution s = RunPipeline(phys, crit);
    EXPECT_LE(WorstBoundExcess(s.d.d, s.omega, s.mu, crit, 1.0, rng, 50), 1e-5);
  }
}

TEST(PipelineTest, RelabelingPodsKeepsObjectives) {
  std::mt19937_64 rng(7);
  PhysicalTopology phys = UniformStriping(4, 2, 2, 1.0);
  std::vector<TrafficMatrix> crit = {RandomTm(rng, 4, 1, 10, 0.2), RandomTm(rng, 4, 1, 10, 0.2)};
  const std::vector<int> perm = {2, 0, 3, 1};
  std::vector<TrafficMatrix> moved;
  for (const auto& t : crit) {
    RealMatrix m(4, 4, 0.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(perm[i], perm[j]) = t(i, j);
    moved.emplace_back(m);
  }
  FractionalSolution a = RunPipeline(phys, crit);
  FractionalSolution b = RunPipeline(phys, moved);
  EXPECT_NEAR(a.mu, b.mu, 1e-8 * a.mu);
  EXPECT_NEAR(*a.beta, *b.beta, *a.beta * 3e-3);
}

TEST(RecomputeRoutingTest, IntegralOptimumIsReproduced) {
  std::vector<TrafficMatrix> crit = {Tm(2, {{0, 1, 8}, {1, 0, 8}})};
  FractionalSolution frac = RunPipeline(TwoPods(), crit);
  IntegerTopology x(1, 2);
  x.at(0, 0, 1) = 4;
  x.at(0, 1, 0) = 4;
  FractionalSolution again = RecomputeRouting(TwoPods(), x, crit);
  EXPECT_NEAR(again.mu, frac.mu, 1e-9);
  EXPECT_NEAR(*again.beta, *frac.beta, *frac.beta * 2e-3);
}

TEST(RecomputeRoutingTest, UniformMeshUniformDemand) {
  PhysicalTopology phys = UniformStriping(4, 1, 3, 1.0);
  IntegerTopology mesh = UniformMesh(phys);
  RealMatrix u(4, 4, 2.0);
  for (int i = 0; i < 4; ++i) u(i, i) = 0;
  FractionalSolution s = RecomputeRouting(phys, mesh, {TrafficMatrix(u)});
  EXPECT_NEAR(s.mu, 1.0 * 1.0 / 2.0, 1e-8);
}

TEST(RecomputeRoutingTest, UnreachablePairIsInfeasible) {
  PhysicalTopology phys = UniformStriping(3, 1, 2, 1.0);
  IntegerTopology x(1, 3);
  x.at(0, 1, 0) = 1;
  x.at(0, 2, 0) = 1;
  try {
    RecomputeRouting(phys, x, {Tm(3, {{0, 1, 1}})});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(PathCapacityTest, OneAndTwoHopClosedForms) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> links(0, 3);
  const int n = 5;
  IntMatrix x(n, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) x(i, j) = links(rng);
  double one = 0, two = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      one += x(i, j) * 2.0;
      double c = x(i, j);
      for (int k = 0; k < n; ++k)
        if (k != i && k != j) c += std::min(x(i, k), x(k, j));
      two += c * 2.0;
    }
  const double pairs = n * (n - 1);
  EXPECT_NEAR(ComputePathCapacity(x, 2.0, 1), one / pairs, 1e-9);
  EXPECT_NEAR(ComputePathCapacity(x, 2.0, 2), two / pairs, 1e-9);
  EXPECT_LE(ComputePathCapacity(x, 2.0, 2), ComputePathCapacity(x, 2.0, 3) + 1e-9);
  EXPECT_LE(ComputePathCapacity(x, 2.0, 3), ComputePathCapacity(x, 2.0, 4) + 1e-9);
}

}  // namespace
}  // namespace couder
