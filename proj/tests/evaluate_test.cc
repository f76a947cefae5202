#include "couder/evaluate.h"

#include <gtest/gtest.h>

#include "couder/round.h"
#include "test_util.h"

namespace couder {
namespace {

using testing_util::RandomStriping;
using testing_util::RandomTm;
using testing_util::ToReal;

RealMatrix Full(int n, double v) {
  RealMatrix m(n, n, v);
  for (int i = 0; i < n; ++i) m(i, i) = 0;
  return m;
}

TrafficMatrix Single(int n, int i, int j, double v) {
  RealMatrix m(n, n, 0.0);
  m(i, j) = v;
  return TrafficMatrix(m);
}

// Random per-pair split over all paths.
RoutingWeights RandomWeights(std::mt19937_64& rng, int n) {
  PathSet paths(n);
  std::uniform_real_distribution<double> u(0, 1);
  RoutingWeights w;
  w.num_pods = n;
  w.weights.assign(paths.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t off = paths.PairOffset(i, j);
      double s = 0;
      for (int q = 0; q < paths.paths_per_pair(); ++q) s += (w.weights[off + q] = u(rng));
      for (int q = 0; q < paths.paths_per_pair(); ++q) w.weights[off + q] /= s;
    }
  return w;
}

TEST(EvaluateStaticTest, UniformMeshDirect) {
  EvalRecord r = EvaluateStatic(Full(4, 4.0), DirectRouting(4), TrafficMatrix(Full(4, 2.0)), 1.0);
  EXPECT_DOUBLE_EQ(r.mlu, 0.5);
  EXPECT_DOUBLE_EQ(r.ahc, 1.0);
  EXPECT_DOUBLE_EQ(r.direct_fraction, 1.0);
  EXPECT_TRUE(r.feasible);
}

TEST(EvaluateStaticTest, ZeroTmConvention) {
  EvalRecord r = EvaluateStatic(Full(3, 1.0), DirectRouting(3), TrafficMatrix(RealMatrix(3, 3, 0.0)), 1.0);
  EXPECT_EQ(r.mlu, 0.0);
  EXPECT_EQ(r.ahc, 1.0);
}

TEST(EvaluateStaticTest, MissingLinkIsInfeasible) {
  RealMatrix links = Full(3, 1.0);
  links(0, 1) = 0;
  EvalRecord r = EvaluateStatic(links, DirectRouting(3), Single(3, 0, 1, 1.0), 1.0);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.mlu, kInfiniteMlu);
}

TEST(EvaluateStaticTest, HopCountMatchesDirectFraction) {
  std::mt19937_64 rng(1);
  for (int s = 0; s < 10; ++s) {
    const int n = 3 + s % 4;
    EvalRecord r = EvaluateStatic(Full(n, 2.0), RandomWeights(rng, n), RandomTm(rng, n, 0, 5), 1.0);
    EXPECT_NEAR(r.ahc, 1 + (1 - r.direct_fraction), 1e-12);
  }
}

TEST(OptimalRoutingTest, SinglePairDirect) {
  RealMatrix links = Full(3, 0.0);
  links(0, 1) = 4;
  EXPECT_NEAR(OptimalRoutingMlu(links, Single(3, 0, 1, 3.0), 1.0), 0.75, 1e-9);
  EXPECT_EQ(OptimalRoutingMlu(Full(3, 0.0), Single(3, 0, 1, 3.0), 1.0), kInfiniteMlu);
}

TEST(OptimalRoutingTest, DominatesFixedWeights) {
  std::mt19937_64 rng(2);
  for (int s = 0; s < 10; ++s) {
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    IntegerTopology mesh = UniformMesh(phys);
    TrafficMatrix t = RandomTm(rng, 4, 0, 10);
    const double best = OptimalRoutingMlu(mesh, t, 1.0);
    EXPECT_LE(best, EvaluateStatic(mesh, RandomWeights(rng, 4), t, 1.0).mlu + 1e-9);
    EXPECT_LE(best, EvaluateStatic(mesh, VlbWeights(mesh.Aggregate()), t, 1.0).mlu + 1e-9);
    TeRouting te = OptimalRouting(mesh, t, 1.0);
    EXPECT_NEAR(EvaluateStatic(mesh, te.omega, t, 1.0).mlu, best, 1e-6 * best);
  }
}

TEST(OptimalRoutingTest, MatchesFineGridOnThreePods) {
  // Two demanded pairs; one split coordinate each.
  std::mt19937_64 rng(3);
  for (int s = 0; s < 3; ++s) {
    std::uniform_int_distribution<int> cnt(1, 3);
    RealMatrix links(3, 3, 0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) links(i, j) = cnt(rng);
    RealMatrix d(3, 3, 0.0);
    std::uniform_real_distribution<double> u(1, 10);
    d(0, 1) = u(rng);
    d(2, 1) = u(rng);
    TrafficMatrix t(d);
    PathSet paths(3);
    RoutingWeights w = DirectRouting(3);
    double grid = kInfiniteMlu;
    for (int a = 0; a <= 1000; ++a)
      for (int c = 0; c <= 1000; ++c) {
        w.weights[paths.PairOffset(0, 1)] = a / 1000.0;
        w.weights[paths.PairOffset(0, 1) + 1] = 1 - a / 1000.0;
        w.weights[paths.PairOffset(2, 1)] = c / 1000.0;
        w.weights[paths.PairOffset(2, 1) + 1] = 1 - c / 1000.0;
        grid = std::min(grid, EvaluateStatic(links, w, t, 1.0).mlu);
      }
    const double lp = OptimalRoutingMlu(links, t, 1.0);
    EXPECT_LE(lp, grid + 1e-9);
    EXPECT_NEAR(lp, grid, 1e-2 * grid);
  }
}

TEST(OptimalRoutingTest, ReciprocalOfRecomputedThroughput) {
  std::mt19937_64 rng(4);
  for (int s = 0; s < 6; ++s) {
    PhysicalTopology phys = RandomStriping(rng, 4 + s % 2, 2, 1, 3);
    IntegerTopology mesh = UniformMesh(phys);
    TrafficMatrix t = RandomTm(rng, phys.num_pods(), 1, 10, 0.2);
    const double mlu = OptimalRoutingMlu(mesh, t, phys.link_bandwidth());
    FractionalSolution r = RecomputeRouting(phys, mesh, {t});
    EXPECT_NEAR(mlu, 1 / r.mu, 1e-5 * mlu);
    EXPECT_NEAR(EvaluateStatic(mesh, r.omega, t, phys.link_bandwidth()).mlu, 1 / r.mu, 1e-5 * mlu);
  }
}

TEST(IdealToeTest, TwoPodClosedForm) {
  PhysicalTopology phys = UniformStriping(2, 1, 4, 1.0);
  EXPECT_NEAR(IdealToeMlu(phys, Single(2, 0, 1, 8.0)), 2.0, 1e-9);
}

TEST(IdealToeTest, HomogeneousInDemand) {
  std::mt19937_64 rng(5);
  PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
  TrafficMatrix t = RandomTm(rng, 4, 1, 10);
  RealMatrix scaled = t.demand();
  for (double& v : scaled.flat()) v *= 3.5;
  EXPECT_NEAR(IdealToeMlu(phys, TrafficMatrix(scaled)), 3.5 * IdealToeMlu(phys, t), 1e-8);
}

TEST(DominanceTest, IdealBelowOptimalBelowFixed) {
  std::mt19937_64 rng(6);
  for (int s = 0; s < 6; ++s) {
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    TrafficMatrix t = RandomTm(rng, 4, 1, 10, 0.2);
    const double ideal = IdealToeMlu(phys, t);
    for (const IntegerTopology& x : {UniformMesh(phys), LdmRound(phys, RunPipeline(phys, {t}).d).x}) {
      const double opt = OptimalRoutingMlu(x, t, 1.0);
      EXPECT_LE(ideal, opt * (1 + 1e-7));
      EXPECT_LE(opt, EvaluateStatic(x, RandomWeights(rng, 4), t, 1.0).mlu * (1 + 1e-9));
      EXPECT_LE(opt, EvaluateStatic(x, DirectOnlyWeights(4), t, 1.0).mlu * (1 + 1e-9));
    }
  }
}

TEST(UniformMeshTest, ExactDivision) {
  IntMatrix h(3, 4, 4);
  PhysicalTopology phys(h, h, 1.0);
  IntegerTopology x = UniformMesh(phys);
  IntMatrix want(4, 4, 4);
  for (int i = 0; i < 4; ++i) want(i, i) = 0;
  EXPECT_EQ(x.Aggregate(), want);
  EXPECT_TRUE(Validate(phys, x).empty());
}

TEST(UniformMeshTest, RemainderSpreads) {
  IntMatrix h(1, 4, 13);
  PhysicalTopology phys(h, h, 1.0);
  IntegerTopology x = UniformMesh(phys);
  IntMatrix agg = x.Aggregate();
  for (int i = 0; i < 4; ++i) {
    int row = 0, col = 0;
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      EXPECT_TRUE(agg(i, j) == 4 || agg(i, j) == 5);
      row += agg(i, j);
      col += agg(j, i);
    }
    EXPECT_EQ(row, 13);
    EXPECT_EQ(col, 13);
  }
  EXPECT_TRUE(Validate(phys, x).empty());
}

TEST(UniformMeshTest, AlwaysValid) {
  std::mt19937_64 rng(7);
  for (int s = 0; s < 20; ++s) {
    PhysicalTopology phys = RandomStriping(rng, 3 + s % 6, 1 + s % 4, 1, 5);
    EXPECT_TRUE(Validate(phys, UniformMesh(phys)).empty());
  }
}

TEST(VlbTest, UniformMeshSplitsEvenly) {
  const int n = 5;
  RoutingWeights w = VlbWeights(IntMatrix(n, n, 3));
  for (double v : w.weights) EXPECT_NEAR(v, 1.0 / (n - 1), 1e-12);
}

TEST(VlbTest, MissingDirectLinkGoesIndirect) {
  IntMatrix x(4, 4, 2);
  x(0, 1) = 0;
  RoutingWeights w = VlbWeights(x);
  PathSet paths(4);
  const std::size_t off = paths.PairOffset(0, 1);
  EXPECT_EQ(w.weights[off], 0.0);
  double sum = 0;
  for (int q = 0; q < paths.paths_per_pair(); ++q) sum += w.weights[off + q];
  EXPECT_NEAR(sum, 1.0, 1e-12);
  ValidateRouting(w);
}

TEST(DirectOnlyTest, AlwaysOneHop) {
  std::mt19937_64 rng(8);
  EvalRecord r = EvaluateStatic(Full(4, 2.0), DirectOnlyWeights(4), RandomTm(rng, 4, 0, 3), 1.0);
  EXPECT_EQ(r.ahc, 1.0);
  RealMatrix links = Full(4, 2.0);
  links(2, 3) = 0;
  EXPECT_FALSE(EvaluateStatic(links, DirectOnlyWeights(4), Single(4, 2, 3, 1.0), 1.0).feasible);
}

TEST(FatTreeTest, Formula) {
  RealMatrix m(4, 4, 0.0);
  m(0, 1) = 6;
  m(0, 2) = 4;
  EvalRecord r = FatTreeEval(TrafficMatrix(m), 16, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(r.mlu, 10.0 / 8.0);
  EXPECT_EQ(r.ahc, 2.0);
  EXPECT_DOUBLE_EQ(FatTreeEval(Single(3, 1, 2, 16.0), 16, 1.0, 1.0).mlu, 1.0);
  std::mt19937_64 rng(9);
  EXPECT_EQ(FatTreeEval(RandomTm(rng, 5, 0, 9), 8, 10.0, 2.0).ahc, 2.0);
}

TEST(SensitivityTest, SinglePathAndUnusedLinks) {
  RealMatrix links = Full(3, 4.0);
  RoutingWeights w = DirectRouting(3);
  RealMatrix sen = SensitivityMap(links, w, 1.0);
  EXPECT_DOUBLE_EQ(sen(0, 1), 0.25);
  RoutingWeights only = w;
  for (double& v : only.weights) v = 0;
  only.weights[PathSet(3).PairOffset(0, 1)] = 1;
  RealMatrix sparse = SensitivityMap(links, only, 1.0);
  EXPECT_DOUBLE_EQ(sparse(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(sparse(1, 2), 0.0);
}

TEST(SensitivityTest, DesensitizedPipelineIsNoWorse) {
  for (int s = 0; s < 5; ++s) {
    std::mt19937_64 rng(10 + s);
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    std::vector<TrafficMatrix> crit = {RandomTm(rng, 4, 1, 10, 0.2), RandomTm(rng, 4, 1, 10, 0.2)};
    PipelineOptions off;
    off.desensitize = false;
    FractionalSolution with = RunPipeline(phys, crit);
    FractionalSolution without = RunPipeline(phys, crit, off);
    const double a = testing_util::DemandedSensitivity(with.d.d, with.omega, crit, 1.0);
    const double b = testing_util::DemandedSensitivity(without.d.d, without.omega, crit, 1.0);
    EXPECT_LE(a, b * (1 + 3e-3)) << "seed " << s;
  }
}

}  // namespace
}  // namespace couder
