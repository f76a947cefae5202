#include "couder/round.h"

#include <gtest/gtest.h>

#include <functional>
#include <limits>

#include "test_util.h"

namespace couder {
namespace {

using testing_util::RandomFractional;
using testing_util::RandomStriping;

FractionalTopology FromInt(const IntMatrix& m) {
  FractionalTopology d;
  d.d = RealMatrix(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.flat().size(); ++k) d.d.flat()[k] = m.flat()[k];
  return d;
}

// Every x with per-switch port budgets, for tiny instances.
void ForEachHardFeasible(const PhysicalTopology& phys,
                         const std::function<void(const IntegerTopology&)>& fn) {
  const int n = phys.num_pods(), m = phys.num_ocs();
  IntegerTopology x(m, n);
  std::vector<int> eg(m * n), ig(m * n);
  for (int o = 0; o < m; ++o)
    for (int i = 0; i < n; ++i) {
      eg[o * n + i] = phys.egress(o, i);
      ig[o * n + i] = phys.ingress(o, i);
    }
  const int cells = m * n * n;
  std::function<void(int)> rec = [&](int cell) {
    if (cell == cells) {
      fn(x);
      return;
    }
    const int o = cell / (n * n), i = cell / n % n, j = cell % n;
    if (i == j) {
      rec(cell + 1);
      return;
    }
    for (int v = 0; v <= eg[o * n + i] && v <= ig[o * n + j]; ++v) {
      x.at(o, i, j) = v;
      eg[o * n + i] -= v;
      ig[o * n + j] -= v;
      rec(cell + 1);
      eg[o * n + i] += v;
      ig[o * n + j] += v;
    }
    x.at(o, i, j) = 0;
  };
  rec(0);
}

TEST(LdmRoundTest, IntegralSingleSwitchIsReproduced) {
  PhysicalTopology phys = UniformStriping(3, 1, 3, 1.0);
  IntMatrix d(3, 3, 0);
  d(0, 1) = 2; d(0, 2) = 1; d(1, 0) = 1; d(1, 2) = 2; d(2, 0) = 2; d(2, 1) = 1;
  RoundingReport r = LdmRound(phys, FromInt(d));
  EXPECT_EQ(r.x.Aggregate(), d);
  EXPECT_EQ(r.violation_ratio, 0.0);
  EXPECT_EQ(r.goodness, 6);
}

TEST(LdmRoundTest, EvenDemandOnTwinSwitchesHasNoViolations) {
  PhysicalTopology phys = UniformStriping(3, 2, 2, 1.0);
  IntMatrix d(3, 3, 0);
  d(0, 1) = 2; d(1, 2) = 2; d(2, 0) = 2; d(0, 2) = 2; d(1, 0) = 2; d(2, 1) = 2;
  // A zero-violation assignment exists.
  bool exists = false;
  const DualState bounds = InitialDuals(FromInt(d));
  ForEachHardFeasible(phys, [&](const IntegerTopology& x) {
    exists = exists || Goodness(bounds, x.Aggregate()) == 6;
  });
  ASSERT_TRUE(exists);
  RoundingReport r = LdmRound(phys, FromInt(d));
  EXPECT_EQ(r.violation_ratio, 0.0);
  EXPECT_TRUE(Validate(phys, r.x).empty());
}

TEST(LdmRoundTest, HardConstraintsOnRandomInstances) {
  for (int seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    PhysicalTopology phys = RandomStriping(rng, 3 + seed % 4, 2 + seed % 3, 1, 4);
    FractionalTopology d = RandomFractional(rng, phys);
    RoundingReport ldm = LdmRound(phys, d);
    RoundingReport greedy = GreedyRound(phys, d);
    EXPECT_TRUE(Validate(phys, ldm.x).empty()) << seed;
    EXPECT_TRUE(Validate(phys, greedy.x).empty()) << seed;
    const int pairs = phys.num_pods() * (phys.num_pods() - 1);
    EXPECT_EQ(ldm.goodness, pairs - static_cast<int>(std::lround(ldm.violation_ratio * pairs)));
  }
}

TEST(LdmRoundTest, MoreIterationsNeverLoseGoodness) {
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(50 + seed);
    PhysicalTopology phys = RandomStriping(rng, 5, 3, 1, 3);
    FractionalTopology d = RandomFractional(rng, phys);
    int last = -1;
    for (int tau : {1, 2, 5, 10, 30}) {
      RoundingReport r = LdmRound(phys, d, tau);
      EXPECT_GE(r.goodness, last) << "seed " << seed << " tau " << tau;
      EXPECT_EQ(r.goodness, Goodness(InitialDuals(d), r.x.Aggregate()));
      last = r.goodness;
    }
  }
}

TEST(LdmRoundTest, StopsOnceEverythingIsSatisfied) {
  PhysicalTopology phys = UniformStriping(2, 1, 3, 1.0);
  IntMatrix d(2, 2, 0);
  d(0, 1) = 1;
  d(1, 0) = 1;
  RoundingReport r = LdmRound(phys, FromInt(d), 50);
  EXPECT_EQ(r.iterations_run, 1);
  EXPECT_EQ(r.goodness, 2);
}

TEST(LdmRoundTest, RejectsInvalidFractionalTopology) {
  PhysicalTopology phys = UniformStriping(2, 1, 1, 1.0);
  RealMatrix d(2, 2, 0.0);
  d(0, 1) = 5;  // beyond the single egress port
  try {
    LdmRound(phys, FractionalTopology{d});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(DualsTest, ProjectionKeepsMultipliersNonnegative) {
  std::mt19937_64 rng(9);
  PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
  DualState duals = InitialDuals(RandomFractional(rng, phys));
  std::uniform_int_distribution<int> v(0, 6);
  for (int tau = 1; tau <= 30; ++tau) {
    IntMatrix agg(4, 4, 0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) agg(i, j) = v(rng);
    UpdateDuals(duals, agg, 1.0 / tau);
    for (double p : duals.p_plus.flat()) EXPECT_GE(p, 0.0);
    for (double p : duals.p_minus.flat()) EXPECT_GE(p, 0.0);
  }
}

TEST(DualsTest, NearIntegersSnap) {
  RealMatrix d(2, 2, 0.0);
  d(0, 1) = 2.0 + 1e-9;
  d(1, 0) = 1.5;
  DualState s = InitialDuals(FractionalTopology{d});
  EXPECT_EQ(s.c_minus(0, 1), 2);
  EXPECT_EQ(s.c_plus(0, 1), 2);
  EXPECT_EQ(s.c_minus(1, 0), 1);
  EXPECT_EQ(s.c_plus(1, 0), 2);
}

TEST(DualsTest, SubgradientInequality) {
  for (int seed = 0; seed < 6; ++seed) {
    std::mt19937_64 rng(60 + seed);
    const int n = 2 + seed % 2;
    PhysicalTopology phys = RandomStriping(rng, n, 1, 1, 2);
    DualState at = InitialDuals(RandomFractional(rng, phys));
    std::uniform_real_distribution<double> u(0, 2), jitter(-0.5, 0.5);
    for (double& p : at.p_plus.flat()) p = u(rng);
    for (double& p : at.p_minus.flat()) p = u(rng);

    auto dual_value = [&](const DualState& duals, IntMatrix* argmax) {
      double best = -std::numeric_limits<double>::infinity();
      ForEachHardFeasible(phys, [&](const IntegerTopology& x) {
        const double v = Lagrangian(phys, duals, x);
        if (v > best) {
          best = v;
          if (argmax) *argmax = x.Aggregate();
        }
      });
      return best;
    };
    IntMatrix x_hat;
    const double q_hat = dual_value(at, &x_hat);
    for (int trial = 0; trial < 20; ++trial) {
      DualState near = at;
      double lin = q_hat;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          near.p_plus(i, j) = std::max(0.0, at.p_plus(i, j) + jitter(rng));
          near.p_minus(i, j) = std::max(0.0, at.p_minus(i, j) + jitter(rng));
          lin += (at.c_plus(i, j) - x_hat(i, j)) * (near.p_plus(i, j) - at.p_plus(i, j));
          lin += (x_hat(i, j) - at.c_minus(i, j)) * (near.p_minus(i, j) - at.p_minus(i, j));
        }
      EXPECT_GE(dual_value(near, nullptr), lin - 1e-9) << "seed " << seed;
    }
  }
}

TEST(SubproblemTest, LinearizedCostsAndMoveLimits) {
  PhysicalTopology phys = UniformStriping(3, 2, 2, 1.0);
  DualState duals = InitialDuals(FractionalTopology{RealMatrix(3, 3, 0.0)});
  duals.p_plus(0, 1) = 0.75;
  duals.p_minus(0, 1) = 0.25;
  IntegerTopology x(2, 3);
  x.at(1, 0, 1) = 1;
  SubproblemSpec spec = LdmSubproblem(phys, duals, x, 1);
  EXPECT_DOUBLE_EQ(spec.cost(0, 1), 2.0 * (1 - 2) + 0.75 - 0.25);
  EXPECT_EQ(spec.lower(0, 1), 0);
  EXPECT_EQ(spec.upper(0, 1), 2);
  EXPECT_EQ(spec.upper(1, 2), 1);
  EXPECT_EQ(spec.row_caps[0], 2);
}

TEST(SubproblemTest, UtilityPeaksAtPortCounts) {
  PhysicalTopology phys = UniformStriping(2, 1, 3, 1.0);
  IntegerTopology x(1, 2);
  x.at(0, 0, 1) = 3;
  x.at(0, 1, 0) = 1;
  EXPECT_DOUBLE_EQ(SwitchUtility(phys, x), -4.0);
}

TEST(GreedyRoundTest, IntegralSingleSwitchIsReproduced) {
  PhysicalTopology phys = UniformStriping(3, 1, 3, 1.0);
  IntMatrix d(3, 3, 0);
  d(0, 1) = 2; d(0, 2) = 1; d(1, 0) = 1; d(1, 2) = 2; d(2, 0) = 2; d(2, 1) = 1;
  RoundingReport r = GreedyRound(phys, FromInt(d));
  EXPECT_EQ(r.x.Aggregate(), d);
  EXPECT_EQ(r.violation_ratio, 0.0);
}

TEST(GreedyRoundTest, HotPairSaturatesEarlySwitches) {
  PhysicalTopology phys = UniformStriping(3, 3, 2, 1.0);
  RealMatrix d(3, 3, 0.0);
  d(0, 1) = 5.5;
  d(1, 2) = 0.5;
  RoundingReport r = GreedyRound(phys, FractionalTopology{d});
  EXPECT_EQ(r.x.at(0, 0, 1), 2);
  EXPECT_EQ(r.x.at(1, 0, 1), 2);
  EXPECT_TRUE(Validate(phys, r.x).empty());
  EXPECT_GT(r.violation_ratio, 0.0);
}

TEST(OptimalityGapTest, IntegralOptimumHasNoGap) {
  PhysicalTopology phys = UniformStriping(2, 1, 4, 1.0);
  RealMatrix t(2, 2, 0.0);
  t(0, 1) = 8;
  t(1, 0) = 8;
  std::vector<TrafficMatrix> crit = {TrafficMatrix(t)};
  FractionalSolution s = RunPipeline(phys, crit);
  RoundingReport r = LdmRound(phys, s.d);
  EXPECT_EQ(r.violation_ratio, 0.0);
  GapResult g = OptimalityGap(phys, r, s.d, crit);
  EXPECT_NEAR(g.gap, 0.0, 1e-9);
}

TEST(OptimalityGapTest, StaysInUnitInterval) {
  for (int seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(70 + seed);
    PhysicalTopology phys = RandomStriping(rng, 4, 2, 1, 3);
    std::vector<TrafficMatrix> crit = {testing_util::RandomTm(rng, 4, 1, 10, 0.2)};
    FractionalSolution s = RunPipeline(phys, crit);
    for (const RoundingReport& r : {LdmRound(phys, s.d), GreedyRound(phys, s.d)}) {
      GapResult g = OptimalityGap(phys, r, s.d, crit);
      EXPECT_GE(g.gap, 0.0);
      EXPECT_LE(g.gap, 1.0);
    }
  }
}

TEST(OptimalityGapTest, ZeroFractionalThroughputIsUndefined) {
  PhysicalTopology phys = UniformStriping(2, 1, 1, 1.0);
  RealMatrix t(2, 2, 0.0);
  t(0, 1) = 1;
  RoundingReport r;
  r.x = IntegerTopology(1, 2);
  try {
    OptimalityGap(phys, r, FractionalTopology{RealMatrix(2, 2, 0.0)}, {TrafficMatrix(t)});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefined);
  }
}

}  // namespace
}  // namespace couder
