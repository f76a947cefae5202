#include "couder/round.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace couder {
namespace {

int SwitchCap(const PhysicalTopology& phys, int m, int i, int j) {
  return std::min(phys.egress(m, i), phys.ingress(m, j));
}

void CheckInputs(const PhysicalTopology& phys, const FractionalTopology& d_star) {
  ValidateFractional(phys, d_star);
}

RoundingReport Report(const DualState& duals, IntegerTopology x, int iterations) {
  RoundingReport r;
  const IntMatrix agg = x.Aggregate();
  r.goodness = Goodness(duals, agg);
  r.violation_ratio = ViolationRatio(duals, agg);
  r.x = std::move(x);
  r.iterations_run = iterations;
  return r;
}

void AssertHard(const PhysicalTopology& phys, const IntegerTopology& x) {
  if (!Validate(phys, x).empty()) {
    Fail(ErrorCode::kInternal, "rounding produced a port-budget violation");
  }
}

}  // namespace

DualState InitialDuals(const FractionalTopology& d_star) {
  const std::size_t n = d_star.d.rows();
  DualState s;
  s.p_plus = RealMatrix(n, n, 0.0);
  s.p_minus = RealMatrix(n, n, 0.0);
  s.c_minus = IntMatrix(n, n, 0);
  s.c_plus = IntMatrix(n, n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = d_star.d(i, j);
      const double r = std::round(v);
      if (std::abs(v - r) <= kTolerance) {
        s.c_minus(i, j) = s.c_plus(i, j) = static_cast<int>(r);
      } else {
        s.c_minus(i, j) = static_cast<int>(std::floor(v));
        s.c_plus(i, j) = static_cast<int>(std::ceil(v));
      }
    }
  return s;
}

int Goodness(const DualState& duals, const IntMatrix& aggregate) {
  const int n = static_cast<int>(aggregate.rows());
  int good = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int v = aggregate(i, j);
      if (v >= duals.c_minus(i, j) && v <= duals.c_plus(i, j)) ++good;
    }
  return good;
}

double ViolationRatio(const DualState& duals, const IntMatrix& aggregate) {
  const int n = static_cast<int>(aggregate.rows());
  if (n < 2) return 0.0;
  const int pairs = n * (n - 1);
  return static_cast<double>(pairs - Goodness(duals, aggregate)) / pairs;
}

double SwitchUtility(const PhysicalTopology& phys, const IntegerTopology& x) {
  const int n = phys.num_pods();
  double u = 0;
  for (int m = 0; m < phys.num_ocs(); ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double diff = x.at(m, i, j) - SwitchCap(phys, m, i, j);
        u -= diff * diff;
      }
  return u;
}

double Lagrangian(const PhysicalTopology& phys, const DualState& duals,
                  const IntegerTopology& x) {
  const int n = phys.num_pods();
  const IntMatrix agg = x.Aggregate();
  double value = SwitchUtility(phys, x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      value += duals.p_plus(i, j) * (duals.c_plus(i, j) - agg(i, j));
      value += duals.p_minus(i, j) * (agg(i, j) - duals.c_minus(i, j));
    }
  return value;
}

SubproblemSpec LdmSubproblem(const PhysicalTopology& phys, const DualState& duals,
                             const IntegerTopology& x_hat, int ocs) {
  const int n = phys.num_pods();
  SubproblemSpec spec;
  spec.cost = RealMatrix(n, n, 0.0);
  spec.lower = IntMatrix(n, n, 0);
  spec.upper = IntMatrix(n, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int cur = x_hat.at(ocs, i, j);
      spec.cost(i, j) = 2.0 * (cur - SwitchCap(phys, ocs, i, j)) + duals.p_plus(i, j) -
                        duals.p_minus(i, j);
      spec.lower(i, j) = std::max(cur - 1, 0);
      spec.upper(i, j) = cur + 1;
    }
  spec.row_caps.resize(n);
  spec.col_caps.resize(n);
  for (int i = 0; i < n; ++i) {
    spec.row_caps[i] = phys.egress(ocs, i);
    spec.col_caps[i] = phys.ingress(ocs, i);
  }
  return spec;
}

void UpdateDuals(DualState& duals, const IntMatrix& aggregate, double step) {
  const std::size_t n = aggregate.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = aggregate(i, j);
      duals.p_plus(i, j) = std::max(duals.p_plus(i, j) - step * (duals.c_plus(i, j) - v), 0.0);
      duals.p_minus(i, j) = std::max(duals.p_minus(i, j) - step * (v - duals.c_minus(i, j)), 0.0);
    }
}

RoundingReport LdmRound(const PhysicalTopology& phys, const FractionalTopology& d_star,
                        int tau_max) {
  CheckInputs(phys, d_star);
  Require(tau_max >= 1, "tau_max must be positive");
  const int n = phys.num_pods();
  const int pairs = n * (n - 1);
  DualState duals = InitialDuals(d_star);
  IntegerTopology x_hat(phys.num_ocs(), n);
  IntegerTopology best = x_hat;
  int best_good = Goodness(duals, x_hat.Aggregate());
  int tau = 0;
  while (tau < tau_max && best_good < pairs) {
    ++tau;
    duals.iteration = tau;
    const double step = 1.0 / tau;
    for (int m = 0; m < phys.num_ocs(); ++m) {
      const SubproblemSpec spec = LdmSubproblem(phys, duals, x_hat, m);
      std::optional<IntMatrix> a = SolveSubproblem(spec);
      if (!a) Fail(ErrorCode::kInternal, "rounding subproblem has inconsistent bounds");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x_hat.at(m, i, j) = (*a)(i, j);
      AssertHard(phys, x_hat);

      const IntMatrix agg = x_hat.Aggregate();
      const int good = Goodness(duals, agg);
      if (good > best_good) {
        best_good = good;
        best = x_hat;
      }
      UpdateDuals(duals, agg, step);
    }
  }
  return Report(duals, std::move(best), tau);
}

RoundingReport GreedyRound(const PhysicalTopology& phys, const FractionalTopology& d_star) {
  CheckInputs(phys, d_star);
  const int n = phys.num_pods();
  DualState duals = InitialDuals(d_star);
  IntegerTopology x(phys.num_ocs(), n);
  IntMatrix assigned(n, n, 0);
  for (int m = 0; m < phys.num_ocs(); ++m) {
    std::vector<int> eg(n), ig(n);
    for (int i = 0; i < n; ++i) {
      eg[i] = phys.egress(m, i);
      ig[i] = phys.ingress(m, i);
    }
    for (;;) {
      int bi = -1, bj = -1;
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (eg[i] == 0) continue;
        for (int j = 0; j < n; ++j) {
          if (i == j || ig[j] == 0) continue;
          const double residual = d_star.d(i, j) - assigned(i, j);
          if (residual > best) {
            best = residual;
            bi = i;
            bj = j;
          }
        }
      }
      if (bi < 0) break;
      ++x.at(m, bi, bj);
      ++assigned(bi, bj);
      --eg[bi];
      --ig[bj];
    }
  }
  AssertHard(phys, x);
  return Report(duals, std::move(x), 1);
}

GapResult OptimalityGap(const PhysicalTopology& phys, const RoundingReport& report,
                        const FractionalTopology& d_star,
                        const std::vector<TrafficMatrix>& critical,
                        const PipelineOptions& options) {
  double mu_frac = 0;
  try {
    mu_frac = FrozenThroughput(phys, d_star.d, critical, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
  }
  if (mu_frac <= 0) Fail(ErrorCode::kUndefined, "fractional throughput is zero: gap undefined");
  double mu_int = 0;
  try {
    mu_int = FrozenThroughput(phys, report.x, critical, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
  }
  GapResult r;
  r.gap = 1.0 - mu_int / mu_frac;
  if (r.gap < 0) {
    r.gap = 0;
    r.clamped = true;
  }
  return r;
}

}  // namespace couder
