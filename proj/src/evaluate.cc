#include "couder/evaluate.h"

#include <algorithm>
#include <cmath>

#include "couder/lp.h"

namespace couder {
namespace {

RealMatrix ToReal(const IntMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.flat().size(); ++k) out.flat()[k] = m.flat()[k];
  return out;
}

void CheckShapes(const RealMatrix& links, const TrafficMatrix& t) {
  const std::size_t n = static_cast<std::size_t>(t.num_pods());
  Require(links.rows() == n && links.cols() == n, "link matrix does not match the TM size");
}

// Relative MLU slack allowed while maximizing direct traffic.
constexpr double kTeSlack = 1e-7;

}  // namespace

EvalRecord EvaluateStatic(const RealMatrix& links, const RoutingWeights& omega,
                          const TrafficMatrix& t, double link_bandwidth) {
  CheckShapes(links, t);
  const int n = t.num_pods();
  Require(omega.num_pods == n, "routing weights do not match the TM size");
  Require(link_bandwidth > 0, "link bandwidth must be positive");
  PathSet paths(n);
  Require(omega.weights.size() == paths.size(), "routing weight vector has the wrong length");

  RealMatrix load(n, n, 0.0);
  double total = 0, direct = 0, hops = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double demand = t(i, j);
      if (i == j || demand <= 0) continue;
      total += demand;
      const std::size_t off = paths.PairOffset(i, j);
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        const double w = omega.weights[off + q];
        if (w <= 0) continue;
        const Path& p = paths[off + q];
        const double f = w * demand;
        hops += f * p.hops();
        if (!p.via) {
          direct += f;
          load(i, j) += f;
        } else {
          load(i, *p.via) += f;
          load(*p.via, j) += f;
        }
      }
    }

  EvalRecord r;
  r.per_link_util = RealMatrix(n, n, 0.0);
  r.mlu = 0;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      if (load(a, c) <= 0) continue;
      if (links(a, c) <= 0) {
        r.per_link_util(a, c) = kInfiniteMlu;
        r.feasible = false;
        r.mlu = kInfiniteMlu;
        continue;
      }
      const double u = load(a, c) / (links(a, c) * link_bandwidth);
      r.per_link_util(a, c) = u;
      r.mlu = std::max(r.mlu, u);
    }
  if (total > 0) {
    r.ahc = hops / total;
    r.direct_fraction = direct / total;
  }
  return r;
}

EvalRecord EvaluateStatic(const IntegerTopology& x, const RoutingWeights& omega,
                          const TrafficMatrix& t, double link_bandwidth) {
  return EvaluateStatic(ToReal(x.Aggregate()), omega, t, link_bandwidth);
}

namespace {

TeRouting Route(const RealMatrix& links, const TrafficMatrix& t, double link_bandwidth,
                const lp::SolverOptions& options, bool prefer_direct) {
  CheckShapes(links, t);
  Require(link_bandwidth > 0, "link bandwidth must be positive");
  const int n = t.num_pods();
  PathSet paths(n);
  TeRouting out;
  out.omega = DirectRouting(n);
  double scale = 0;
  for (double v : t.demand().flat()) scale = std::max(scale, v);
  if (scale <= 0) return out;

  lp::LpModel m;
  const lp::VarId u = m.AddVariable("mlu", 0, lp::kInfinity);
  std::vector<int> var(paths.size(), -1);
  auto usable = [&](const Path& p) {
    if (!p.via) return links(p.src, p.dst) > 0;
    return links(p.src, *p.via) > 0 && links(*p.via, p.dst) > 0;
  };
  lp::LinearExpr direct;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || t(i, j) <= 0) continue;
      lp::LinearExpr split;
      const std::size_t off = paths.PairOffset(i, j);
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        if (!usable(paths[off + q])) continue;
        var[off + q] = m.AddVariable("w", 0, 1).index;
        split.Add(lp::VarId{var[off + q]}, 1.0);
      }
      if (split.empty()) {
        out.mlu = kInfiniteMlu;
        return out;
      }
      m.AddConstraint(split, lp::Relation::kEqual, 1.0);
      if (var[off] >= 0) direct.Add(lp::VarId{var[off]}, t(i, j) / scale);
    }
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      if (a == c || links(a, c) <= 0) continue;
      lp::LinearExpr e;
      auto add = [&](int src, int dst, std::size_t idx) {
        if (var[idx] >= 0) e.Add(lp::VarId{var[idx]}, t(src, dst) / scale);
      };
      add(a, c, paths.PairOffset(a, c));
      for (int k = 0; k < n; ++k) {
        if (k == a || k == c) continue;
        add(a, k, paths.IndexOf({a, k, c}));
        add(k, c, paths.IndexOf({k, c, a}));
      }
      if (e.empty()) continue;
      e.Add(u, -links(a, c) * link_bandwidth);
      m.AddConstraint(e, lp::Relation::kLessEqual, 0.0);
    }
  m.SetObjective(lp::Sense::kMinimize, {{u, 1.0}});
  lp::LpSolution sol = lp::Solve(m, options);
  if (sol.status != lp::Status::kOptimal) {
    Fail(ErrorCode::kInternal, "optimal-routing LP did not reach optimality");
  }
  const double best = sol.value(u);
  out.mlu = best * scale;
  if (!prefer_direct) return out;

  // Among MLU-optimal routings prefer the most direct traffic.
  m.AddConstraint({{u, 1.0}}, lp::Relation::kLessEqual, best * (1 + kTeSlack) + kTeSlack);
  m.SetObjective(lp::Sense::kMaximize, direct);
  lp::LpSolution second = lp::Solve(m, options);
  if (second.status == lp::Status::kOptimal) sol = std::move(second);
  for (std::size_t k = 0; k < paths.size(); ++k)
    if (var[k] >= 0) out.omega.weights[k] = std::clamp(sol.values[var[k]], 0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || t(i, j) <= 0) continue;
      const std::size_t off = paths.PairOffset(i, j);
      if (var[off] < 0) out.omega.weights[off] = 0;
      double sum = 0;
      for (int q = 0; q < paths.paths_per_pair(); ++q) sum += out.omega.weights[off + q];
      for (int q = 0; q < paths.paths_per_pair(); ++q) out.omega.weights[off + q] /= sum;
    }
  return out;
}

}  // namespace

TeRouting OptimalRouting(const RealMatrix& links, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options) {
  return Route(links, t, link_bandwidth, options, true);
}

double OptimalRoutingMlu(const RealMatrix& links, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options) {
  return Route(links, t, link_bandwidth, options, false).mlu;
}

TeRouting OptimalRouting(const IntegerTopology& x, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options) {
  return OptimalRouting(ToReal(x.Aggregate()), t, link_bandwidth, options);
}

double OptimalRoutingMlu(const IntegerTopology& x, const TrafficMatrix& t,
                         double link_bandwidth, const lp::SolverOptions& options) {
  return OptimalRoutingMlu(ToReal(x.Aggregate()), t, link_bandwidth, options);
}

double IdealToeMlu(const PhysicalTopology& phys, const TrafficMatrix& t,
                   const PipelineOptions& options) {
  if (t.IsZero()) return 0.0;
  return 1.0 / SolveMaxminThroughput(phys, {t}, options).mu;
}

}  // namespace couder
