#include "couder/optimize.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace couder {
namespace {

// Throughput is held just below its optimum in later stages so that
// round-off in the step-1 value cannot make them infeasible.
constexpr double kMuBackoff = 1e-9;

// Link counts below this are round-off and treated as absent.
constexpr double kLinkFloor = 1e-9;

enum class Objective { kMaxThroughput, kFeasibility, kMaxDirect };

struct StageSpec {
  const RealMatrix* links = nullptr;  // frozen link counts, else free d
  std::optional<double> mu;           // fixed throughput, else variable
  std::optional<double> beta;
  SensitivityCap cap_mode = SensitivityCap::kPerLink;
  Objective objective = Objective::kMaxThroughput;
};

// Demands normalized by their largest entry; all LPs work in these units.
struct Demands {
  std::vector<RealMatrix> t;
  double scale = 1.0;
  Matrix<char> demanded;
};

Demands Normalize(const PhysicalTopology& phys, const std::vector<TrafficMatrix>& critical) {
  Require(!critical.empty(), "critical set is empty");
  const int n = phys.num_pods();
  Demands out;
  out.scale = 0;
  for (const auto& c : critical) {
    Require(c.num_pods() == n, "critical TM size does not match the physical topology");
    for (double v : c.demand().flat()) out.scale = std::max(out.scale, v);
  }
  if (out.scale <= 0) Fail(ErrorCode::kUnbounded, "all critical TMs are zero: throughput is unbounded");
  out.demanded = Matrix<char>(n, n, 0);
  for (const auto& c : critical) {
    RealMatrix m = c.demand();
    for (double& v : m.flat()) v /= out.scale;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (m(i, j) > 0) out.demanded(i, j) = 1;
    out.t.push_back(std::move(m));
  }
  return out;
}

struct BuiltModel {
  lp::LpModel model;
  std::vector<int> path_var;  // per PathSet index, -1 when not modeled
  IntMatrix d_var;            // -1 when frozen or diagonal
  int mu_var = -1;
};

// Links (a, b) traversed by a path.
int PathLinks(const Path& p, int out[2][2]) {
  if (!p.via) {
    out[0][0] = p.src;
    out[0][1] = p.dst;
    return 1;
  }
  out[0][0] = p.src;
  out[0][1] = *p.via;
  out[1][0] = *p.via;
  out[1][1] = p.dst;
  return 2;
}

BuiltModel Build(const PhysicalTopology& phys, const Demands& dem, const PathSet& paths,
                 const StageSpec& spec) {
  const int n = phys.num_pods();
  const double b = phys.link_bandwidth();
  BuiltModel bm;
  lp::LpModel& m = bm.model;

  bm.d_var = IntMatrix(n, n, -1);
  if (!spec.links) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double ub = std::min(phys.EgressRadix(i), phys.IngressRadix(j));
        bm.d_var(i, j) = m.AddVariable("d_" + std::to_string(i) + "_" + std::to_string(j), 0, ub).index;
      }
  }
  if (!spec.mu) bm.mu_var = m.AddVariable("mu", 0, lp::kInfinity).index;

  auto link_cap = [&](int a, int c) { return (*spec.links)(a, c) * b; };

  bm.path_var.assign(paths.size(), -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !dem.demanded(i, j)) continue;
      const std::size_t off = paths.PairOffset(i, j);
      bool any = false;
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        const Path& p = paths[off + q];
        double ub = lp::kInfinity;
        if (spec.mu) ub = 1.0;
        if (spec.links) {
          int lk[2][2];
          int cnt = PathLinks(p, lk);
          double cap = lp::kInfinity;
          for (int e = 0; e < cnt; ++e) cap = std::min(cap, link_cap(lk[e][0], lk[e][1]));
          if (cap <= 0) continue;  // path crosses a missing link
          if (spec.beta) {
            double c = spec.cap_mode == SensitivityCap::kPerLink ? cap : link_cap(i, j);
            ub = std::min(ub, *spec.beta * c);
          }
        }
        any = true;
        std::ostringstream name;
        name << "w_" << i << "_" << j << "_" << (p.via ? *p.via : -1);
        bm.path_var[off + q] = m.AddVariable(name.str(), 0, ub).index;
      }
      if (!any) {
        std::ostringstream os;
        os << "demanded pair (" << i << ", " << j << ") has no path with capacity";
        Fail(ErrorCode::kInfeasible, os.str());
      }
    }
  }

  // Degree bounds.
  if (!spec.links) {
    for (int i = 0; i < n; ++i) {
      lp::LinearExpr row, col;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row.Add(lp::VarId{bm.d_var(i, j)}, 1.0);
        col.Add(lp::VarId{bm.d_var(j, i)}, 1.0);
      }
      m.AddConstraint(row, lp::Relation::kLessEqual, phys.EgressRadix(i), "egress");
      m.AddConstraint(col, lp::Relation::kLessEqual, phys.IngressRadix(i), "ingress");
    }
  }

  // Split rows.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !dem.demanded(i, j)) continue;
      lp::LinearExpr e;
      const std::size_t off = paths.PairOffset(i, j);
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        if (bm.path_var[off + q] >= 0) e.Add(lp::VarId{bm.path_var[off + q]}, 1.0);
      }
      if (spec.mu) {
        m.AddConstraint(e, lp::Relation::kEqual, 1.0, "split");
      } else {
        e.Add(lp::VarId{bm.mu_var}, -1.0);
        m.AddConstraint(e, lp::Relation::kEqual, 0.0, "split");
      }
    }
  }

  // Link loads per TM.
  const double coef_scale = spec.mu ? *spec.mu : 1.0;
  for (const RealMatrix& t : dem.t) {
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < n; ++c) {
        if (a == c) continue;
        lp::LinearExpr e;
        auto add = [&](int src, int dst, std::size_t idx) {
          if (bm.path_var[idx] >= 0 && t(src, dst) > 0) {
            e.Add(lp::VarId{bm.path_var[idx]}, coef_scale * t(src, dst));
          }
        };
        add(a, c, paths.PairOffset(a, c));
        for (int k = 0; k < n; ++k) {
          if (k == a || k == c) continue;
          // a -> c -> k: first hop of pair (a, k) via c.
          add(a, k, paths.IndexOf({a, k, c}));
          // k -> a -> c: second hop of pair (k, c) via a.
          add(k, c, paths.IndexOf({k, c, a}));
        }
        if (e.empty()) continue;
        if (spec.links) {
          m.AddConstraint(e, lp::Relation::kLessEqual, link_cap(a, c), "load");
        } else {
          e.Add(lp::VarId{bm.d_var(a, c)}, -b);
          m.AddConstraint(e, lp::Relation::kLessEqual, 0.0, "load");
        }
      }
    }
  }

  // Sensitivity cap on free topologies; frozen ones use variable bounds.
  if (spec.beta && !spec.links) {
    for (std::size_t idx = 0; idx < paths.size(); ++idx) {
      if (bm.path_var[idx] < 0) continue;
      const Path& p = paths[idx];
      int lk[2][2];
      int cnt = PathLinks(p, lk);
      if (spec.cap_mode == SensitivityCap::kLiteral) {
        cnt = 1;
        lk[0][0] = p.src;
        lk[0][1] = p.dst;
      }
      for (int e = 0; e < cnt; ++e) {
        lp::LinearExpr row;
        row.Add(lp::VarId{bm.path_var[idx]}, 1.0);
        row.Add(lp::VarId{bm.d_var(lk[e][0], lk[e][1])}, -*spec.beta * b);
        m.AddConstraint(row, lp::Relation::kLessEqual, 0.0, "sensitivity");
      }
    }
  }

  switch (spec.objective) {
    case Objective::kMaxThroughput:
      m.SetObjective(lp::Sense::kMaximize, {{lp::VarId{bm.mu_var}, 1.0}});
      break;
    case Objective::kFeasibility:
      break;
    case Objective::kMaxDirect: {
      lp::VarId z = m.AddVariable("z", 0, lp::kInfinity);
      for (const RealMatrix& t : dem.t) {
        lp::LinearExpr e;
        e.Add(z, 1.0);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int v = bm.path_var[paths.PairOffset(i, j)];
            if (v >= 0 && t(i, j) > 0) e.Add(lp::VarId{v}, -t(i, j));
          }
        m.AddConstraint(e, lp::Relation::kLessEqual, 0.0, "direct");
      }
      m.SetObjective(lp::Sense::kMaximize, {{z, 1.0}});
      break;
    }
  }
  return bm;
}

// Reads d and renormalized weights from an LP point.
FractionalSolution Extract(const PhysicalTopology& phys, const Demands& dem,
                           const PathSet& paths, const BuiltModel& bm, const StageSpec& spec,
                           const std::vector<double>& values) {
  const int n = phys.num_pods();
  FractionalSolution out;
  out.d.d = RealMatrix(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out.d.d(i, j) = spec.links ? (*spec.links)(i, j) : std::max(0.0, values[bm.d_var(i, j)]);
      if (out.d.d(i, j) < kLinkFloor) out.d.d(i, j) = 0;
    }
  auto alive = [&](const Path& p) {
    int lk[2][2];
    const int cnt = PathLinks(p, lk);
    for (int e = 0; e < cnt; ++e)
      if (out.d.d(lk[e][0], lk[e][1]) <= 0) return false;
    return true;
  };
  out.omega.num_pods = n;
  out.omega.weights.assign(paths.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t off = paths.PairOffset(i, j);
      if (!dem.demanded(i, j)) {
        // Free in every LP; split by bottleneck capacity so off-set demand
        // avoids missing links.
        double cap_sum = 0;
        for (int q = 0; q < paths.paths_per_pair(); ++q) {
          const Path& p = paths[off + q];
          const RealMatrix& d = out.d.d;
          const double cap = p.via ? std::min(d(i, *p.via), d(*p.via, j)) : d(i, j);
          out.omega.weights[off + q] = std::max(cap, 0.0);
          cap_sum += out.omega.weights[off + q];
        }
        if (cap_sum <= 0) {
          std::fill_n(out.omega.weights.begin() + off, paths.paths_per_pair(), 0.0);
          out.omega.weights[off] = 1.0;
          continue;
        }
        for (int q = 0; q < paths.paths_per_pair(); ++q) out.omega.weights[off + q] /= cap_sum;
        continue;
      }
      double sum = 0;
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        int v = bm.path_var[off + q];
        double w = v >= 0 && alive(paths[off + q]) ? std::max(0.0, values[v]) : 0.0;
        out.omega.weights[off + q] = w;
        sum += w;
      }
      if (sum <= 0) Fail(ErrorCode::kInfeasible, "zero throughput: demanded pair unroutable");
      for (int q = 0; q < paths.paths_per_pair(); ++q) out.omega.weights[off + q] /= sum;
    }
  }
  return out;
}

// Throughput (in normalized demand units) that the extracted weights
// actually sustain on the extracted links for every critical TM.
double Certify(const PhysicalTopology& phys, const Demands& dem, const PathSet& paths,
               const FractionalSolution& s) {
  const int n = phys.num_pods();
  const double b = phys.link_bandwidth();
  double mu = std::numeric_limits<double>::infinity();
  for (const RealMatrix& t : dem.t) {
    RealMatrix load(n, n, 0.0);
    for (std::size_t idx = 0; idx < paths.size(); ++idx) {
      const Path& p = paths[idx];
      const double f = s.omega.weights[idx] * t(p.src, p.dst);
      if (f <= 0) continue;
      int lk[2][2];
      const int cnt = PathLinks(p, lk);
      for (int e = 0; e < cnt; ++e) load(lk[e][0], lk[e][1]) += f;
    }
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        if (load(a, c) > 0) mu = std::min(mu, s.d.d(a, c) * b / load(a, c));
  }
  return mu;
}

lp::LpSolution SolveOrThrow(const lp::LpModel& model, const lp::SolverOptions& opt,
                            const char* what) {
  lp::LpSolution sol = lp::Solve(model, opt);
  if (sol.status == lp::Status::kInfeasible) {
    Fail(ErrorCode::kInfeasible, std::string(what) + ": LP infeasible");
  }
  if (sol.status == lp::Status::kUnbounded) {
    Fail(ErrorCode::kUnbounded, std::string(what) + ": LP unbounded");
  }
  return sol;
}

FractionalSolution StepThroughput(const PhysicalTopology& phys, const Demands& dem,
                                  const PathSet& paths, const RealMatrix* links,
                                  const PipelineOptions& opt) {
  StageSpec spec;
  spec.links = links;
  spec.objective = Objective::kMaxThroughput;
  BuiltModel bm = Build(phys, dem, paths, spec);
  lp::LpSolution sol = SolveOrThrow(bm.model, opt.lp, "max-min throughput");
  const double mu_scaled = sol.values[bm.mu_var];
  if (mu_scaled <= 0) Fail(ErrorCode::kInfeasible, "zero throughput: demanded pair unroutable");
  FractionalSolution out = Extract(phys, dem, paths, bm, spec, sol.values);
  out.mu = std::min(mu_scaled, Certify(phys, dem, paths, out)) / dem.scale;
  out.omega.mu = out.mu;
  return out;
}

// Largest omega_p / cap over demanded-pair paths under the given indexing.
double CapRatio(const PhysicalTopology& phys, const Demands& dem, const PathSet& paths,
                const FractionalSolution& s, SensitivityCap mode) {
  const int n = phys.num_pods();
  const double b = phys.link_bandwidth();
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || !dem.demanded(i, j)) continue;
      const std::size_t off = paths.PairOffset(i, j);
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        double w = s.omega.weights[off + q];
        if (w <= 0) continue;
        int lk[2][2];
        int cnt = PathLinks(paths[off + q], lk);
        if (mode == SensitivityCap::kLiteral) {
          cnt = 1;
          lk[0][0] = i;
          lk[0][1] = j;
        }
        for (int e = 0; e < cnt; ++e) {
          double cap = s.d.d(lk[e][0], lk[e][1]) * b;
          worst = std::max(worst, cap > 0 ? w / cap : std::numeric_limits<double>::infinity());
        }
      }
    }
  return worst;
}

FractionalSolution StepDesensitize(const PhysicalTopology& phys, const Demands& dem,
                                   const PathSet& paths, const RealMatrix* links,
                                   double mu_star, const PipelineOptions& opt,
                                   const FractionalSolution* known) {
  StageSpec spec;
  spec.links = links;
  spec.mu = mu_star * dem.scale * (1 - kMuBackoff);
  spec.cap_mode = opt.cap_mode;
  spec.objective = Objective::kFeasibility;

  auto attempt = [&](double beta) -> std::optional<FractionalSolution> {
    spec.beta = beta;
    BuiltModel bm;
    try {
      bm = Build(phys, dem, paths, spec);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInfeasible) return std::nullopt;
      throw;
    }
    auto values = lp::SolveFeasibility(bm.model, opt.lp);
    if (!values) return std::nullopt;
    return Extract(phys, dem, paths, bm, spec, *values);
  };

  double lo = 0, hi = 1;
  std::optional<FractionalSolution> best;
  if (known) {
    double ratio = CapRatio(phys, dem, paths, *known, opt.cap_mode);
    if (ratio <= hi) {
      hi = ratio;
      best = *known;
    }
  }
  if (!best) {
    while (!(best = attempt(hi))) {
      lo = hi;
      hi *= 2;
      if (hi > opt.beta_cap) {
        Fail(ErrorCode::kInternal, "no feasible sensitivity bound below the cap");
      }
    }
  }
  while (hi - lo > opt.beta_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (auto s = attempt(mid)) {
      hi = mid;
      best = std::move(s);
    } else {
      lo = mid;
    }
  }
  best->mu = std::min(mu_star, Certify(phys, dem, paths, *best) / dem.scale);
  best->beta = hi;
  best->omega.mu = best->mu;
  best->omega.beta = hi;
  return *best;
}

FractionalSolution StepDirect(const PhysicalTopology& phys, const Demands& dem,
                              const PathSet& paths, const RealMatrix* links, double mu_star,
                              std::optional<double> beta, const PipelineOptions& opt) {
  StageSpec spec;
  spec.links = links;
  spec.mu = mu_star * dem.scale * (1 - kMuBackoff);
  spec.beta = beta;
  spec.cap_mode = opt.cap_mode;
  spec.objective = Objective::kMaxDirect;
  BuiltModel bm = Build(phys, dem, paths, spec);
  lp::LpSolution sol = SolveOrThrow(bm.model, opt.lp, "hop-count minimization");
  FractionalSolution out = Extract(phys, dem, paths, bm, spec, sol.values);
  out.mu = std::min(mu_star, Certify(phys, dem, paths, out) / dem.scale);
  out.beta = beta;
  out.omega.mu = out.mu;
  out.omega.beta = beta;
  return out;
}

FractionalSolution Pipeline(const PhysicalTopology& phys,
                            const std::vector<TrafficMatrix>& critical, const RealMatrix* links,
                            const PipelineOptions& opt) {
  Demands dem = Normalize(phys, critical);
  PathSet paths(phys.num_pods());
  FractionalSolution step1 = StepThroughput(phys, dem, paths, links, opt);
  std::optional<double> beta;
  if (opt.desensitize) {
    beta = StepDesensitize(phys, dem, paths, links, step1.mu, opt, &step1).beta;
  }
  return StepDirect(phys, dem, paths, links, step1.mu, beta, opt);
}

void CheckLinks(const PhysicalTopology& phys, const RealMatrix& links) {
  const int n = phys.num_pods();
  Require(links.rows() == static_cast<std::size_t>(n) && links.cols() == static_cast<std::size_t>(n),
          "link matrix does not match the physical topology");
  for (double v : links.flat()) Require(std::isfinite(v) && v >= 0, "link counts must be >= 0");
}

RealMatrix ToLinks(const PhysicalTopology& phys, const IntegerTopology& x) {
  Require(x.num_ocs() == phys.num_ocs() && x.num_pods() == phys.num_pods(),
          "integer topology does not match the physical topology");
  IntMatrix agg = x.Aggregate();
  RealMatrix links(agg.rows(), agg.cols());
  for (std::size_t k = 0; k < links.flat().size(); ++k) links.flat()[k] = agg.flat()[k];
  return links;
}

}  // namespace

FractionalSolution SolveMaxminThroughput(const PhysicalTopology& phys,
                                         const std::vector<TrafficMatrix>& critical,
                                         const PipelineOptions& options) {
  Demands dem = Normalize(phys, critical);
  return StepThroughput(phys, dem, PathSet(phys.num_pods()), nullptr, options);
}

FractionalSolution Desensitize(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical, double mu_star,
                               const PipelineOptions& options) {
  Require(mu_star > 0, "throughput must be positive");
  Demands dem = Normalize(phys, critical);
  return StepDesensitize(phys, dem, PathSet(phys.num_pods()), nullptr, mu_star, options,
                         nullptr);
}

FractionalSolution MinimizeAhc(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical, double mu_star,
                               std::optional<double> beta, const PipelineOptions& options) {
  Require(mu_star > 0, "throughput must be positive");
  Demands dem = Normalize(phys, critical);
  return StepDirect(phys, dem, PathSet(phys.num_pods()), nullptr, mu_star, beta, options);
}

FractionalSolution RunPipeline(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical,
                               const PipelineOptions& options) {
  return Pipeline(phys, critical, nullptr, options);
}

FractionalSolution RecomputeRouting(const PhysicalTopology& phys, const RealMatrix& links,
                                    const std::vector<TrafficMatrix>& critical,
                                    const PipelineOptions& options) {
  CheckLinks(phys, links);
  return Pipeline(phys, critical, &links, options);
}

FractionalSolution RecomputeRouting(const PhysicalTopology& phys, const IntegerTopology& x,
                                    const std::vector<TrafficMatrix>& critical,
                                    const PipelineOptions& options) {
  return RecomputeRouting(phys, ToLinks(phys, x), critical, options);
}

double FrozenThroughput(const PhysicalTopology& phys, const RealMatrix& links,
                        const std::vector<TrafficMatrix>& critical,
                        const PipelineOptions& options) {
  CheckLinks(phys, links);
  Demands dem = Normalize(phys, critical);
  return StepThroughput(phys, dem, PathSet(phys.num_pods()), &links, options).mu;
}

double FrozenThroughput(const PhysicalTopology& phys, const IntegerTopology& x,
                        const std::vector<TrafficMatrix>& critical,
                        const PipelineOptions& options) {
  return FrozenThroughput(phys, ToLinks(phys, x), critical, options);
}

PerTmSolution SolveMaxminPerTm(const PhysicalTopology& phys,
                               const std::vector<TrafficMatrix>& critical,
                               const PipelineOptions& options) {
  Demands dem = Normalize(phys, critical);
  const int n = phys.num_pods();
  const double b = phys.link_bandwidth();
  PathSet paths(n);
  lp::LpModel m;
  IntMatrix d_var(n, n, -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) d_var(i, j) = m.AddVariable("d", 0, lp::kInfinity).index;
  lp::VarId mu = m.AddVariable("mu", 0, lp::kInfinity);
  for (int i = 0; i < n; ++i) {
    lp::LinearExpr row, col;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      row.Add(lp::VarId{d_var(i, j)}, 1.0);
      col.Add(lp::VarId{d_var(j, i)}, 1.0);
    }
    m.AddConstraint(row, lp::Relation::kLessEqual, phys.EgressRadix(i));
    m.AddConstraint(col, lp::Relation::kLessEqual, phys.IngressRadix(i));
  }
  const int kk = static_cast<int>(dem.t.size());
  std::vector<std::vector<int>> var(kk, std::vector<int>(paths.size(), -1));
  for (int k = 0; k < kk; ++k) {
    const RealMatrix& t = dem.t[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j || t(i, j) <= 0) continue;
        lp::LinearExpr e;
        const std::size_t off = paths.PairOffset(i, j);
        for (int q = 0; q < paths.paths_per_pair(); ++q) {
          var[k][off + q] = m.AddVariable("w", 0, lp::kInfinity).index;
          e.Add(lp::VarId{var[k][off + q]}, 1.0);
        }
        e.Add(mu, -1.0);
        m.AddConstraint(e, lp::Relation::kEqual, 0.0);
      }
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        if (a == c) continue;
        lp::LinearExpr e;
        auto add = [&](int src, int dst, std::size_t idx) {
          if (var[k][idx] >= 0) e.Add(lp::VarId{var[k][idx]}, t(src, dst));
        };
        add(a, c, paths.PairOffset(a, c));
        for (int v = 0; v < n; ++v) {
          if (v == a || v == c) continue;
          add(a, v, paths.IndexOf({a, v, c}));
          add(v, c, paths.IndexOf({v, c, a}));
        }
        if (e.empty()) continue;
        e.Add(lp::VarId{d_var(a, c)}, -b);
        m.AddConstraint(e, lp::Relation::kLessEqual, 0.0);
      }
  }
  m.SetObjective(lp::Sense::kMaximize, {{mu, 1.0}});
  lp::LpSolution sol = SolveOrThrow(m, options.lp, "per-TM throughput");
  const double mu_scaled = sol.value(mu);
  if (mu_scaled <= 0) Fail(ErrorCode::kInfeasible, "zero throughput");
  PerTmSolution out;
  out.mu = mu_scaled / dem.scale;
  out.d.d = RealMatrix(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) out.d.d(i, j) = std::max(0.0, sol.values[d_var(i, j)]);
  for (int k = 0; k < kk; ++k) {
    RoutingWeights w;
    w.num_pods = n;
    w.mu = out.mu;
    w.weights.assign(paths.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const std::size_t off = paths.PairOffset(i, j);
        if (var[k][off] < 0) {
          w.weights[off] = 1.0;
          continue;
        }
        double sum = 0;
        for (int q = 0; q < paths.paths_per_pair(); ++q) sum += std::max(0.0, sol.values[var[k][off + q]]);
        for (int q = 0; q < paths.paths_per_pair(); ++q)
          w.weights[off + q] = std::max(0.0, sol.values[var[k][off + q]]) / sum;
      }
    out.omegas.push_back(std::move(w));
  }
  return out;
}

double MaxSensitivity(const RealMatrix& links, double link_bandwidth,
                      const RoutingWeights& omega) {
  const int n = omega.num_pods;
  PathSet paths(n);
  double worst = 0;
  for (std::size_t idx = 0; idx < paths.size(); ++idx) {
    const double w = omega.weights[idx];
    if (w <= 0) continue;
    int lk[2][2];
    int cnt = PathLinks(paths[idx], lk);
    for (int e = 0; e < cnt; ++e) {
      double cap = links(lk[e][0], lk[e][1]) * link_bandwidth;
      worst = std::max(worst, cap > 0 ? w / cap : std::numeric_limits<double>::infinity());
    }
  }
  return worst;
}

}  // namespace couder
