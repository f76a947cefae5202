#include <algorithm>
#include <cmath>

#include "couder/circulation.h"
#include "couder/evaluate.h"

namespace couder {

IntegerTopology UniformMesh(const PhysicalTopology& phys) {
  const int n = phys.num_pods();
  Require(n >= 2, "a mesh needs at least two pods");
  IntMatrix want(n, n, 0);
  for (int i = 0; i < n; ++i) {
    const int r = phys.EgressRadix(i);
    const int base = r / (n - 1);
    int extra = r % (n - 1);
    for (int j = 0; j < n; ++j)
      if (j != i) want(i, j) = base;
    for (int step = 1; extra > 0; ++step, --extra) want(i, (i + step) % n) += 1;
  }

  // Pack switch by switch with a max-flow subproblem over the remaining
  // demand.
  IntegerTopology x(phys.num_ocs(), n);
  for (int m = 0; m < phys.num_ocs(); ++m) {
    SubproblemSpec spec;
    spec.cost = RealMatrix(n, n, -1.0);
    spec.lower = IntMatrix(n, n, 0);
    spec.upper = want;
    spec.row_caps.resize(n);
    spec.col_caps.resize(n);
    for (int i = 0; i < n; ++i) {
      spec.cost(i, i) = 0;
      spec.row_caps[i] = phys.egress(m, i);
      spec.col_caps[i] = phys.ingress(m, i);
    }
    std::optional<IntMatrix> a = SolveSubproblem(spec);
    if (!a) Fail(ErrorCode::kInternal, "mesh packing subproblem has inconsistent bounds");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        x.at(m, i, j) = (*a)(i, j);
        want(i, j) -= (*a)(i, j);
      }
  }
  return x;
}

RoutingWeights VlbWeights(const IntMatrix& links) {
  const int n = static_cast<int>(links.rows());
  Require(links.cols() == links.rows() && n >= 2, "link matrix must be square");
  PathSet paths(n);
  RoutingWeights w;
  w.num_pods = n;
  w.weights.assign(paths.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t off = paths.PairOffset(i, j);
      double sum = 0;
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        const Path& p = paths[off + q];
        const double cap = p.via ? std::min(links(i, *p.via), links(*p.via, j)) : links(i, j);
        w.weights[off + q] = std::max(cap, 0.0);
        sum += w.weights[off + q];
      }
      if (sum <= 0) {
        w.weights[off] = 1.0;  // unroutable; evaluation flags it
        continue;
      }
      for (int q = 0; q < paths.paths_per_pair(); ++q) w.weights[off + q] /= sum;
    }
  return w;
}

RoutingWeights DirectOnlyWeights(int num_pods) { return DirectRouting(num_pods); }

EvalRecord FatTreeEval(const TrafficMatrix& t, int pod_uplinks, double link_bandwidth,
                       double oversub) {
  Require(pod_uplinks > 0 && link_bandwidth > 0 && oversub > 0,
          "fat-tree parameters must be positive");
  const int n = t.num_pods();
  const double cap = pod_uplinks * link_bandwidth / oversub;
  EvalRecord r;
  r.per_link_util = RealMatrix(n, n, 0.0);
  r.ahc = 2.0;
  r.direct_fraction = 0.0;
  r.mlu = 0;
  for (int i = 0; i < n; ++i) {
    double out = 0, in = 0;
    for (int j = 0; j < n; ++j) {
      out += t(i, j);
      in += t(j, i);
    }
    r.mlu = std::max(r.mlu, std::max(out, in) / cap);
  }
  return r;
}

RealMatrix SensitivityMap(const RealMatrix& links, const RoutingWeights& omega,
                          double link_bandwidth) {
  const int n = omega.num_pods;
  Require(links.rows() == static_cast<std::size_t>(n) && links.cols() == links.rows(),
          "link matrix does not match the routing weights");
  PathSet paths(n);
  RealMatrix sen(n, n, 0.0);
  auto touch = [&](int a, int c, double w) {
    const double cap = links(a, c) * link_bandwidth;
    sen(a, c) = std::max(sen(a, c), cap > 0 ? w / cap : kInfiniteMlu);
  };
  for (std::size_t idx = 0; idx < paths.size(); ++idx) {
    const double w = omega.weights[idx];
    if (w <= 0) continue;
    const Path& p = paths[idx];
    if (!p.via) {
      touch(p.src, p.dst, w);
    } else {
      touch(p.src, *p.via, w);
      touch(*p.via, p.dst, w);
    }
  }
  return sen;
}

}  // namespace couder
