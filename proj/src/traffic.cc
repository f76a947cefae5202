#include "couder/traffic.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "couder/kernels.h"
#include "couder/lp.h"

namespace couder {

CriticalSet ExtractCritical(const TmSequence& seq, int k, std::uint64_t seed) {
  Require(!seq.empty(), "cannot extract critical TMs from an empty sequence");
  Require(k >= 1 && k <= static_cast<int>(seq.size()),
          "k must lie in [1, sequence length]");
  const int n = seq.num_pods();
  std::vector<std::vector<double>> points;
  points.reserve(seq.size());
  for (const TrafficMatrix& t : seq) {
    points.emplace_back(t.demand().flat().begin(), t.demand().flat().end());
  }
  KMeansResult km = KMeans(points, k, seed);

  std::vector<RealMatrix> maxes(k, RealMatrix(n, n, 0.0));
  for (std::size_t i = 0; i < points.size(); ++i) {
    kernels::ElementwiseMax(points[i], maxes[km.assignment[i]].flat());
  }
  CriticalSet out;
  out.seed = seed;
  out.assignment = km.assignment;
  for (auto& m : maxes) out.matrices.emplace_back(std::move(m));
  return out;
}

BoundednessResult CheckBounded(const TrafficMatrix& t,
                               const std::vector<TrafficMatrix>& critical,
                               BoundMode mode) {
  Require(!critical.empty(), "critical set is empty");
  const int n = t.num_pods();
  for (const auto& c : critical) Require(c.num_pods() == n, "critical TM size mismatch");
  const int k = static_cast<int>(critical.size());

  double scale = 1.0;
  for (double v : t.demand().flat()) scale = std::max(scale, v);
  const double tol = 1e-6 * scale;

  BoundednessResult res;
  res.lambdas.assign(k, 0.0);
  if (mode == BoundMode::kDominated) {
    // A single dominating critical TM is the common case; skip the LP.
    for (int c = 0; c < k; ++c) {
      bool dominated = true;
      const auto a = t.demand().flat(), b = critical[c].demand().flat();
      for (std::size_t e = 0; e < a.size() && dominated; ++e) dominated = a[e] <= b[e];
      if (dominated) {
        res.bounded = true;
        res.lambdas[c] = 1.0;
        return res;
      }
    }
  }

  lp::LpModel model;
  std::vector<lp::VarId> lambda;
  lp::LinearExpr sum;
  for (int c = 0; c < k; ++c) {
    lambda.push_back(model.AddVariable("lambda" + std::to_string(c), 0.0, 1.0));
    sum.Add(lambda.back(), 1.0);
  }
  lp::VarId s = model.AddVariable("shortfall", 0.0, lp::kInfinity);
  model.AddConstraint(sum, lp::Relation::kLessEqual, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      lp::LinearExpr e;
      bool any = t(i, j) > 0;
      for (int c = 0; c < k; ++c) {
        e.Add(lambda[c], critical[c](i, j));
        any = any || critical[c](i, j) > 0;
      }
      if (!any) continue;
      lp::LinearExpr lo = e;
      lo.Add(s, 1.0);
      model.AddConstraint(lo, lp::Relation::kGreaterEqual, t(i, j));
      if (mode == BoundMode::kExact) {
        e.Add(s, -1.0);
        model.AddConstraint(e, lp::Relation::kLessEqual, t(i, j));
      }
    }
  }
  model.SetObjective(lp::Sense::kMinimize, {{s, 1.0}});
  lp::LpSolution sol = lp::Solve(model);
  if (sol.status != lp::Status::kOptimal) {
    Fail(ErrorCode::kInternal, "boundedness LP did not reach optimality");
  }
  res.slack = sol.value(s);
  res.bounded = res.slack <= tol;
  for (int c = 0; c < k; ++c) res.lambdas[c] = sol.value(lambda[c]);
  return res;
}

std::vector<CurvePoint> BoundabilityCurve(const TmSequence& seq, int crit_k,
                                          const std::vector<double>& windows,
                                          BoundMode mode, std::uint64_t seed, int jobs) {
  Require(!windows.empty(), "boundability curve needs at least one window");
  Require(crit_k >= 1, "critical count must be positive");
  Require(std::is_sorted(windows.begin(), windows.end()), "windows must be ascending");
  const std::size_t n = seq.size();
  // The first TM has no past at all and is not scored.
  const std::size_t scored = n > 0 ? n - 1 : 0;
  std::vector<CurvePoint> out;
  for (double w : windows) {
    std::vector<char> bounded(n, 0);
    auto work = [&](std::size_t begin, std::size_t stride) {
      for (std::size_t i = begin + 1; i < n; i += stride) {
        const double now = seq.TimeOf(i);
        std::vector<TrafficMatrix> history;
        for (std::size_t h = 0; h < i; ++h) {
          if (seq.TimeOf(h) >= now - w) history.push_back(seq[h]);
        }
        if (history.empty()) continue;
        const int k = std::min<int>(crit_k, static_cast<int>(history.size()));
        CriticalSet crit =
            ExtractCritical(TmSequence(std::move(history), seq.window_seconds()), k, seed);
        bounded[i] = CheckBounded(seq[i], crit.matrices, mode).bounded;
      }
    };
    const std::size_t threads = std::max(1, jobs);
    if (threads == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
      for (auto& th : pool) th.join();
    }
    double count = 0;
    for (char b : bounded) count += b;
    out.push_back({w, scored == 0 ? 0.0 : count / static_cast<double>(scored)});
  }
  return out;
}

TmSequence GenStorageTms(int num_pods, int count, std::uint64_t seed,
                         const StorageOptions& options) {
  Require(num_pods >= 4 && num_pods % 2 == 0, "storage traces need an even pod count >= 4");
  Require(count >= 0, "count must be nonnegative");
  Require(options.min_demand >= 0 && options.max_demand >= options.min_demand,
          "bad demand range");
  const int half = num_pods / 2;
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    return options.min_demand + (options.max_demand - options.min_demand) * Uniform01(rng);
  };
  std::vector<TrafficMatrix> tms;
  for (int t = 0; t < count; ++t) {
    RealMatrix m(num_pods, num_pods, 0.0);
    for (int c = 0; c < half; ++c) {
      const double read = draw(), write = draw();
      for (int s = half; s < num_pods; ++s) {
        m(c, s) = write / half;
        m(s, c) = read / half;
      }
    }
    tms.emplace_back(std::move(m), t * options.window_seconds);
  }
  return TmSequence(std::move(tms), options.window_seconds);
}

BurstSpec MakeBurstSpec(const TmSequence& seq, double burst_factor) {
  Require(seq.size() >= 2, "burst generation needs at least two TMs");
  Require(burst_factor >= 0, "burst factor must be nonnegative");
  const int n = seq.num_pods();
  const double count = static_cast<double>(seq.size());
  RealMatrix base(n, n, 0.0), mean(n, n, 0.0), sd(n, n, 0.0);
  for (const auto& t : seq) {
    kernels::ElementwiseMax(t.demand().flat(), base.flat());
    kernels::Axpy(1.0 / count, t.demand().flat(), mean.flat());
  }
  for (const auto& t : seq) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double dv = t(i, j) - mean(i, j);
        sd(i, j) += dv * dv;
      }
  }
  for (double& v : sd.flat()) v = std::sqrt(v / (count - 1));
  return {TrafficMatrix(std::move(base)), std::move(sd), burst_factor};
}

std::vector<BurstTm> GenBurstTms(const TmSequence& seq, double burst_factor,
                                 int max_burst_pairs) {
  Require(max_burst_pairs == 1 || max_burst_pairs == 2, "burst sets hold 1 or 2 pairs");
  BurstSpec spec = MakeBurstSpec(seq, burst_factor);
  const int n = seq.num_pods();
  std::vector<PodPair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);

  auto make = [&](std::vector<PodPair> set) {
    RealMatrix m = spec.base.demand();
    for (auto [i, j] : set) m(i, j) += burst_factor * spec.stddev(i, j);
    return BurstTm{std::move(set), TrafficMatrix(std::move(m))};
  };
  std::vector<BurstTm> out;
  for (const auto& p : pairs) out.push_back(make({p}));
  if (max_burst_pairs == 2) {
    for (std::size_t a = 0; a < pairs.size(); ++a)
      for (std::size_t b = a + 1; b < pairs.size(); ++b) out.push_back(make({pairs[a], pairs[b]}));
  }
  return out;
}

}  // namespace couder
