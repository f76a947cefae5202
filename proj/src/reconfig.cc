#include <algorithm>
#include <cmath>
#include <tuple>

#include "couder/evaluate.h"
#include "couder/round.h"
#include "couder/traffic.h"

namespace couder {
namespace {

// Stage ratios such as 0.6 / 0.2 land a few ulps off an integer.
constexpr double kStageSlack = 1e-9;

struct Circuit {
  int i, j, m;
  bool operator<(const Circuit& o) const {
    return std::tie(i, j, m) < std::tie(o.i, o.j, o.m);
  }
};

// Weights restricted to paths whose links all survive, renormalized per
// pair. Pairs left without a path keep their old weights.
RoutingWeights Restrict(const RoutingWeights& omega, const RealMatrix& links) {
  const int n = omega.num_pods;
  PathSet paths(n);
  RoutingWeights out = omega;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t off = paths.PairOffset(i, j);
      double sum = 0;
      for (int q = 0; q < paths.paths_per_pair(); ++q) {
        const Path& p = paths[off + q];
        const bool alive = p.via ? links(i, *p.via) > 0 && links(*p.via, j) > 0 : links(i, j) > 0;
        if (!alive) out.weights[off + q] = 0;
        sum += out.weights[off + q];
      }
      if (sum <= 0) {
        for (int q = 0; q < paths.paths_per_pair(); ++q) out.weights[off + q] = omega.weights[off + q];
        continue;
      }
      for (int q = 0; q < paths.paths_per_pair(); ++q) out.weights[off + q] /= sum;
    }
  return out;
}

RealMatrix Links(const IntegerTopology& x) {
  IntMatrix agg = x.Aggregate();
  RealMatrix out(agg.rows(), agg.cols());
  for (std::size_t k = 0; k < agg.flat().size(); ++k) out.flat()[k] = agg.flat()[k];
  return out;
}

struct State {
  IntegerTopology x;
  RoutingWeights omega;
};

struct Transition {
  double start = 0;
  int stages = 0;
  std::vector<RealMatrix> stage_links;  // capacity during each stage
  RoutingWeights old_omega;
};

}  // namespace

int StageCount(double changed_fraction, double alpha_pred) {
  Require(alpha_pred > 0 && alpha_pred < 1, "alpha_pred must lie in (0, 1)");
  Require(changed_fraction >= 0 && changed_fraction <= 1, "changed fraction must lie in [0, 1]");
  if (changed_fraction == 0) return 0;
  return static_cast<int>(std::ceil(changed_fraction / (1 - alpha_pred) - kStageSlack));
}

double ChangedFraction(const IntegerTopology& from, const IntegerTopology& to) {
  Require(from.num_ocs() == to.num_ocs() && from.num_pods() == to.num_pods(),
          "topologies differ in shape");
  long removed = 0;
  for (int m = 0; m < from.num_ocs(); ++m)
    for (int i = 0; i < from.num_pods(); ++i)
      for (int j = 0; j < from.num_pods(); ++j)
        removed += std::max(0, from.at(m, i, j) - to.at(m, i, j));
  const long total = from.TotalLinks();
  return total > 0 ? static_cast<double>(removed) / total : 0.0;
}

SimResult SimulateReconfig(const PhysicalTopology& phys, const TmSequence& seq,
                           const ReconfigPolicy& policy) {
  Require(policy.alpha_pred > 0 && policy.alpha_pred < 1, "alpha_pred must lie in (0, 1)");
  Require(policy.frequency > 0, "reconfiguration frequency must be positive");
  Require(policy.stage_latency >= 0, "stage latency must be nonnegative");
  Require(policy.lookback > 0 && policy.k >= 1, "lookback and k must be positive");
  Require(seq.empty() || seq.num_pods() == phys.num_pods(),
          "TM size does not match the physical topology");
  SimResult result;
  if (seq.empty()) return result;
  Require(seq.window_seconds() <= policy.frequency,
          "aggregation window exceeds the reconfiguration interval");

  const int n = phys.num_pods();
  const double first_epoch = seq.TimeOf(0) + policy.lookback;
  std::vector<TrafficMatrix> critical;
  std::optional<State> current;
  std::optional<Transition> transition;
  int epoch = -1;

  auto run_epoch = [&](double when) {
    std::vector<TrafficMatrix> history;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const double t = seq.TimeOf(i);
      if (t >= when - policy.lookback && t < when) history.push_back(seq[i]);
    }
    if (!history.empty()) {
      const int k = std::min<int>(policy.k, static_cast<int>(history.size()));
      CriticalSet fresh =
          ExtractCritical(TmSequence(history, seq.window_seconds()), k, policy.seed);
      // Grow the set; members already inside its hull add nothing.
      for (const TrafficMatrix& c : fresh.matrices) {
        if (c.IsZero()) continue;
        if (!critical.empty() && CheckBounded(c, critical, BoundMode::kDominated).bounded) continue;
        critical.push_back(TrafficMatrix(c.demand()));
      }
    }
    ++epoch;
    EpochInfo info;
    info.time = when;
    if (critical.empty()) {
      result.epochs.push_back(info);
      return;
    }
    FractionalSolution frac = RunPipeline(phys, critical, policy.pipeline);
    RoundingReport rounded = LdmRound(phys, frac.d, policy.ldm_iterations);
    State next_state{rounded.x, {}};
    try {
      FractionalSolution routed = RecomputeRouting(phys, rounded.x, critical, policy.pipeline);
      next_state.omega = routed.omega;
      info.mu = routed.mu;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasible) throw;
      next_state.omega = VlbWeights(rounded.x.Aggregate());
    }

    transition.reset();
    if (current) {
      info.changed_fraction = ChangedFraction(current->x, next_state.x);
      info.stages = StageCount(info.changed_fraction, policy.alpha_pred);
      if (info.stages > 0 && policy.stage_latency > 0) {
        std::vector<Circuit> removed, added;
        for (int m = 0; m < phys.num_ocs(); ++m)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const int diff = next_state.x.at(m, i, j) - current->x.at(m, i, j);
              for (int u = 0; u < -diff; ++u) removed.push_back({i, j, m});
              for (int u = 0; u < diff; ++u) added.push_back({i, j, m});
            }
        std::sort(removed.begin(), removed.end());
        std::sort(added.begin(), added.end());
        Transition tr;
        tr.start = when;
        tr.stages = info.stages;
        tr.old_omega = current->omega;
        RealMatrix links = Links(current->x);
        const int s_count = info.stages;
        auto chunk = [&](const std::vector<Circuit>& v, int s) {
          const std::size_t lo = v.size() * s / s_count, hi = v.size() * (s + 1) / s_count;
          return std::make_pair(lo, hi);
        };
        for (int s = 0; s < s_count; ++s) {
          auto [rlo, rhi] = chunk(removed, s);
          for (std::size_t u = rlo; u < rhi; ++u) links(removed[u].i, removed[u].j) -= 1;
          tr.stage_links.push_back(links);
          auto [alo, ahi] = chunk(added, s);
          for (std::size_t u = alo; u < ahi; ++u) links(added[u].i, added[u].j) += 1;
        }
        transition = std::move(tr);
      }
    }
    current = std::move(next_state);
    result.epochs.push_back(info);
  };

  double next_epoch = first_epoch;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double t = seq.TimeOf(i);
    while (t >= next_epoch) {
      run_epoch(next_epoch);
      next_epoch += policy.frequency;
    }
    if (!current) continue;
    SimSample sample;
    sample.time = t;
    sample.epoch = epoch;
    const double b = phys.link_bandwidth();
    if (transition && t < transition->start + transition->stages * policy.stage_latency) {
      const int s = std::min(transition->stages - 1,
                             static_cast<int>((t - transition->start) / policy.stage_latency));
      const RealMatrix& links = transition->stage_links[s];
      sample.stage = s + 1;
      const RoutingWeights omega = Restrict(transition->old_omega, links);
      sample.record = EvaluateStatic(links, omega, seq[i], b);
      sample.max_sensitivity = MaxSensitivity(links, b, omega);
    } else {
      sample.record = EvaluateStatic(current->x, current->omega, seq[i], b);
      sample.max_sensitivity = MaxSensitivity(Links(current->x), b, current->omega);
    }
    result.samples.push_back(std::move(sample));
  }
  return result;
}

}  // namespace couder
