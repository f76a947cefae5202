#include "couder/circulation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace couder {

int FlowNetwork::AddArc(int from, int to, long lower, long upper, double cost) {
  Require(from >= 0 && from < num_nodes_ && to >= 0 && to < num_nodes_,
          "arc endpoint out of range");
  arcs_.push_back({from, to, lower, upper, cost});
  return static_cast<int>(arcs_.size()) - 1;
}

namespace {

// Residual graph for successive shortest paths.
class Residual {
 public:
  explicit Residual(int n) : head_(n, -1) {}

  int Add(int from, int to, long cap, double cost) {
    int e = static_cast<int>(to_.size());
    Push(from, to, cap, cost);
    Push(to, from, 0, -cost);
    return e;
  }

  // Sends up to `want` units from s to t along cheapest paths. Returns the
  // amount sent. Requires nonnegative residual costs on entry.
  long MinCostFlow(int s, int t, long want) {
    const int n = static_cast<int>(head_.size());
    std::vector<double> pot(n, 0.0), dist(n);
    std::vector<int> prev_edge(n);
    long sent = 0;
    using Item = std::pair<double, int>;
    while (sent < want) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::fill(prev_edge.begin(), prev_edge.end(), -1);
      dist[s] = 0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.push({0.0, s});
      while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (int e = head_[v]; e != -1; e = next_[e]) {
          if (cap_[e] <= 0) continue;
          int w = to_[e];
          // Round-off can leave tiny negative reduced costs; clamp them.
          double rc = std::max(0.0, cost_[e] + pot[v] - pot[w]);
          if (dist[v] + rc < dist[w]) {
            dist[w] = dist[v] + rc;
            prev_edge[w] = e;
            pq.push({dist[w], w});
          }
        }
      }
      if (!std::isfinite(dist[t])) break;
      for (int v = 0; v < n; ++v) {
        if (std::isfinite(dist[v])) pot[v] += dist[v];
      }
      long push = want - sent;
      for (int v = t; v != s; v = to_[prev_edge[v] ^ 1]) {
        push = std::min(push, cap_[prev_edge[v]]);
      }
      for (int v = t; v != s; v = to_[prev_edge[v] ^ 1]) {
        cap_[prev_edge[v]] -= push;
        cap_[prev_edge[v] ^ 1] += push;
      }
      sent += push;
    }
    return sent;
  }

  long Flow(int e) const { return cap_[e ^ 1]; }

 private:
  void Push(int from, int to, long cap, double cost) {
    to_.push_back(to);
    cap_.push_back(cap);
    cost_.push_back(cost);
    next_.push_back(head_[from]);
    head_[from] = static_cast<int>(to_.size()) - 1;
  }

  std::vector<int> head_, to_, next_;
  std::vector<long> cap_;
  std::vector<double> cost_;
};

}  // namespace

std::optional<Circulation> SolveCirculation(const FlowNetwork& net) {
  const auto& arcs = net.arcs();
  for (const FlowArc& a : arcs) {
    Require(a.upper >= 0, "arc upper bound must be nonnegative");
    Require(a.lower <= a.upper, "arc lower bound exceeds upper bound");
    Require(a.upper < std::numeric_limits<long>::max() / 4, "arc upper bound must be finite");
    Require(std::isfinite(a.cost), "arc cost must be finite");
  }
  // Start from f = l on nonnegative arcs and f = u on negative ones; the
  // residual then has only nonnegative costs and the node imbalances are
  // repaired by a shortest-path flow between two extra terminals.
  const int n = net.num_nodes();
  const int source = n, sink = n + 1;
  Residual res(n + 2);
  std::vector<long> base(arcs.size());
  std::vector<int> edge(arcs.size());
  std::vector<bool> reversed(arcs.size());
  std::vector<long> excess(n, 0);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const FlowArc& a = arcs[k];
    const long slack = a.upper - a.lower;
    if (a.cost < 0) {
      base[k] = a.upper;
      reversed[k] = true;
      edge[k] = res.Add(a.to, a.from, slack, -a.cost);
    } else {
      base[k] = a.lower;
      edge[k] = res.Add(a.from, a.to, slack, a.cost);
    }
    excess[a.to] += base[k];
    excess[a.from] -= base[k];
  }
  long need = 0;
  for (int v = 0; v < n; ++v) {
    if (excess[v] > 0) {
      res.Add(source, v, excess[v], 0.0);
      need += excess[v];
    } else if (excess[v] < 0) {
      res.Add(v, sink, -excess[v], 0.0);
    }
  }
  if (res.MinCostFlow(source, sink, need) < need) return std::nullopt;

  Circulation out;
  out.flow.resize(arcs.size());
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    long moved = res.Flow(edge[k]);
    out.flow[k] = reversed[k] ? base[k] - moved : base[k] + moved;
    out.cost += arcs[k].cost * static_cast<double>(out.flow[k]);
  }
  return out;
}

SubproblemNetwork BuildSubproblem(const SubproblemSpec& spec, double epsilon) {
  const int rows = static_cast<int>(spec.cost.rows());
  const int cols = static_cast<int>(spec.cost.cols());
  Require(spec.lower.rows() == spec.cost.rows() && spec.lower.cols() == spec.cost.cols() &&
              spec.upper.rows() == spec.cost.rows() && spec.upper.cols() == spec.cost.cols(),
          "subproblem bound matrices differ in shape");
  Require(static_cast<int>(spec.row_caps.size()) == rows &&
              static_cast<int>(spec.col_caps.size()) == cols,
          "subproblem cap vectors differ in size");
  Require(epsilon > 0, "epsilon must be positive");

  long total_q = 0;
  for (int q : spec.row_caps) {
    Require(q >= 0, "row caps must be nonnegative");
    total_q += q;
  }
  for (int p : spec.col_caps) Require(p >= 0, "column caps must be nonnegative");

  // The feedback reward summed over all units must stay below half of the
  // smallest nonzero cost difference, otherwise it could flip a strict
  // preference between two assignments.
  std::vector<double> costs(spec.cost.flat().begin(), spec.cost.flat().end());
  std::sort(costs.begin(), costs.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < costs.size(); ++k) {
    double diff = costs[k] - costs[k - 1];
    if (diff > 0) gap = std::min(gap, diff);
  }
  for (double c : costs) {
    if (c != 0) gap = std::min(gap, std::abs(c));
  }
  if (std::isfinite(gap)) {
    epsilon = std::min(epsilon, 0.5 * gap / static_cast<double>(total_q + 1));
  }

  SubproblemNetwork sub;
  sub.rows = rows;
  sub.cols = cols;
  sub.epsilon = epsilon;
  FlowNetwork& net = sub.net;
  net = FlowNetwork(rows + cols + 2);
  const int source = rows + cols, sink = rows + cols + 1;
  sub.first_cell_arc = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      net.AddArc(i, rows + j, spec.lower(i, j), spec.upper(i, j), spec.cost(i, j));
    }
  }
  for (int i = 0; i < rows; ++i) net.AddArc(source, i, 0, spec.row_caps[i], 0.0);
  for (int j = 0; j < cols; ++j) net.AddArc(rows + j, sink, 0, spec.col_caps[j], 0.0);
  sub.feedback_arc = net.AddArc(sink, source, 0, total_q, -epsilon);
  return sub;
}

IntMatrix ReadAssignment(const SubproblemNetwork& sub, const Circulation& flow) {
  IntMatrix a(sub.rows, sub.cols);
  for (int i = 0; i < sub.rows; ++i) {
    for (int j = 0; j < sub.cols; ++j) {
      a(i, j) = static_cast<int>(flow.flow[sub.first_cell_arc + i * sub.cols + j]);
    }
  }
  return a;
}

std::optional<IntMatrix> SolveSubproblem(const SubproblemSpec& spec, double epsilon) {
  SubproblemNetwork sub = BuildSubproblem(spec, epsilon);
  auto flow = SolveCirculation(sub.net);
  if (!flow) return std::nullopt;
  return ReadAssignment(sub, *flow);
}

}  // namespace couder
