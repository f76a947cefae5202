#include <algorithm>
#include <limits>
#include <queue>

#include "couder/optimize.h"

namespace couder {
namespace {

class Dinic {
 public:
  explicit Dinic(int n) : head_(n, -1), level_(n), it_(n) {}

  void Add(int from, int to, long cap) {
    Push(from, to, cap);
    Push(to, from, 0);
  }

  long MaxFlow(int s, int t) {
    long flow = 0;
    while (Bfs(s, t)) {
      std::copy(head_.begin(), head_.end(), it_.begin());
      while (long f = Dfs(s, t, std::numeric_limits<long>::max())) flow += f;
    }
    return flow;
  }

 private:
  void Push(int from, int to, long cap) {
    to_.push_back(to);
    cap_.push_back(cap);
    next_.push_back(head_[from]);
    head_[from] = static_cast<int>(to_.size()) - 1;
  }

  bool Bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e = head_[v]; e != -1; e = next_[e]) {
        if (cap_[e] > 0 && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[v] + 1;
          q.push(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  long Dfs(int v, int t, long limit) {
    if (v == t) return limit;
    for (int& e = it_[v]; e != -1; e = next_[e]) {
      int w = to_[e];
      if (cap_[e] <= 0 || level_[w] != level_[v] + 1) continue;
      if (long f = Dfs(w, t, std::min(limit, cap_[e]))) {
        cap_[e] -= f;
        cap_[e ^ 1] += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<int> head_, to_, next_, level_, it_;
  std::vector<long> cap_;
};

// Layer l holds pods reached after l hops. Intermediate copies are split
// into in/out halves whose internal arc is bounded by the pod's egress total.
long PairCapacity(const IntMatrix& x, const std::vector<long>& radix, int src, int dst,
                  int max_hops) {
  const int n = static_cast<int>(x.rows());
  const int layers = max_hops - 1;  // intermediate layers 1..max_hops-1
  auto in_node = [&](int layer, int v) { return 2 + 2 * ((layer - 1) * n + v); };
  auto out_node = [&](int layer, int v) { return in_node(layer, v) + 1; };
  Dinic g(2 + 2 * layers * n);
  const int s = 0, t = 1;
  for (int l = 1; l <= layers; ++l) {
    for (int v = 0; v < n; ++v) {
      if (v == src || v == dst) continue;
      g.Add(in_node(l, v), out_node(l, v), radix[v]);
    }
  }
  if (x(src, dst) > 0) g.Add(s, t, x(src, dst));
  for (int v = 0; v < n; ++v) {
    if (v == src || v == dst || layers < 1) continue;
    if (x(src, v) > 0) g.Add(s, in_node(1, v), x(src, v));
  }
  for (int l = 1; l <= layers; ++l) {
    for (int v = 0; v < n; ++v) {
      if (v == src || v == dst) continue;
      if (x(v, dst) > 0) g.Add(out_node(l, v), t, x(v, dst));
      if (l == layers) continue;
      for (int w = 0; w < n; ++w) {
        if (w == src || w == dst || w == v || x(v, w) <= 0) continue;
        g.Add(out_node(l, v), in_node(l + 1, w), x(v, w));
      }
    }
  }
  return g.MaxFlow(s, t);
}

}  // namespace

double ComputePathCapacity(const IntMatrix& links, double link_bandwidth, int max_hops) {
  Require(max_hops >= 1 && max_hops <= 4, "max_hops must lie in [1, 4]");
  Require(links.rows() == links.cols() && links.rows() >= 2, "link matrix must be square");
  Require(link_bandwidth > 0, "link bandwidth must be positive");
  const int n = static_cast<int>(links.rows());
  std::vector<long> radix(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Require(links(i, j) >= 0, "link counts must be nonnegative");
      if (i != j) radix[i] += links(i, j);
    }
  }
  double total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) total += static_cast<double>(PairCapacity(links, radix, i, j, max_hops));
  return total * link_bandwidth / (n * (n - 1));
}

}  // namespace couder
