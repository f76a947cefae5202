#include <limits>

#include "couder/kernels.h"
#include "couder/traffic.h"

namespace couder {
namespace {

std::size_t Nearest(const std::vector<double>& p,
                    const std::vector<std::vector<double>>& centers, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    double d = kernels::SquaredDistance(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<std::vector<double>> SeedPlusPlus(const std::vector<std::vector<double>>& pts,
                                              int k, std::mt19937_64& rng) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> centers;
  centers.push_back(pts[static_cast<std::size_t>(Uniform01(rng) * n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Nearest(pts[i], centers, &d2[i]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total <= 0) {
      // All points coincide with a center; any choice is equivalent.
      pick = static_cast<std::size_t>(Uniform01(rng) * n);
    } else {
      double r = Uniform01(rng) * total, acc = 0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pts[pick]);
  }
  return centers;
}

}  // namespace

KMeansResult KMeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iterations) {
  Require(!points.empty(), "k-means needs at least one point");
  Require(k >= 1 && k <= static_cast<int>(points.size()),
          "k must lie in [1, number of points]");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) Require(p.size() == dim, "points differ in dimension");

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centers = SeedPlusPlus(points, k, rng);
  res.assignment.assign(points.size(), -1);
  std::vector<double> dist(points.size());

  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int c = static_cast<int>(Nearest(points[i], res.centers, &dist[i]));
      if (c != res.assignment[i]) {
        res.assignment[i] = c;
        changed = true;
      }
    }
    res.iterations = it + 1;
    if (!changed && it > 0) break;

    std::vector<std::size_t> count(k, 0);
    for (int a : res.assignment) ++count[a];
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      // Steal the worst-fitting point from a cluster that can spare it.
      std::size_t far = points.size();
      double far_d = -1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (count[res.assignment[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far == points.size()) continue;
      --count[res.assignment[far]];
      res.assignment[far] = c;
      dist[far] = 0;
      count[c] = 1;
      changed = true;
    }
    for (int c = 0; c < k; ++c) std::fill(res.centers[c].begin(), res.centers[c].end(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      kernels::Axpy(1.0, points[i], res.centers[res.assignment[i]]);
    }
    for (int c = 0; c < k; ++c) {
      kernels::Scale(1.0 / static_cast<double>(count[c]), res.centers[c]);
    }
  }
  return res;
}

}  // namespace couder
