#pragma once

// Critical-TM extraction, convex-set membership and synthetic traces.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "couder/model.h"

namespace couder {

// Portable uniform draw in [0, 1); std distributions differ across standard
// libraries.
inline double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centers;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding; at most `max_iterations` rounds,
// stops when assignments no longer change. An empty cluster is re-seeded with
// the point farthest from its current center.
KMeansResult KMeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iterations = 100);

struct CriticalSet {
  std::vector<TrafficMatrix> matrices;
  std::vector<int> assignment;  // cluster id per source TM
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(matrices.size()); }
  bool operator==(const CriticalSet&) const = default;
};

// k-means on the flattened TMs, then the component-wise max of each cluster.
CriticalSet ExtractCritical(const TmSequence& seq, int k, std::uint64_t seed);

enum class BoundMode { kExact, kDominated };

struct BoundednessResult {
  bool bounded = false;
  std::vector<double> lambdas;
  double slack = 0.0;  // smallest achievable max-entry shortfall
};

// Is t (dominated by | equal to) sum_k lambda_k T_k with lambda >= 0 and
// sum lambda <= 1?
BoundednessResult CheckBounded(const TrafficMatrix& t,
                               const std::vector<TrafficMatrix>& critical,
                               BoundMode mode = BoundMode::kDominated);

struct CurvePoint {
  double window;
  double fraction;
};

// For every TM, extract min(crit_k, history size) criticals from the TMs in
// the preceding `window` seconds and test membership. Empty history counts
// as unbounded. The first TM of the sequence is not scored.
std::vector<CurvePoint> BoundabilityCurve(const TmSequence& seq, int crit_k,
                                          const std::vector<double>& windows,
                                          BoundMode mode = BoundMode::kDominated,
                                          std::uint64_t seed = 1, int jobs = 1);

struct StorageOptions {
  double min_demand = 1.0;
  double max_demand = 100.0;
  double window_seconds = 1.0;
};

// The first half of the pods compute, the second half storage. Every compute
// pod writes to and reads from all storage pods uniformly.
TmSequence GenStorageTms(int num_pods, int count, std::uint64_t seed,
                         const StorageOptions& options = {});

using PodPair = std::pair<int, int>;

struct BurstSpec {
  TrafficMatrix base;  // component-wise max of the sequence
  RealMatrix stddev;   // per-entry sample standard deviation
  double burst_factor;
};

BurstSpec MakeBurstSpec(const TmSequence& seq, double burst_factor);

struct BurstTm {
  std::vector<PodPair> burst_set;
  TrafficMatrix tm;
};

// Every burst set of 1..max_burst_pairs off-diagonal pairs: single pairs in
// lexicographic order, then pairs of pairs.
std::vector<BurstTm> GenBurstTms(const TmSequence& seq, double burst_factor,
                                 int max_burst_pairs);

}  // namespace couder
