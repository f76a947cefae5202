#pragma once

// Core domain types: physical striping, traffic matrices, fractional and
// integer logical topologies, two-hop path universe and routing weights.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "couder/error.h"

namespace couder {

// Absolute tolerance for invariant checks on LP-derived quantities.
inline constexpr double kTolerance = 1e-6;

// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using IntMatrix = Matrix<int>;

// Pod-to-OCS fiber striping. egress(m, i) / ingress(m, i) are the number of
// egress/ingress links of pod i attached to OCS m.
class PhysicalTopology {
 public:
  PhysicalTopology(IntMatrix egress, IntMatrix ingress, double link_bandwidth);

  int num_pods() const { return static_cast<int>(egress_.cols()); }
  int num_ocs() const { return static_cast<int>(egress_.rows()); }
  double link_bandwidth() const { return link_bandwidth_; }

  int egress(int ocs, int pod) const { return egress_(ocs, pod); }
  int ingress(int ocs, int pod) const { return ingress_(ocs, pod); }
  const IntMatrix& egress_ports() const { return egress_; }
  const IntMatrix& ingress_ports() const { return ingress_; }

  // Radix summed over all OCSs.
  int EgressRadix(int pod) const;
  int IngressRadix(int pod) const;

  bool operator==(const PhysicalTopology&) const = default;

 private:
  IntMatrix egress_;
  IntMatrix ingress_;
  double link_bandwidth_;
};

// Builds a striping where every pod has `ports_per_ocs` egress and ingress
// ports on each of `num_ocs` switches.
PhysicalTopology UniformStriping(int num_pods, int num_ocs, int ports_per_ocs,
                                 double link_bandwidth);

// N x N nonnegative demand in Gbps. Diagonal entries must be exactly zero.
class TrafficMatrix {
 public:
  explicit TrafficMatrix(RealMatrix demand,
                         std::optional<double> timestamp = std::nullopt);

  int num_pods() const { return static_cast<int>(demand_.rows()); }
  double operator()(int i, int j) const { return demand_(i, j); }
  const RealMatrix& demand() const { return demand_; }
  std::optional<double> timestamp() const { return timestamp_; }

  double Total() const;
  bool IsZero() const;

  bool operator==(const TrafficMatrix&) const = default;

 private:
  RealMatrix demand_;
  std::optional<double> timestamp_;
};

class TmSequence {
 public:
  TmSequence() = default;
  TmSequence(std::vector<TrafficMatrix> tms, double window_seconds);

  std::size_t size() const { return tms_.size(); }
  bool empty() const { return tms_.empty(); }
  int num_pods() const { return tms_.empty() ? 0 : tms_.front().num_pods(); }
  const TrafficMatrix& operator[](std::size_t i) const { return tms_[i]; }
  const std::vector<TrafficMatrix>& tms() const { return tms_; }
  double window_seconds() const { return window_seconds_; }

  // Timestamp of entry i; index * window when the TM carries none.
  double TimeOf(std::size_t i) const;

  auto begin() const { return tms_.begin(); }
  auto end() const { return tms_.end(); }

  bool operator==(const TmSequence&) const = default;

 private:
  std::vector<TrafficMatrix> tms_;
  double window_seconds_ = 1.0;
};

// Real-valued inter-pod link counts.
struct FractionalTopology {
  RealMatrix d;

  bool operator==(const FractionalTopology&) const = default;
};

// Throws invalid-input unless d is a fractional topology for phys: diagonal
// zero, nonnegative, row/column sums within the pod radices (+ tolerance).
void ValidateFractional(const PhysicalTopology& phys, const FractionalTopology& d);

// Per-OCS integer circuit counts x[m][i][j].
class IntegerTopology {
 public:
  IntegerTopology() = default;
  IntegerTopology(int num_ocs, int num_pods);

  int num_ocs() const { return num_ocs_; }
  int num_pods() const { return num_pods_; }

  int& at(int ocs, int i, int j) {
    return x_[(static_cast<std::size_t>(ocs) * num_pods_ + i) * num_pods_ + j];
  }
  int at(int ocs, int i, int j) const {
    return x_[(static_cast<std::size_t>(ocs) * num_pods_ + i) * num_pods_ + j];
  }

  // Derived X: x_ij summed over OCSs.
  IntMatrix Aggregate() const;
  long TotalLinks() const;

  bool operator==(const IntegerTopology&) const = default;

 private:
  int num_ocs_ = 0;
  int num_pods_ = 0;
  std::vector<int> x_;
};

enum class PortSide { kEgress, kIngress };

struct PortViolation {
  int ocs;
  int pod;
  PortSide side;
  int load;
  int budget;

  bool operator==(const PortViolation&) const = default;
};

// Exact list of per-OCS port-budget violations; empty means feasible.
std::vector<PortViolation> Validate(const PhysicalTopology& phys,
                                    const IntegerTopology& x);

// Direct path when `via` is empty, otherwise src -> via -> dst.
struct Path {
  int src;
  int dst;
  std::optional<int> via;

  int hops() const { return via ? 2 : 1; }
  bool operator==(const Path&) const = default;
};

// All direct and two-hop paths for every ordered pod pair. Paths of pair
// (i, j) are contiguous: the direct path first, then intermediates in
// ascending order.
class PathSet {
 public:
  explicit PathSet(int num_pods);

  int num_pods() const { return num_pods_; }
  int paths_per_pair() const { return num_pods_ - 1; }
  std::size_t size() const { return paths_.size(); }
  const Path& operator[](std::size_t index) const { return paths_[index]; }
  const std::vector<Path>& paths() const { return paths_; }

  // Index of the first (direct) path of pair (src, dst).
  std::size_t PairOffset(int src, int dst) const;
  std::span<const Path> PathsFor(int src, int dst) const;
  std::size_t IndexOf(const Path& path) const;

 private:
  int num_pods_;
  std::vector<Path> paths_;
};

// Per ordered pair, the list of candidate paths (direct first, then via
// ascending intermediate).
std::vector<std::vector<Path>> EnumeratePaths(int num_pods);

// Split fractions aligned with PathSet(num_pods) order.
struct RoutingWeights {
  int num_pods = 0;
  std::vector<double> weights;
  double mu = 0.0;
  std::optional<double> beta;

  double Weight(const PathSet& paths, const Path& p) const {
    return weights[paths.IndexOf(p)];
  }
  bool operator==(const RoutingWeights&) const = default;
};

// Weight 1 on every direct path.
RoutingWeights DirectRouting(int num_pods);

// Throws invalid-input unless every pair's weights are nonnegative and sum
// to 1 within tolerance.
void ValidateRouting(const RoutingWeights& w);

}  // namespace couder
