#include "couder/model.h"

#include <cmath>
#include <sstream>

namespace couder {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid-input";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kUnbounded:
      return "unbounded";
    case ErrorCode::kSolverLimit:
      return "solver-limit";
    case ErrorCode::kUndefined:
      return "undefined";
    case ErrorCode::kInternal:
      return "internal-error";
  }
  return "unknown";
}

PhysicalTopology::PhysicalTopology(IntMatrix egress, IntMatrix ingress,
                                   double link_bandwidth)
    : egress_(std::move(egress)),
      ingress_(std::move(ingress)),
      link_bandwidth_(link_bandwidth) {
  Require(egress_.rows() >= 1, "physical topology needs at least one OCS");
  Require(egress_.cols() >= 2, "physical topology needs at least two pods");
  Require(egress_.rows() == ingress_.rows() && egress_.cols() == ingress_.cols(),
          "egress and ingress port matrices differ in shape");
  Require(std::isfinite(link_bandwidth_) && link_bandwidth_ > 0,
          "link bandwidth must be positive");
  for (std::size_t m = 0; m < egress_.rows(); ++m) {
    long eg = 0, ig = 0;
    for (std::size_t i = 0; i < egress_.cols(); ++i) {
      Require(egress_(m, i) >= 0 && ingress_(m, i) >= 0,
              "port counts must be nonnegative");
      eg += egress_(m, i);
      ig += ingress_(m, i);
    }
    if (eg != ig) {
      std::ostringstream os;
      os << "OCS " << m << " has " << eg << " egress but " << ig
         << " ingress ports";
      Fail(ErrorCode::kInvalidInput, os.str());
    }
  }
}

int PhysicalTopology::EgressRadix(int pod) const {
  int r = 0;
  for (int m = 0; m < num_ocs(); ++m) r += egress_(m, pod);
  return r;
}

int PhysicalTopology::IngressRadix(int pod) const {
  int r = 0;
  for (int m = 0; m < num_ocs(); ++m) r += ingress_(m, pod);
  return r;
}

PhysicalTopology UniformStriping(int num_pods, int num_ocs, int ports_per_ocs,
                                 double link_bandwidth) {
  Require(num_pods >= 2 && num_ocs >= 1, "bad striping dimensions");
  IntMatrix h(num_ocs, num_pods, ports_per_ocs);
  return PhysicalTopology(h, h, link_bandwidth);
}

TrafficMatrix::TrafficMatrix(RealMatrix demand, std::optional<double> timestamp)
    : demand_(std::move(demand)), timestamp_(timestamp) {
  Require(demand_.rows() == demand_.cols(), "traffic matrix must be square");
  Require(demand_.rows() >= 2, "traffic matrix needs at least two pods");
  for (std::size_t i = 0; i < demand_.rows(); ++i) {
    for (std::size_t j = 0; j < demand_.cols(); ++j) {
      double v = demand_(i, j);
      Require(std::isfinite(v) && v >= 0, "demands must be finite and >= 0");
      if (i == j) Require(v == 0.0, "self-demand on the diagonal is rejected");
    }
  }
}

double TrafficMatrix::Total() const {
  double s = 0;
  for (double v : demand_.flat()) s += v;
  return s;
}

bool TrafficMatrix::IsZero() const {
  for (double v : demand_.flat()) {
    if (v != 0.0) return false;
  }
  return true;
}

TmSequence::TmSequence(std::vector<TrafficMatrix> tms, double window_seconds)
    : tms_(std::move(tms)), window_seconds_(window_seconds) {
  Require(window_seconds_ > 0, "aggregation window must be positive");
  for (std::size_t i = 0; i < tms_.size(); ++i) {
    Require(tms_[i].num_pods() == tms_.front().num_pods(),
            "all TMs in a sequence must have the same pod count");
    if (i > 0 && tms_[i].timestamp() && tms_[i - 1].timestamp()) {
      Require(*tms_[i].timestamp() > *tms_[i - 1].timestamp(),
              "timestamps must be strictly increasing");
    }
  }
}

double TmSequence::TimeOf(std::size_t i) const {
  if (auto ts = tms_[i].timestamp()) return *ts;
  return static_cast<double>(i) * window_seconds_;
}

void ValidateFractional(const PhysicalTopology& phys, const FractionalTopology& frac) {
  const int n = phys.num_pods();
  Require(frac.d.rows() == static_cast<std::size_t>(n) &&
              frac.d.cols() == static_cast<std::size_t>(n),
          "fractional topology shape mismatch");
  std::vector<double> col(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double row = 0;
    for (int j = 0; j < n; ++j) {
      double v = frac.d(i, j);
      Require(std::isfinite(v) && v >= -kTolerance, "negative link count");
      if (i == j) Require(std::abs(v) <= kTolerance, "nonzero diagonal link count");
      row += v;
      col[j] += v;
    }
    Require(row <= phys.EgressRadix(i) + kTolerance, "row sum exceeds egress radix");
  }
  for (int j = 0; j < n; ++j) {
    Require(col[j] <= phys.IngressRadix(j) + kTolerance,
            "column sum exceeds ingress radix");
  }
}

IntegerTopology::IntegerTopology(int num_ocs, int num_pods)
    : num_ocs_(num_ocs),
      num_pods_(num_pods),
      x_(static_cast<std::size_t>(num_ocs) * num_pods * num_pods, 0) {}

IntMatrix IntegerTopology::Aggregate() const {
  IntMatrix agg(num_pods_, num_pods_, 0);
  for (int m = 0; m < num_ocs_; ++m)
    for (int i = 0; i < num_pods_; ++i)
      for (int j = 0; j < num_pods_; ++j) agg(i, j) += at(m, i, j);
  return agg;
}

long IntegerTopology::TotalLinks() const {
  long s = 0;
  for (int v : x_) s += v;
  return s;
}

std::vector<PortViolation> Validate(const PhysicalTopology& phys,
                                    const IntegerTopology& x) {
  Require(x.num_ocs() == phys.num_ocs() && x.num_pods() == phys.num_pods(),
          "integer topology shape does not match the physical topology");
  std::vector<PortViolation> out;
  const int n = phys.num_pods();
  for (int m = 0; m < phys.num_ocs(); ++m) {
    for (int i = 0; i < n; ++i) {
      int eg = 0, ig = 0;
      for (int j = 0; j < n; ++j) {
        Require(x.at(m, i, j) >= 0 && x.at(m, j, i) >= 0,
                "negative circuit count");
        eg += x.at(m, i, j);
        ig += x.at(m, j, i);
      }
      if (eg > phys.egress(m, i))
        out.push_back({m, i, PortSide::kEgress, eg, phys.egress(m, i)});
      if (ig > phys.ingress(m, i))
        out.push_back({m, i, PortSide::kIngress, ig, phys.ingress(m, i)});
    }
  }
  return out;
}

PathSet::PathSet(int num_pods) : num_pods_(num_pods) {
  Require(num_pods >= 2, "path enumeration needs at least two pods");
  paths_.reserve(static_cast<std::size_t>(num_pods) * (num_pods - 1) * (num_pods - 1));
  for (int i = 0; i < num_pods; ++i) {
    for (int j = 0; j < num_pods; ++j) {
      if (i == j) continue;
      paths_.push_back({i, j, std::nullopt});
      for (int k = 0; k < num_pods; ++k) {
        if (k != i && k != j) paths_.push_back({i, j, k});
      }
    }
  }
}

std::size_t PathSet::PairOffset(int src, int dst) const {
  std::size_t pair = static_cast<std::size_t>(src) * (num_pods_ - 1) +
                     static_cast<std::size_t>(dst < src ? dst : dst - 1);
  return pair * paths_per_pair();
}

std::span<const Path> PathSet::PathsFor(int src, int dst) const {
  return {paths_.data() + PairOffset(src, dst),
          static_cast<std::size_t>(paths_per_pair())};
}

std::size_t PathSet::IndexOf(const Path& p) const {
  std::size_t base = PairOffset(p.src, p.dst);
  if (!p.via) return base;
  int k = *p.via;
  int slot = k;
  if (k > p.src) --slot;
  if (k > p.dst) --slot;
  return base + 1 + slot;
}

std::vector<std::vector<Path>> EnumeratePaths(int num_pods) {
  PathSet set(num_pods);
  std::vector<std::vector<Path>> out;
  out.reserve(static_cast<std::size_t>(num_pods) * (num_pods - 1));
  for (int i = 0; i < num_pods; ++i) {
    for (int j = 0; j < num_pods; ++j) {
      if (i == j) continue;
      auto span = set.PathsFor(i, j);
      out.emplace_back(span.begin(), span.end());
    }
  }
  return out;
}

RoutingWeights DirectRouting(int num_pods) {
  PathSet paths(num_pods);
  RoutingWeights w;
  w.num_pods = num_pods;
  w.weights.assign(paths.size(), 0.0);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (!paths[p].via) w.weights[p] = 1.0;
  }
  return w;
}

void ValidateRouting(const RoutingWeights& w) {
  PathSet paths(w.num_pods);
  Require(w.weights.size() == paths.size(), "routing weight vector has wrong size");
  for (int i = 0; i < w.num_pods; ++i) {
    for (int j = 0; j < w.num_pods; ++j) {
      if (i == j) continue;
      std::size_t off = paths.PairOffset(i, j);
      double sum = 0;
      for (int s = 0; s < paths.paths_per_pair(); ++s) {
        double v = w.weights[off + s];
        Require(std::isfinite(v) && v >= -kTolerance, "negative routing weight");
        sum += v;
      }
      Require(std::abs(sum - 1.0) <= kTolerance, "routing weights do not sum to 1");
    }
  }
}

}  // namespace couder
