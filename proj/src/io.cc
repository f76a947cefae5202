#include "couder/io.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace couder::io {
namespace {

using nlohmann::json;

template <typename T>
json MatrixToJson(const Matrix<T>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
Matrix<T> MatrixFromJson(const json& j, const char* what) {
  Require(j.is_array(), std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Matrix<T> m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    Require(j[r].is_array() && j[r].size() == cols, std::string(what) + " is ragged");
    for (std::size_t c = 0; c < cols; ++c) {
      Require(j[r][c].is_number(), std::string(what) + " holds a non-number");
      m(r, c) = j[r][c].get<T>();
    }
  }
  return m;
}

void CheckVersion(const json& j) {
  Require(j.is_object(), "expected a JSON object");
  Require(j.contains("version") && j["version"] == kFormatVersion,
          "unsupported or missing format version");
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

json ParseStream(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

// Typed field access with invalid-input on any mismatch.
template <typename T>
T Get(const json& j, const char* key) {
  Require(j.contains(key), std::string("missing field '") + key + "'");
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    Fail(ErrorCode::kInvalidInput, std::string("field '") + key + "' has the wrong type");
  }
}

// Null stands for an infinite value.
double GetExtended(const json& j, const char* key) {
  Require(j.contains(key), std::string("missing field '") + key + "'");
  return j[key].is_null() ? kInfiniteMlu : Get<double>(j, key);
}

template <typename Fn>
void ForEachLine(std::istream& in, Fn fn) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = Parse(line);
    CheckVersion(j);
    fn(j);
  }
}

}  // namespace

void WriteTmSequence(std::ostream& out, const TmSequence& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    json j;
    j["version"] = kFormatVersion;
    j["t"] = seq.TimeOf(i);
    j["window"] = seq.window_seconds();
    j["tm"] = MatrixToJson(seq[i].demand());
    out << j.dump() << '\n';
  }
}

TmSequence ReadTmSequence(std::istream& in) {
  std::vector<TrafficMatrix> tms;
  std::optional<double> window;
  ForEachLine(in, [&](const json& j) {
    if (!window && j.contains("window")) window = Get<double>(j, "window");
    RealMatrix m = MatrixFromJson<double>(Get<json>(j, "tm"), "tm");
    Require(m.rows() == m.cols(), "tm must be square");
    Require(tms.empty() || static_cast<int>(m.rows()) == tms.front().num_pods(),
            "TMs in one file must share a size");
    tms.emplace_back(std::move(m), Get<double>(j, "t"));
  });
  if (!window) {
    window = tms.size() >= 2 ? *tms[1].timestamp() - *tms[0].timestamp() : 1.0;
  }
  Require(*window > 0, "window must be positive");
  return TmSequence(std::move(tms), *window);
}

void WritePhysical(std::ostream& out, const PhysicalTopology& phys) {
  json j;
  j["version"] = kFormatVersion;
  j["num_pods"] = phys.num_pods();
  j["num_ocs"] = phys.num_ocs();
  j["bandwidth_gbps"] = phys.link_bandwidth();
  j["h_eg"] = MatrixToJson(phys.egress_ports());
  j["h_ig"] = MatrixToJson(phys.ingress_ports());
  out << j.dump(2) << '\n';
}

PhysicalTopology ReadPhysical(std::istream& in) {
  json j = ParseStream(in);
  CheckVersion(j);
  IntMatrix eg = MatrixFromJson<int>(Get<json>(j, "h_eg"), "h_eg");
  IntMatrix ig = MatrixFromJson<int>(Get<json>(j, "h_ig"), "h_ig");
  const int n = Get<int>(j, "num_pods"), m = Get<int>(j, "num_ocs");
  Require(static_cast<int>(eg.rows()) == m && static_cast<int>(eg.cols()) == n,
          "h_eg shape disagrees with num_ocs x num_pods");
  Require(static_cast<int>(ig.rows()) == m && static_cast<int>(ig.cols()) == n,
          "h_ig shape disagrees with num_ocs x num_pods");
  return PhysicalTopology(std::move(eg), std::move(ig), Get<double>(j, "bandwidth_gbps"));
}

void WriteSolution(std::ostream& out, const FractionalSolution& sol) {
  json j;
  j["version"] = kFormatVersion;
  j["mu"] = sol.mu;
  j["beta"] = sol.beta ? json(*sol.beta) : json(nullptr);
  j["d"] = MatrixToJson(sol.d.d);
  json omega = json::array();
  PathSet paths(sol.omega.num_pods);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const Path& p = paths[k];
    omega.push_back({{"src", p.src},
                     {"dst", p.dst},
                     {"via", p.via ? json(*p.via) : json(nullptr)},
                     {"w", sol.omega.weights[k]}});
  }
  j["omega"] = std::move(omega);
  out << j.dump(2) << '\n';
}

FractionalSolution ReadSolution(std::istream& in) {
  json j = ParseStream(in);
  CheckVersion(j);
  FractionalSolution sol;
  sol.mu = Get<double>(j, "mu");
  if (j.contains("beta") && !j["beta"].is_null()) sol.beta = Get<double>(j, "beta");
  sol.d.d = MatrixFromJson<double>(Get<json>(j, "d"), "d");
  const int n = static_cast<int>(sol.d.d.rows());
  Require(n >= 2 && sol.d.d.cols() == sol.d.d.rows(), "d must be square with at least 2 pods");
  PathSet paths(n);
  sol.omega.num_pods = n;
  sol.omega.mu = sol.mu;
  sol.omega.beta = sol.beta;
  sol.omega.weights.assign(paths.size(), 0.0);
  const json omega = Get<json>(j, "omega");
  Require(omega.is_array(), "omega must be an array");
  for (const json& e : omega) {
    const int src = Get<int>(e, "src"), dst = Get<int>(e, "dst");
    Require(src >= 0 && src < n && dst >= 0 && dst < n && src != dst, "omega entry has bad pods");
    Path p{src, dst, std::nullopt};
    if (e.contains("via") && !e["via"].is_null()) {
      const int via = Get<int>(e, "via");
      Require(via >= 0 && via < n && via != src && via != dst, "omega entry has a bad via");
      p.via = via;
    }
    sol.omega.weights[paths.IndexOf(p)] = Get<double>(e, "w");
  }
  return sol;
}

void WriteIntegerTopology(std::ostream& out, const IntegerTopology& x) {
  json j;
  j["version"] = kFormatVersion;
  json ocs = json::array();
  for (int m = 0; m < x.num_ocs(); ++m) {
    IntMatrix layer(x.num_pods(), x.num_pods());
    for (int i = 0; i < x.num_pods(); ++i)
      for (int k = 0; k < x.num_pods(); ++k) layer(i, k) = x.at(m, i, k);
    ocs.push_back(MatrixToJson(layer));
  }
  j["x"] = std::move(ocs);
  out << j.dump() << '\n';
}

IntegerTopology ReadIntegerTopology(std::istream& in) {
  json j = ParseStream(in);
  CheckVersion(j);
  const json layers = Get<json>(j, "x");
  Require(layers.is_array() && !layers.empty(), "x must be a non-empty array of switches");
  std::vector<IntMatrix> ms;
  for (const json& l : layers) ms.push_back(MatrixFromJson<int>(l, "x"));
  const std::size_t n = ms.front().rows();
  IntegerTopology x(static_cast<int>(ms.size()), static_cast<int>(n));
  for (std::size_t m = 0; m < ms.size(); ++m) {
    Require(ms[m].rows() == n && ms[m].cols() == n, "x layers must be N x N");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        Require(ms[m](i, k) >= 0, "circuit counts must be nonnegative");
        x.at(static_cast<int>(m), static_cast<int>(i), static_cast<int>(k)) = ms[m](i, k);
      }
  }
  return x;
}

void WriteRoundingSummary(std::ostream& out, const RoundingSummary& r) {
  json j;
  j["version"] = kFormatVersion;
  j["method"] = r.method;
  j["goodness"] = r.goodness;
  j["violation_ratio"] = r.violation_ratio;
  j["iterations_run"] = r.iterations_run;
  out << j.dump(2) << '\n';
}

RoundingSummary ReadRoundingSummary(std::istream& in) {
  json j = ParseStream(in);
  CheckVersion(j);
  return {Get<std::string>(j, "method"), Get<int>(j, "goodness"),
          Get<double>(j, "violation_ratio"), Get<int>(j, "iterations_run")};
}

void WriteMetrics(std::ostream& out, const std::vector<MetricsLine>& lines) {
  for (const MetricsLine& m : lines) {
    json j;
    j["version"] = kFormatVersion;
    j["t"] = m.t;
    j["mlu"] = std::isfinite(m.mlu) ? json(m.mlu) : json(nullptr);
    j["ahc"] = m.ahc;
    j["direct_fraction"] = m.direct_fraction;
    j["max_sensitivity"] = std::isfinite(m.max_sensitivity) ? json(m.max_sensitivity) : json(nullptr);
    j["feasible"] = m.feasible;
    j["epoch"] = m.epoch;
    j["stage"] = m.stage;
    out << j.dump() << '\n';
  }
}

std::vector<MetricsLine> ReadMetrics(std::istream& in) {
  std::vector<MetricsLine> lines;
  ForEachLine(in, [&](const json& j) {
    MetricsLine m;
    m.t = Get<double>(j, "t");
    m.mlu = GetExtended(j, "mlu");
    m.ahc = Get<double>(j, "ahc");
    m.direct_fraction = Get<double>(j, "direct_fraction");
    m.max_sensitivity = GetExtended(j, "max_sensitivity");
    m.feasible = Get<bool>(j, "feasible");
    m.epoch = Get<int>(j, "epoch");
    m.stage = Get<int>(j, "stage");
    lines.push_back(m);
  });
  return lines;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), "cannot write '" + path + "'");
  out << contents;
  Require(static_cast<bool>(out), "write to '" + path + "' failed");
}

}  // namespace couder::io
