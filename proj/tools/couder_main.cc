// couder command-line driver.
//
// Exit codes: 0 success, 1 invalid input, 2 infeasible or unbounded,
// 3 solver or internal failure, 64 usage error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "couder/evaluate.h"
#include "couder/io.h"
#include "couder/optimize.h"
#include "couder/round.h"
#include "couder/traffic.h"

namespace {

using namespace couder;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;
constexpr int kExitUsage = 64;

// "-" stands for stdout on output and for "not supplied" on optional inputs.
constexpr const char* kNone = "-";

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == kNone) {
    std::cout << text;
    std::cout.flush();
  } else {
    io::WriteFile(path, text);
  }
}

template <typename T, typename Reader>
T Load(const std::string& path, Reader read) {
  std::istringstream in(io::ReadFile(path));
  return read(in);
}

template <typename Writer>
std::string Render(Writer write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::vector<TrafficMatrix> LoadCritical(const std::string& path) {
  TmSequence seq = Load<TmSequence>(path, io::ReadTmSequence);
  Require(!seq.empty(), "critical file holds no TMs");
  std::vector<TrafficMatrix> out;
  for (const TrafficMatrix& t : seq) out.emplace_back(t.demand());
  return out;
}

RealMatrix ToReal(const IntMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.flat().size(); ++k) out.flat()[k] = m.flat()[k];
  return out;
}

// Two-column series files.
void WriteSeries(const std::string& path, const std::vector<std::pair<double, double>>& xy) {
  std::string text;
  for (const auto& [x, y] : xy) text += Num(x) + ' ' + Num(y) + '\n';
  io::WriteFile(path, text);
}

// P(X >= x) at each sorted sample.
std::vector<std::pair<double, double>> Ccdf(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], (n - i) / n);
  return out;
}

// Nearest-rank percentiles 0..100.
std::vector<std::pair<double, double>> Percentiles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> out;
  if (v.empty()) return out;
  for (int p = 0; p <= 100; ++p) {
    const std::size_t rank =
        p == 0 ? 0 : static_cast<std::size_t>(std::ceil(p / 100.0 * v.size())) - 1;
    out.emplace_back(p, v[std::min(rank, v.size() - 1)]);
  }
  return out;
}

struct LpFlags {
  double primal_tolerance = 1e-9;
  double feasibility_tolerance = 1e-6;
  long max_iterations = 0;

  lp::SolverOptions Options() const {
    lp::SolverOptions o;
    o.primal_tolerance = primal_tolerance;
    o.dual_tolerance = primal_tolerance;
    o.feasibility_tolerance = feasibility_tolerance;
    o.max_iterations = max_iterations;
    return o;
  }
  void Attach(CLI::App* app) {
    app->add_option("--lp-tolerance", primal_tolerance, "Simplex primal/dual tolerance")
        ->capture_default_str();
    app->add_option("--lp-feasibility", feasibility_tolerance, "Final feasibility check")
        ->capture_default_str();
    app->add_option("--lp-max-iterations", max_iterations, "Pivot cap, 0 = automatic")
        ->capture_default_str();
  }
};

struct PipelineFlags {
  double beta_tolerance = 1e-3;
  std::string cap_mode = "per-link";
  bool no_desensitize = false;
  LpFlags lp;

  PipelineOptions Options() const {
    PipelineOptions o;
    o.beta_tolerance = beta_tolerance;
    o.cap_mode = cap_mode == "literal" ? SensitivityCap::kLiteral : SensitivityCap::kPerLink;
    o.desensitize = !no_desensitize;
    o.lp = lp.Options();
    return o;
  }
  void Attach(CLI::App* app) {
    app->add_option("--beta-tolerance", beta_tolerance, "Relative width of the beta bracket")
        ->capture_default_str();
    app->add_option("--cap-mode", cap_mode, "Sensitivity cap indexing")
        ->check(CLI::IsMember({"per-link", "literal"}))
        ->capture_default_str();
    app->add_flag("--no-desensitize", no_desensitize, "Skip the sensitivity step");
    lp.Attach(app);
  }
};

// ---- extract ----

struct ExtractArgs {
  std::string tm_file, output = kNone;
  int k = 5;
  std::uint64_t seed = 1;
  std::string curve_out;
  std::vector<double> windows;
  std::string bound_mode = "dominated";
};

int RunExtract(const ExtractArgs& a) {
  TmSequence seq = Load<TmSequence>(a.tm_file, io::ReadTmSequence);
  Require(!seq.empty(), "TM file holds no matrices");
  CriticalSet crit = ExtractCritical(seq, a.k, a.seed);
  Emit(a.output, Render([&](std::ostream& o) { io::WriteTmSequence(o, TmSequence(crit.matrices, 1.0)); }));
  if (!a.curve_out.empty()) {
    Require(!a.windows.empty(), "--curve-out needs --windows");
    const BoundMode mode = a.bound_mode == "exact" ? BoundMode::kExact : BoundMode::kDominated;
    std::vector<std::pair<double, double>> xy;
    for (const CurvePoint& p : BoundabilityCurve(seq, a.k, a.windows, mode, a.seed))
      xy.emplace_back(p.window, p.fraction);
    WriteSeries(a.curve_out, xy);
  }
  return kExitOk;
}

// ---- optimize ----

struct OptimizeArgs {
  std::string phys_file, crit_file, output = kNone, topology;
  PipelineFlags pipeline;
};

int RunOptimize(const OptimizeArgs& a) {
  PhysicalTopology phys = Load<PhysicalTopology>(a.phys_file, io::ReadPhysical);
  std::vector<TrafficMatrix> crit = LoadCritical(a.crit_file);
  FractionalSolution sol;
  if (a.topology.empty()) {
    sol = RunPipeline(phys, crit, a.pipeline.Options());
  } else {
    IntegerTopology x = Load<IntegerTopology>(a.topology, io::ReadIntegerTopology);
    sol = RecomputeRouting(phys, x, crit, a.pipeline.Options());
  }
  Emit(a.output, Render([&](std::ostream& o) { io::WriteSolution(o, sol); }));
  return kExitOk;
}

// ---- round ----

struct RoundArgs {
  std::string phys_file, solution_file, method = "ldm", output = kNone, report;
  int iters = kDefaultLdmIterations;
};

int RunRound(const RoundArgs& a) {
  PhysicalTopology phys = Load<PhysicalTopology>(a.phys_file, io::ReadPhysical);
  FractionalSolution sol = Load<FractionalSolution>(a.solution_file, io::ReadSolution);
  RoundingReport r = a.method == "greedy" ? GreedyRound(phys, sol.d) : LdmRound(phys, sol.d, a.iters);
  Emit(a.output, Render([&](std::ostream& o) { io::WriteIntegerTopology(o, r.x); }));
  if (!a.report.empty()) {
    io::RoundingSummary s{a.method, r.goodness, r.violation_ratio, r.iterations_run};
    io::WriteFile(a.report, Render([&](std::ostream& o) { io::WriteRoundingSummary(o, s); }));
  }
  return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string phys_file, topology_file, solution_file, tm_file;
  std::string baseline = "none", output = kNone, plot_prefix;
  int jobs = 1;
  double oversub = 1.0;
  PipelineFlags pipeline;
};

io::MetricsLine ToLine(double t, const EvalRecord& r, double sensitivity) {
  io::MetricsLine m;
  m.t = t;
  m.mlu = r.mlu;
  m.ahc = r.ahc;
  m.direct_fraction = r.direct_fraction;
  m.max_sensitivity = sensitivity;
  m.feasible = r.feasible;
  return m;
}

int RunEvaluate(const EvaluateArgs& a) {
  Require(a.jobs >= 1, "--jobs must be at least 1");
  PhysicalTopology phys = Load<PhysicalTopology>(a.phys_file, io::ReadPhysical);
  TmSequence seq = Load<TmSequence>(a.tm_file, io::ReadTmSequence);
  Require(seq.empty() || seq.num_pods() == phys.num_pods(),
          "TM size does not match the physical topology");
  const double b = phys.link_bandwidth();
  const int n = phys.num_pods();
  const PipelineOptions popts = a.pipeline.Options();

  // Fixed links and weights shared by every TM, when the baseline has them.
  RealMatrix links;
  RoutingWeights omega;
  if (a.baseline == "none") {
    Require(a.solution_file != kNone, "--baseline none needs a solution file");
    FractionalSolution sol = Load<FractionalSolution>(a.solution_file, io::ReadSolution);
    Require(sol.omega.num_pods == n, "solution does not match the physical topology");
    omega = sol.omega;
    if (a.topology_file == kNone) {
      links = sol.d.d;
    } else {
      IntegerTopology x = Load<IntegerTopology>(a.topology_file, io::ReadIntegerTopology);
      Require(x.num_pods() == n && x.num_ocs() == phys.num_ocs(),
              "topology does not match the physical topology");
      links = ToReal(x.Aggregate());
    }
  } else if (a.baseline == "mesh" || a.baseline == "vlb" || a.baseline == "direct") {
    IntMatrix mesh = UniformMesh(phys).Aggregate();
    links = ToReal(mesh);
    omega = a.baseline == "vlb" ? VlbWeights(mesh) : DirectOnlyWeights(n);
  }
  int uplinks = phys.EgressRadix(0);
  for (int i = 1; i < n; ++i) uplinks = std::min(uplinks, phys.EgressRadix(i));

  auto score = [&](std::size_t idx) {
    const TrafficMatrix& t = seq[idx];
    const double when = seq.TimeOf(idx);
    if (a.baseline == "fattree") return ToLine(when, FatTreeEval(t, uplinks, b, a.oversub), 0.0);
    if (a.baseline == "mesh") {
      TeRouting te = OptimalRouting(links, t, b, popts.lp);
      return ToLine(when, EvaluateStatic(links, te.omega, t, b), MaxSensitivity(links, b, te.omega));
    }
    if (a.baseline == "ideal") {
      if (t.IsZero()) return ToLine(when, EvalRecord{}, 0.0);
      FractionalSolution s = RunPipeline(phys, {TrafficMatrix(t.demand())}, popts);
      return ToLine(when, EvaluateStatic(s.d.d, s.omega, t, b), MaxSensitivity(s.d.d, b, s.omega));
    }
    return ToLine(when, EvaluateStatic(links, omega, t, b), MaxSensitivity(links, b, omega));
  };

  std::vector<io::MetricsLine> lines(seq.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(a.jobs);
  auto worker = [&](int id) {
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < seq.size();) lines[i] = score(i);
    } catch (...) {
      errors[id] = std::current_exception();
      next = seq.size();
    }
  };
  const int threads = std::min<int>(a.jobs, std::max<std::size_t>(seq.size(), 1));
  std::vector<std::thread> pool;
  for (int id = 1; id < threads; ++id) pool.emplace_back(worker, id);
  worker(0);
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  Emit(a.output, Render([&](std::ostream& o) { io::WriteMetrics(o, lines); }));
  if (!a.plot_prefix.empty()) {
    std::vector<double> mlu, ahc;
    for (const io::MetricsLine& m : lines) {
      mlu.push_back(m.mlu);
      ahc.push_back(m.ahc);
    }
    WriteSeries(a.plot_prefix + "_mlu_ccdf.txt", Ccdf(mlu));
    WriteSeries(a.plot_prefix + "_mlu_percentile.txt", Percentiles(mlu));
    WriteSeries(a.plot_prefix + "_ahc_ccdf.txt", Ccdf(ahc));
    WriteSeries(a.plot_prefix + "_ahc_percentile.txt", Percentiles(ahc));
  }
  return kExitOk;
}

// ---- simulate ----

struct SimulateArgs {
  std::string phys_file, tm_file, output = kNone, plot_prefix;
  ReconfigPolicy policy;
  PipelineFlags pipeline;
};

int RunSimulate(SimulateArgs a) {
  PhysicalTopology phys = Load<PhysicalTopology>(a.phys_file, io::ReadPhysical);
  TmSequence seq = Load<TmSequence>(a.tm_file, io::ReadTmSequence);
  a.policy.pipeline = a.pipeline.Options();
  SimResult r = SimulateReconfig(phys, seq, a.policy);
  std::vector<io::MetricsLine> lines;
  for (const SimSample& s : r.samples) {
    io::MetricsLine m = ToLine(s.time, s.record, s.max_sensitivity);
    m.epoch = s.epoch;
    m.stage = s.stage;
    lines.push_back(m);
  }
  Emit(a.output, Render([&](std::ostream& o) { io::WriteMetrics(o, lines); }));
  if (!a.plot_prefix.empty()) {
    std::vector<std::pair<double, double>> mlu, ahc, changed;
    for (const io::MetricsLine& m : lines) {
      mlu.emplace_back(m.t, m.mlu);
      ahc.emplace_back(m.t, m.ahc);
    }
    for (const EpochInfo& e : r.epochs) changed.emplace_back(e.time, e.changed_fraction);
    WriteSeries(a.plot_prefix + "_mlu_time.txt", mlu);
    WriteSeries(a.plot_prefix + "_ahc_time.txt", ahc);
    WriteSeries(a.plot_prefix + "_changed_fraction.txt", changed);
  }
  return kExitOk;
}

// ---- synth ----

struct SynthArgs {
  std::string mode = "storage", output = kNone, input;
  int pods = 8, count = 100, max_pairs = 1;
  std::uint64_t seed = 1;
  StorageOptions storage;
  double burst_factor = 2.0;
};

int RunSynth(const SynthArgs& a) {
  TmSequence seq;
  if (a.mode == "storage") {
    seq = GenStorageTms(a.pods, a.count, a.seed, a.storage);
  } else {
    Require(!a.input.empty(), "--mode burst needs --input");
    TmSequence base = Load<TmSequence>(a.input, io::ReadTmSequence);
    std::vector<TrafficMatrix> tms;
    for (BurstTm& bt : GenBurstTms(base, a.burst_factor, a.max_pairs)) tms.push_back(std::move(bt.tm));
    seq = TmSequence(std::move(tms), 1.0);
  }
  Emit(a.output, Render([&](std::ostream& o) { io::WriteTmSequence(o, seq); }));
  return kExitOk;
}

// ---- stripe ----

struct StripeArgs {
  int pods = 4, ocs = 2, ports = 1;
  double bandwidth = 100.0;
  std::string output = kNone;
};

int RunStripe(const StripeArgs& a) {
  PhysicalTopology phys = UniformStriping(a.pods, a.ocs, a.ports, a.bandwidth);
  Emit(a.output, Render([&](std::ostream& o) { io::WritePhysical(o, phys); }));
  return kExitOk;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return kExitInvalid;
    case ErrorCode::kInfeasible:
    case ErrorCode::kUnbounded:
      return kExitInfeasible;
    default:
      return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"couder: topology engineering for OCS-based data center fabrics"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags win");
  app.require_subcommand(1);

  ExtractArgs ex;
  CLI::App* extract = app.add_subcommand("extract", "Critical TMs of a TM sequence");
  extract->add_option("tm_file", ex.tm_file, "TM sequence (JSON Lines)")->required()->check(CLI::ExistingFile);
  extract->add_option("--k", ex.k, "Number of critical TMs")->capture_default_str()->check(CLI::PositiveNumber);
  extract->add_option("--seed", ex.seed, "k-means seed")->capture_default_str();
  extract->add_option("-o,--output", ex.output, "Critical-set file")->capture_default_str();
  extract->add_option("--curve-out", ex.curve_out, "Boundability curve (window, fraction)");
  extract->add_option("--windows", ex.windows, "Lookback windows in seconds for --curve-out")
      ->delimiter(',');
  extract->add_option("--bound-mode", ex.bound_mode, "Boundedness test")
      ->check(CLI::IsMember({"dominated", "exact"}))
      ->capture_default_str();

  OptimizeArgs op;
  CLI::App* optimize = app.add_subcommand("optimize", "Fractional topology and routing");
  optimize->add_option("phys_file", op.phys_file, "Physical topology")->required()->check(CLI::ExistingFile);
  optimize->add_option("crit_file", op.crit_file, "Critical-set file")->required()->check(CLI::ExistingFile);
  optimize->add_option("-o,--output", op.output, "Solution file")->capture_default_str();
  optimize->add_option("--topology", op.topology, "Freeze links to this integer topology")
      ->check(CLI::ExistingFile);
  op.pipeline.Attach(optimize);

  RoundArgs rd;
  CLI::App* round = app.add_subcommand("round", "Integer topology from a fractional solution");
  round->add_option("phys_file", rd.phys_file, "Physical topology")->required()->check(CLI::ExistingFile);
  round->add_option("solution_file", rd.solution_file, "Solution file")->required()->check(CLI::ExistingFile);
  round->add_option("--method", rd.method, "Rounding method")
      ->check(CLI::IsMember({"ldm", "greedy"}))
      ->capture_default_str();
  round->add_option("--iters", rd.iters, "LDM iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  round->add_option("-o,--output", rd.output, "Topology file")->capture_default_str();
  round->add_option("--report", rd.report, "Rounding report file");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Per-TM metrics of a topology or baseline");
  evaluate->add_option("phys_file", ev.phys_file, "Physical topology")->required()->check(CLI::ExistingFile);
  evaluate->add_option("topology_file", ev.topology_file, "Integer topology, '-' for the solution's D")
      ->required();
  evaluate->add_option("solution_file", ev.solution_file, "Solution file, '-' for baselines")->required();
  evaluate->add_option("tm_file", ev.tm_file, "TM sequence")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--baseline", ev.baseline, "What to evaluate")
      ->check(CLI::IsMember({"none", "mesh", "vlb", "fattree", "direct", "ideal"}))
      ->capture_default_str();
  evaluate->add_option("-o,--output", ev.output, "Metrics file (JSON Lines)")->capture_default_str();
  evaluate->add_option("--plot-prefix", ev.plot_prefix, "Prefix for CCDF/percentile series");
  evaluate->add_option("--jobs", ev.jobs, "Worker threads")
      ->envname("COUDER_JOBS")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--oversub", ev.oversub, "Fat-tree oversubscription")->capture_default_str();
  ev.pipeline.Attach(evaluate);

  SimulateArgs sm;
  CLI::App* simulate = app.add_subcommand("simulate", "Periodic reconfiguration over a TM trace");
  simulate->add_option("phys_file", sm.phys_file, "Physical topology")->required()->check(CLI::ExistingFile);
  simulate->add_option("tm_file", sm.tm_file, "TM sequence")->required()->check(CLI::ExistingFile);
  simulate->add_option("--frequency", sm.policy.frequency, "Seconds between reconfigurations")
      ->capture_default_str();
  simulate->add_option("--stage-latency", sm.policy.stage_latency, "Seconds per stage")
      ->capture_default_str();
  simulate->add_option("--alpha-pred", sm.policy.alpha_pred, "Predicted MLU for staging")
      ->capture_default_str();
  simulate->add_option("--lookback", sm.policy.lookback, "Seconds of history per epoch")
      ->capture_default_str();
  simulate->add_option("--k", sm.policy.k, "Critical TMs per epoch")->capture_default_str();
  simulate->add_option("--seed", sm.policy.seed, "k-means seed")->capture_default_str();
  simulate->add_option("--iters", sm.policy.ldm_iterations, "LDM iteration cap")->capture_default_str();
  simulate->add_option("-o,--output", sm.output, "Time-series metrics (JSON Lines)")->capture_default_str();
  simulate->add_option("--plot-prefix", sm.plot_prefix, "Prefix for time series");
  sm.pipeline.Attach(simulate);

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth", "Synthetic TM sequences");
  synth->add_option("--mode", sy.mode, "Generator")
      ->check(CLI::IsMember({"storage", "burst"}))
      ->capture_default_str();
  synth->add_option("--pods", sy.pods, "Pods (storage)")->capture_default_str();
  synth->add_option("--count", sy.count, "TMs (storage)")->capture_default_str();
  synth->add_option("--seed", sy.seed, "Seed (storage)")->capture_default_str();
  synth->add_option("--window", sy.storage.window_seconds, "Seconds between TMs (storage)")
      ->capture_default_str();
  synth->add_option("--min-demand", sy.storage.min_demand, "Gbps (storage)")->capture_default_str();
  synth->add_option("--max-demand", sy.storage.max_demand, "Gbps (storage)")->capture_default_str();
  synth->add_option("--input", sy.input, "Base TM sequence (burst)")->check(CLI::ExistingFile);
  synth->add_option("--burst-factor", sy.burst_factor, "Std-devs added per burst (burst)")
      ->capture_default_str();
  synth->add_option("--max-pairs", sy.max_pairs, "Largest burst set (burst)")->capture_default_str();
  synth->add_option("-o,--output", sy.output, "TM file")->capture_default_str();

  StripeArgs st;
  CLI::App* stripe = app.add_subcommand("stripe", "Uniform physical striping");
  stripe->add_option("--pods", st.pods, "Pods")->capture_default_str();
  stripe->add_option("--ocs", st.ocs, "Switches")->capture_default_str();
  stripe->add_option("--ports", st.ports, "Ports per pod per switch, each direction")
      ->capture_default_str();
  stripe->add_option("--bandwidth", st.bandwidth, "Gbps per link")->capture_default_str();
  stripe->add_option("-o,--output", st.output, "Physical topology file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*extract) return RunExtract(ex);
    if (*optimize) return RunOptimize(op);
    if (*round) return RunRound(rd);
    if (*evaluate) return RunEvaluate(ev);
    if (*simulate) return RunSimulate(sm);
    if (*synth) return RunSynth(sy);
    if (*stripe) return RunStripe(st);
  } catch (const Error& e) {
    std::cerr << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
