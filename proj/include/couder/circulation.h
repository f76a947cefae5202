#pragma once

// Integral min-cost circulation and the bipartite subproblem network used by
// the per-OCS rounding step.

#include <optional>
#include <vector>

#include "couder/model.h"

namespace couder {

struct FlowArc {
  int from;
  int to;
  long lower;
  long upper;
  double cost;
};

class FlowNetwork {
 public:
  FlowNetwork() = default;
  explicit FlowNetwork(int num_nodes) : num_nodes_(num_nodes) {}

  int AddNode() { return num_nodes_++; }
  // Returns the arc index.
  int AddArc(int from, int to, long lower, long upper, double cost);

  int num_nodes() const { return num_nodes_; }
  const std::vector<FlowArc>& arcs() const { return arcs_; }

 private:
  int num_nodes_ = 0;
  std::vector<FlowArc> arcs_;
};

struct Circulation {
  std::vector<long> flow;  // per arc
  double cost = 0.0;
};

// Minimum-cost integral circulation. Returns nullopt when the lower bounds
// cannot be met. Throws invalid-input on l > u, negative upper bounds or
// unbounded arcs.
std::optional<Circulation> SolveCirculation(const FlowNetwork& net);

// min sum C_ij a_ij  s.t.  L <= a <= U,  row sums <= Q,  column sums <= P.
struct SubproblemSpec {
  RealMatrix cost;            // I x J
  IntMatrix lower;            // I x J
  IntMatrix upper;            // I x J
  std::vector<int> row_caps;  // Q, size I
  std::vector<int> col_caps;  // P, size J
};

struct SubproblemNetwork {
  FlowNetwork net;
  int rows = 0;
  int cols = 0;
  int first_cell_arc = 0;  // cell (i, j) is arc first_cell_arc + i * cols + j
  int feedback_arc = 0;
  double epsilon = 0.0;  // reward per unit of total flow actually used
};

inline constexpr double kDefaultEpsilon = 1e-6;

// Source -> row -> column -> sink, closed by a sink -> source arc of cost
// -epsilon. epsilon is shrunk when it could override a real cost difference.
SubproblemNetwork BuildSubproblem(const SubproblemSpec& spec,
                                  double epsilon = kDefaultEpsilon);

// Cell flows of a solved subproblem network.
IntMatrix ReadAssignment(const SubproblemNetwork& sub, const Circulation& flow);

// Build + solve + read. nullopt when the bounds are inconsistent.
std::optional<IntMatrix> SolveSubproblem(const SubproblemSpec& spec,
                                         double epsilon = kDefaultEpsilon);

}  // namespace couder
