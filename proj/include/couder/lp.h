#pragma once

// Minimal linear-programming core: a model builder and a bounded-variable
// revised simplex solver.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "couder/error.h"

namespace couder::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct VarId {
  int index = -1;
  bool operator==(const VarId&) const = default;
};

enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Sense { kMinimize, kMaximize };

struct Term {
  VarId var;
  double coef;
};

class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(std::initializer_list<Term> terms) : terms_(terms) {}

  LinearExpr& Add(VarId var, double coef) {
    if (coef != 0.0) terms_.push_back({var, coef});
    return *this;
  }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<Term> terms_;
};

struct Variable {
  std::string name;
  double lower;
  double upper;
};

struct Constraint {
  LinearExpr expr;
  Relation relation;
  double rhs;
  std::string name;
};

class LpModel {
 public:
  VarId AddVariable(std::string name, double lower = 0.0, double upper = kInfinity);
  int AddConstraint(LinearExpr expr, Relation relation, double rhs,
                    std::string name = {});
  void SetObjective(Sense sense, LinearExpr expr);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  Sense sense() const { return sense_; }
  const LinearExpr& objective() const { return objective_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }

  // Throws invalid-input on undeclared variables, lower > upper, NaN
  // coefficients or variables without any finite bound.
  void Validate() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Sense sense_ = Sense::kMinimize;
  LinearExpr objective_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

std::string_view StatusName(Status status);

struct LpSolution {
  Status status = Status::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  int iterations = 0;

  double value(VarId v) const { return values[v.index]; }
};

struct SolverOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  // Final check against the unscaled model.
  double feasibility_tolerance = 1e-6;
  // 0 selects a size-dependent default.
  long max_iterations = 0;
  int refactor_interval = 100;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
};

// Solves the model. Errors: malformed model -> invalid-input; iteration cap
// exceeded or numerical breakdown -> solver-limit / internal-error.
LpSolution Solve(const LpModel& model, const SolverOptions& options = {});

// Solves with a zero objective. Returns the point when feasible.
std::optional<std::vector<double>> SolveFeasibility(const LpModel& model,
                                                    const SolverOptions& options = {});

// Largest absolute violation of any bound or constraint by `values`.
double MaxViolation(const LpModel& model, const std::vector<double>& values);

// CPLEX LP text format, for cross-checking against external solvers.
std::string ToLpFormat(const LpModel& model);

}  // namespace couder::lp
