#include "couder/lp.h"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>

namespace couder::lp {

VarId LpModel::AddVariable(std::string name, double lower, double upper) {
  variables_.push_back({std::move(name), lower, upper});
  return VarId{static_cast<int>(variables_.size()) - 1};
}

int LpModel::AddConstraint(LinearExpr expr, Relation relation, double rhs,
                           std::string name) {
  constraints_.push_back({std::move(expr), relation, rhs, std::move(name)});
  return static_cast<int>(constraints_.size()) - 1;
}

void LpModel::SetObjective(Sense sense, LinearExpr expr) {
  sense_ = sense;
  objective_ = std::move(expr);
}

void LpModel::Validate() const {
  const int n = static_cast<int>(variables_.size());
  for (const Variable& v : variables_) {
    Require(!std::isnan(v.lower) && !std::isnan(v.upper), "NaN variable bound");
    Require(v.lower <= v.upper, "variable '" + v.name + "' has lower > upper");
    Require(std::isfinite(v.lower) || std::isfinite(v.upper),
            "variable '" + v.name + "' needs a finite bound");
    Require(v.lower != kInfinity && v.upper != -kInfinity,
            "variable '" + v.name + "' has an empty domain");
  }
  auto check_expr = [n](const LinearExpr& e) {
    for (const Term& t : e.terms()) {
      Require(t.var.index >= 0 && t.var.index < n, "term references an undeclared variable");
      Require(std::isfinite(t.coef), "non-finite coefficient");
    }
  };
  for (const Constraint& c : constraints_) {
    check_expr(c.expr);
    Require(std::isfinite(c.rhs), "non-finite right-hand side");
  }
  check_expr(objective_);
}

std::string_view StatusName(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

double MaxViolation(const LpModel& model, const std::vector<double>& values) {
  double worst = 0;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variables()[j];
    if (std::isnan(values[j])) return kInfinity;
    worst = std::max(worst, v.lower - values[j]);
    worst = std::max(worst, values[j] - v.upper);
  }
  for (const Constraint& c : model.constraints()) {
    double lhs = 0;
    for (const Term& t : c.expr.terms()) lhs += t.coef * values[t.var.index];
    switch (c.relation) {
      case Relation::kLessEqual:
        worst = std::max(worst, lhs - c.rhs);
        break;
      case Relation::kGreaterEqual:
        worst = std::max(worst, c.rhs - lhs);
        break;
      case Relation::kEqual:
        worst = std::max(worst, std::abs(lhs - c.rhs));
        break;
    }
  }
  return worst;
}


namespace {

constexpr double kPivotTolerance = 1e-7;
constexpr double kDropTolerance = 1e-14;
constexpr double kPerturbation = 5e-7;
constexpr double kDegenerateStep = 1e-12;

struct SparseColumn {
  std::vector<int> rows;
  std::vector<double> vals;
};

// Product-form update: column `row` of the identity replaced by B^-1 a_q.
struct Eta {
  int row;
  double pivot;
  std::vector<int> idx;
  std::vector<double> val;
};

enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper };

// Bounded-variable revised simplex on the scaled system  A x + s = b.
// The basis is kept as a sparse LU factorization plus an eta file that is
// folded back into a fresh factorization every refactor_interval pivots.
// Bounds are randomly widened while solving to break ties at degenerate
// vertices; the exact bounds are restored for a final cleanup pass.
class Simplex {
 public:
  Simplex(const LpModel& model, const SolverOptions& options)
      : model_(model), opt_(options) {
    Build();
  }

  LpSolution Run();

 private:
  enum class PhaseResult { kOptimal, kUnbounded };

  void Build();
  void ComputeScaling(const std::vector<std::vector<std::pair<int, double>>>& rows);
  void Refactor();
  void Ftran(std::vector<double>& v) const;
  void Btran(std::vector<double>& v) const;
  void LoadColumn(int j, std::vector<double>& v) const;
  double ColumnDot(int j, const std::vector<double>& y) const;
  PhaseResult Iterate(bool phase_one);
  void Pivot(int row, int entering, const std::vector<double>& alpha);
  double Infeasibility() const;
  void Perturb();
  void RestoreBounds();

  const LpModel& model_;
  SolverOptions opt_;

  int n_ = 0;      // structural columns
  int m_ = 0;      // rows
  int ncols_ = 0;  // structural + slack
  std::vector<SparseColumn> cols_;
  std::vector<double> b_;
  std::vector<double> row_scale_, col_scale_;
  std::vector<double> lo_, up_, x_, cost_;
  std::vector<double> exact_lo_, exact_up_;
  std::vector<VarState> state_;
  std::vector<int> basis_;  // row position -> column

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  long iterations_ = 0;
  long max_iterations_ = 0;
};

// Geometric-mean row/column scaling followed by row equilibration.
void Simplex::ComputeScaling(const std::vector<std::vector<std::pair<int, double>>>& rows) {
  row_scale_.assign(m_, 1.0);
  col_scale_.assign(n_, 1.0);
  for (int pass = 0; pass < 6; ++pass) {
    std::vector<double> cmin(n_, kInfinity), cmax(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double rmin = kInfinity, rmax = 0;
      for (auto [j, v] : rows[i]) {
        double a = std::abs(v) * col_scale_[j];
        rmin = std::min(rmin, a);
        rmax = std::max(rmax, a);
      }
      if (rmax > 0) row_scale_[i] = 1.0 / std::sqrt(rmin * rmax);
      for (auto [j, v] : rows[i]) {
        double a = std::abs(v) * row_scale_[i];
        cmin[j] = std::min(cmin[j], a);
        cmax[j] = std::max(cmax[j], a);
      }
    }
    for (int j = 0; j < n_; ++j) {
      if (cmax[j] > 0) col_scale_[j] = 1.0 / std::sqrt(cmin[j] * cmax[j]);
    }
  }
  for (int i = 0; i < m_; ++i) {
    double rmax = 0;
    for (auto [j, v] : rows[i]) rmax = std::max(rmax, std::abs(v) * col_scale_[j]);
    row_scale_[i] = rmax > 0 ? 1.0 / rmax : 1.0;
  }
}

void Simplex::Build() {
  n_ = static_cast<int>(model_.num_variables());
  m_ = static_cast<int>(model_.num_constraints());

  // Merge duplicate terms.
  std::vector<std::vector<std::pair<int, double>>> rows(m_);
  std::vector<double> merged(n_, 0.0);
  std::vector<char> seen(n_, 0);
  std::vector<int> touched;
  for (int i = 0; i < m_; ++i) {
    touched.clear();
    for (const Term& t : model_.constraints()[i].expr.terms()) {
      if (!seen[t.var.index]) {
        seen[t.var.index] = 1;
        touched.push_back(t.var.index);
      }
      merged[t.var.index] += t.coef;
    }
    std::sort(touched.begin(), touched.end());
    for (int j : touched) {
      if (merged[j] != 0.0) rows[i].push_back({j, merged[j]});
      merged[j] = 0.0;
      seen[j] = 0;
    }
  }
  ComputeScaling(rows);

  ncols_ = n_ + m_;
  b_.resize(m_);
  cols_.assign(ncols_, {});
  for (int i = 0; i < m_; ++i) {
    b_[i] = model_.constraints()[i].rhs * row_scale_[i];
    for (auto [j, v] : rows[i]) {
      cols_[j].rows.push_back(i);
      cols_[j].vals.push_back(v * row_scale_[i] * col_scale_[j]);
    }
  }
  lo_.resize(ncols_);
  up_.resize(ncols_);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = model_.variables()[j].lower / col_scale_[j];
    up_[j] = model_.variables()[j].upper / col_scale_[j];
  }
  for (int i = 0; i < m_; ++i) {
    int s = n_ + i;
    cols_[s].rows = {i};
    cols_[s].vals = {1.0};
    switch (model_.constraints()[i].relation) {
      case Relation::kLessEqual:
        lo_[s] = 0.0;
        up_[s] = kInfinity;
        break;
      case Relation::kGreaterEqual:
        lo_[s] = -kInfinity;
        up_[s] = 0.0;
        break;
      case Relation::kEqual:
        lo_[s] = 0.0;
        up_[s] = 0.0;
        break;
    }
  }
  exact_lo_ = lo_;
  exact_up_ = up_;

  // Nonbasic structurals start at the finite bound nearest zero; the slack
  // basis may start infeasible.
  x_.assign(ncols_, 0.0);
  state_.assign(ncols_, VarState::kAtLower);
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j]) &&
        (!std::isfinite(up_[j]) || std::abs(lo_[j]) <= std::abs(up_[j]))) {
      state_[j] = VarState::kAtLower;
    } else {
      state_[j] = VarState::kAtUpper;
    }
  }
  basis_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    state_[n_ + i] = VarState::kBasic;
  }
  cost_.assign(ncols_, 0.0);

  max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                            : std::max<long>(20000, 50L * ncols_);
}

// Widens every finite bound by a random relative amount.
void Simplex::Perturb() {
  std::mt19937_64 rng(0x5eed);
  auto draw = [&] { return 0.5 + 0.5 * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int j = 0; j < ncols_; ++j) {
    if (std::isfinite(lo_[j])) lo_[j] -= kPerturbation * (1.0 + std::abs(lo_[j])) * draw();
    if (std::isfinite(up_[j])) up_[j] += kPerturbation * (1.0 + std::abs(up_[j])) * draw();
    if (state_[j] == VarState::kAtLower) x_[j] = lo_[j];
    if (state_[j] == VarState::kAtUpper) x_[j] = up_[j];
  }
}

void Simplex::RestoreBounds() {
  lo_ = exact_lo_;
  up_ = exact_up_;
  for (int j = 0; j < ncols_; ++j) {
    if (state_[j] == VarState::kAtLower) x_[j] = lo_[j];
    if (state_[j] == VarState::kAtUpper) x_[j] = up_[j];
  }
  Refactor();
}

void Simplex::Refactor() {
  etas_.clear();
  if (m_ == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < m_; ++r) {
    const SparseColumn& c = cols_[basis_[r]];
    for (std::size_t k = 0; k < c.rows.size(); ++k) trip.emplace_back(c.rows[k], r, c.vals[k]);
  }
  Eigen::SparseMatrix<double> basis_matrix(m_, m_);
  basis_matrix.setFromTriplets(trip.begin(), trip.end());
  basis_matrix.makeCompressed();
  lu_.compute(basis_matrix);
  if (lu_.info() != Eigen::Success) {
    Fail(ErrorCode::kInternal, "simplex basis became numerically singular");
  }

  // Recompute basic values from the nonbasic point.
  std::vector<double> rhs = b_;
  for (int j = 0; j < ncols_; ++j) {
    if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
    for (std::size_t k = 0; k < cols_[j].rows.size(); ++k)
      rhs[cols_[j].rows[k]] -= cols_[j].vals[k] * x_[j];
  }
  Ftran(rhs);
  for (int r = 0; r < m_; ++r) {
    if (!std::isfinite(rhs[r])) Fail(ErrorCode::kInternal, "simplex basis became numerically singular");
    x_[basis_[r]] = rhs[r];
  }
}

void Simplex::Ftran(std::vector<double>& v) const {
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> map(v.data(), m_);
  Eigen::VectorXd sol = lu_.solve(map);
  map = sol;
  for (const Eta& e : etas_) {
    double xr = v[e.row];
    if (xr == 0.0) continue;
    xr /= e.pivot;
    v[e.row] = xr;
    for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * xr;
  }
}

void Simplex::Btran(std::vector<double>& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->row];
    for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
    v[it->row] = s / it->pivot;
  }
  Eigen::Map<Eigen::VectorXd> map(v.data(), m_);
  Eigen::VectorXd sol = lu_.transpose().solve(map);
  map = sol;
}

void Simplex::LoadColumn(int j, std::vector<double>& v) const {
  std::fill(v.begin(), v.end(), 0.0);
  const SparseColumn& c = cols_[j];
  for (std::size_t k = 0; k < c.rows.size(); ++k) v[c.rows[k]] = c.vals[k];
}

double Simplex::ColumnDot(int j, const std::vector<double>& y) const {
  const SparseColumn& c = cols_[j];
  double s = 0;
  for (std::size_t k = 0; k < c.rows.size(); ++k) s += y[c.rows[k]] * c.vals[k];
  return s;
}

void Simplex::Pivot(int row, int entering, const std::vector<double>& alpha) {
  Eta e;
  e.row = row;
  e.pivot = alpha[row];
  for (int r = 0; r < m_; ++r) {
    if (r != row && std::abs(alpha[r]) > kDropTolerance) {
      e.idx.push_back(r);
      e.val.push_back(alpha[r]);
    }
  }
  etas_.push_back(std::move(e));
  basis_[row] = entering;
  state_[entering] = VarState::kBasic;
}

double Simplex::Infeasibility() const {
  double total = 0;
  for (int r = 0; r < m_; ++r) {
    const int bv = basis_[r];
    if (x_[bv] < lo_[bv] - opt_.primal_tolerance) total += lo_[bv] - x_[bv];
    if (x_[bv] > up_[bv] + opt_.primal_tolerance) total += x_[bv] - up_[bv];
  }
  return total;
}

// Phase one minimizes the sum of bound violations of the basic variables;
// an infeasible basic variable blocks only at the bound it moves toward.
Simplex::PhaseResult Simplex::Iterate(bool phase_one) {
  std::vector<double> y(m_), alpha(m_);
  std::vector<double> eff_lo(m_), eff_up(m_);
  int degenerate_streak = 0;
  bool fresh = false;
  const double tol = opt_.primal_tolerance;
  for (;;) {
    if (iterations_ >= max_iterations_) {
      Fail(ErrorCode::kSolverLimit, "simplex iteration limit exceeded");
    }
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      Refactor();
      fresh = true;
    }
    const bool bland = degenerate_streak >= opt_.bland_after;

    bool any_cost = !phase_one;
    for (int r = 0; r < m_; ++r) {
      const int bv = basis_[r];
      eff_lo[r] = lo_[bv];
      eff_up[r] = up_[bv];
      if (!phase_one) {
        y[r] = cost_[bv];
        continue;
      }
      y[r] = 0.0;
      if (x_[bv] < lo_[bv] - tol) {
        y[r] = -1.0;
        eff_lo[r] = -kInfinity;
        eff_up[r] = lo_[bv];
      } else if (x_[bv] > up_[bv] + tol) {
        y[r] = 1.0;
        eff_lo[r] = up_[bv];
        eff_up[r] = kInfinity;
      }
      if (y[r] != 0.0) any_cost = true;
    }
    if (!any_cost) return PhaseResult::kOptimal;
    Btran(y);

    int entering = -1;
    double best = 0;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::kBasic || lo_[j] == up_[j]) continue;
      const double d = (phase_one ? 0.0 : cost_[j]) - ColumnDot(j, y);
      double gain = 0;
      if (state_[j] == VarState::kAtLower && d < -opt_.dual_tolerance) gain = -d;
      if (state_[j] == VarState::kAtUpper && d > opt_.dual_tolerance) gain = d;
      if (gain <= 0) continue;
      if (bland) {
        entering = j;
        break;
      }
      if (gain > best) {
        best = gain;
        entering = j;
      }
    }
    if (entering < 0) {
      if (!fresh) {
        Refactor();
        fresh = true;
        continue;
      }
      return PhaseResult::kOptimal;
    }
    fresh = false;
    ++iterations_;

    LoadColumn(entering, alpha);
    Ftran(alpha);
    const double dir = state_[entering] == VarState::kAtLower ? 1.0 : -1.0;
    const double range = up_[entering] - lo_[entering];
    double amax = 0;
    for (double a : alpha) amax = std::max(amax, std::abs(a));
    const double piv_tol = kPivotTolerance * std::max(1.0, amax);

    // Basic r moves by g_r * t with g_r = -dir * alpha_r. An infeasible
    // basic variable always starts outside the bound it blocks at, so its
    // ratio is clipped to zero like any other degenerate ratio.
    auto ratio = [&](int r, double g, double slack) {
      const int bv = basis_[r];
      if (g < 0 && std::isfinite(eff_lo[r])) return (x_[bv] - eff_lo[r] + slack) / -g;
      if (g > 0 && std::isfinite(eff_up[r])) return (eff_up[r] + slack - x_[bv]) / g;
      return kInfinity;
    };
    int leave = -1;
    double step = kInfinity;
    if (!bland) {
      // Harris two-pass ratio test.
      double relaxed = range;
      for (int r = 0; r < m_; ++r) {
        const double g = -dir * alpha[r];
        if (std::abs(g) > piv_tol) relaxed = std::min(relaxed, ratio(r, g, tol));
      }
      if (!std::isfinite(relaxed)) return PhaseResult::kUnbounded;
      if (range <= relaxed) {
        step = range;
      } else {
        double best_pivot = 0;
        for (int r = 0; r < m_; ++r) {
          const double g = -dir * alpha[r];
          if (std::abs(g) <= piv_tol) continue;
          const double t = ratio(r, g, 0.0);
          if (t <= relaxed && std::abs(g) > best_pivot) {
            best_pivot = std::abs(g);
            leave = r;
            step = std::max(t, 0.0);
          }
        }
      }
    } else {
      // Textbook ratio test with Bland's smallest-index tie-break.
      for (int r = 0; r < m_; ++r) {
        const double g = -dir * alpha[r];
        if (std::abs(g) <= piv_tol) continue;
        const double t = std::max(ratio(r, g, 0.0), 0.0);
        if (t < step - kDegenerateStep ||
            (t <= step + kDegenerateStep && leave >= 0 && basis_[r] < basis_[leave])) {
          step = t;
          leave = r;
        }
      }
      if (range <= step) {
        step = range;
        leave = -1;
      }
      if (!std::isfinite(step)) return PhaseResult::kUnbounded;
    }
    degenerate_streak = step < kDegenerateStep ? degenerate_streak + 1 : 0;

    if (step != 0.0) {
      for (int r = 0; r < m_; ++r) {
        if (alpha[r] != 0.0) x_[basis_[r]] -= dir * alpha[r] * step;
      }
    }
    if (leave < 0) {
      // Bound flip.
      if (state_[entering] == VarState::kAtLower) {
        x_[entering] = up_[entering];
        state_[entering] = VarState::kAtUpper;
      } else {
        x_[entering] = lo_[entering];
        state_[entering] = VarState::kAtLower;
      }
      continue;
    }
    x_[entering] += dir * step;
    const int leaving = basis_[leave];
    if (-dir * alpha[leave] < 0) {
      x_[leaving] = eff_lo[leave];
      state_[leaving] = x_[leaving] == lo_[leaving] ? VarState::kAtLower : VarState::kAtUpper;
    } else {
      x_[leaving] = eff_up[leave];
      state_[leaving] = x_[leaving] == up_[leaving] ? VarState::kAtUpper : VarState::kAtLower;
    }
    Pivot(leave, entering, alpha);
  }
}

LpSolution Simplex::Run() {
  LpSolution sol;
  const double sign = model_.sense() == Sense::kMaximize ? -1.0 : 1.0;
  for (const Term& t : model_.objective().terms()) {
    cost_[t.var.index] += sign * t.coef * col_scale_[t.var.index];
  }
  // Phase 2 runs on costs normalized to unit magnitude.
  double cmax = 0;
  for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(cost_[j]));
  if (cmax > 0) {
    for (int j = 0; j < n_; ++j) cost_[j] /= cmax;
  }

  Perturb();
  Refactor();
  bool perturbed = true;
  for (;;) {
    // The perturbed problem is a relaxation, so its infeasibility is final.
    Iterate(true);
    if (Infeasibility() > 0) {
      sol.status = Status::kInfeasible;
      sol.iterations = static_cast<int>(iterations_);
      return sol;
    }
    if (cmax > 0 && Iterate(false) == PhaseResult::kUnbounded) {
      sol.status = Status::kUnbounded;
      sol.iterations = static_cast<int>(iterations_);
      return sol;
    }
    if (perturbed) {
      RestoreBounds();
      perturbed = false;
      continue;
    }
    Refactor();
    if (Infeasibility() == 0) break;
  }
  sol.iterations = static_cast<int>(iterations_);

  sol.status = Status::kOptimal;
  sol.values.resize(n_);
  for (int j = 0; j < n_; ++j) {
    const Variable& v = model_.variables()[j];
    sol.values[j] = std::clamp(x_[j] * col_scale_[j], v.lower, v.upper);
  }
  double obj = 0;
  for (const Term& t : model_.objective().terms()) obj += t.coef * sol.values[t.var.index];
  sol.objective_value = obj;

  const double violation = MaxViolation(model_, sol.values);
  if (!(violation <= opt_.feasibility_tolerance)) {
    std::ostringstream os;
    os << "simplex solution violates the model by " << violation;
    Fail(ErrorCode::kInternal, os.str());
  }
  return sol;
}

}  // namespace

LpSolution Solve(const LpModel& model, const SolverOptions& options) {
  model.Validate();
  Simplex simplex(model, options);
  return simplex.Run();
}

std::optional<std::vector<double>> SolveFeasibility(const LpModel& model,
                                                    const SolverOptions& options) {
  LpModel copy = model;
  copy.SetObjective(Sense::kMinimize, {});
  LpSolution sol = Solve(copy, options);
  if (sol.status != Status::kOptimal) return std::nullopt;
  return sol.values;
}

}  // namespace couder::lp
