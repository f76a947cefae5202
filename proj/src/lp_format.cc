#include <cmath>
#include <iomanip>
#include <sstream>

#include "couder/lp.h"

namespace couder::lp {
namespace {

std::string VarName(const LpModel& model, VarId v) {
  const std::string& name = model.variables()[v.index].name;
  if (name.empty()) return "x" + std::to_string(v.index);
  std::string out = name;
  for (char& c : out) {
    if (c == ' ' || c == ':' || c == '+' || c == '-' || c == '*' || c == '^') c = '_';
  }
  // Names must be unique in the file; suffix with the index.
  return out + "#" + std::to_string(v.index);
}

void WriteExpr(std::ostream& os, const LpModel& model, const LinearExpr& e) {
  if (e.empty()) {
    os << " 0 " << VarName(model, VarId{0});
    return;
  }
  for (const Term& t : e.terms()) {
    os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << " "
       << VarName(model, t.var);
  }
}

}  // namespace

std::string ToLpFormat(const LpModel& model) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << (model.sense() == Sense::kMaximize ? "Maximize\n" : "Minimize\n");
  os << " obj:";
  WriteExpr(os, model, model.objective());
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const Constraint& c = model.constraints()[i];
    os << " c" << i << ":";
    WriteExpr(os, model, c.expr);
    switch (c.relation) {
      case Relation::kLessEqual:
        os << " <= ";
        break;
      case Relation::kGreaterEqual:
        os << " >= ";
        break;
      case Relation::kEqual:
        os << " = ";
        break;
    }
    os << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variables()[j];
    std::string name = VarName(model, VarId{static_cast<int>(j)});
    os << " ";
    if (std::isfinite(v.lower)) os << v.lower; else os << "-inf";
    os << " <= " << name << " <= ";
    if (std::isfinite(v.upper)) os << v.upper; else os << "+inf";
    os << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace couder::lp
