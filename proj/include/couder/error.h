#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace couder {

enum class ErrorCode {
  kInvalidInput,
  kInfeasible,          // infeasible routing / constraint set
  kUnbounded,           // e.g. all-zero critical set gives unbounded throughput
  kSolverLimit,         // iteration cap exceeded
  kUndefined,           // undefined metric (optimality gap with mu_frac == 0)
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::kInvalidInput, what);
}

}  // namespace couder
