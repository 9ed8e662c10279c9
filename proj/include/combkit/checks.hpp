// Inequality checks shared by the verification suites.
#pragma once

#include <string>
#include <string_view>

namespace combkit {

enum class CheckStatus { pass, fail, inconclusive };

std::string_view to_string(CheckStatus s);

/// lhs <= rhs + margin. `certified` is true when both sides are exact (or
/// bounded in the direction that makes a pass conclusive).
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  CheckStatus status = CheckStatus::inconclusive;
  bool certified = false;
};

/// Infinite sides: rhs = +inf passes; lhs = rhs = +inf is inconclusive;
/// lhs = +inf against a finite rhs fails. NaN on either side is
/// inconclusive.
InequalityCheck check_leq(double lhs, double rhs, double margin, bool certified);

}  // namespace combkit
