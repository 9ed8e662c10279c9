#include "combkit/checks.hpp"

#include <cmath>

namespace combkit {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

InequalityCheck check_leq(double lhs, double rhs, double margin, bool certified) {
  InequalityCheck c{lhs, rhs, margin, CheckStatus::inconclusive, certified};
  if (std::isnan(lhs) || std::isnan(rhs)) return c;
  if (std::isinf(rhs) && rhs > 0) {
    c.status = (std::isinf(lhs) && lhs > 0) ? CheckStatus::inconclusive : CheckStatus::pass;
    return c;
  }
  if (std::isinf(lhs) && lhs < 0) {
    c.status = CheckStatus::pass;
    return c;
  }
  c.status = lhs <= rhs + margin ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

}  // namespace combkit
