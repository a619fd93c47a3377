#include "fdopt/solver.hpp"

namespace fdopt {

namespace {
constexpr TerminationReason kReasons[] = {TerminationReason::budget, TerminationReason::stagnation,
                                          TerminationReason::gap, TerminationReason::radius,
                                          TerminationReason::failure};
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::budget:
      return "budget";
    case TerminationReason::stagnation:
      return "stagnation";
    case TerminationReason::gap:
      return "gap";
    case TerminationReason::radius:
      return "radius";
    default:
      return "failure";
  }
}

std::optional<TerminationReason> termination_reason_from_string(const std::string& text) {
  for (TerminationReason r : kReasons)
    if (text == to_string(r)) return r;
  return std::nullopt;
}

}  // namespace fdopt
