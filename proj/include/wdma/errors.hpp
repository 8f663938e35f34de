#pragma once

#include <stdexcept>
#include <string>

namespace wdma {

// Raised when a SystemConfig (or anything derived from it) violates its invariants.
class InvalidConfig : public std::invalid_argument {
public:
    explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

// The convex power subproblem has an empty strict interior at the reference point.
class InfeasibleStart : public std::runtime_error {
public:
    explicit InfeasibleStart(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration would exceed its configured state budget.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wdma
