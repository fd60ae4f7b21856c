#pragma once

// Bounded-enumeration decision procedure for path conditions, and SMT-LIB
// export of the same constraint sets.

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "fspvm/domain.hpp"

namespace fspvm {

struct SolverBudget {
    /// Integers up to this width are enumerated over their full range.
    int full_range_max_width = 8;
    /// Extra pseudo-random values per wider integer variable, on top of
    /// boundary values and constants taken from the constraints.
    int samples_per_var = 16;
    std::uint64_t seed = 0;
    /// Complete assignments evaluated per query.
    std::uint64_t max_assignments = std::uint64_t{1} << 16;
    /// Candidate bindings plus domain-filter evaluations per query.
    std::uint64_t max_steps = std::uint64_t{1} << 24;
    std::chrono::milliseconds timeout{30000};
};

enum class SatStatus { Sat, Unsat, Unknown };

std::string_view sat_status_name(SatStatus s);

struct SatResult {
    SatStatus status = SatStatus::Unknown;
    /// Sat: a value for every free variable of the constraints; maps and
    /// structs are given as whole values.
    Assignment model;
    std::string reason;  // Unknown: what was incomplete
    std::uint64_t steps = 0;
    std::uint64_t assignments = 0;
};

/// Sat models are re-checked with eval_closed before being returned. Unsat
/// is reported only when every enumerated domain was exhaustive.
SatResult check_feasible(const std::vector<Constraint>& pc, const SolverBudget& budget = {},
                         const StructTable& structs = {});

class UnsupportedSort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SMT-LIB 2 script (QF_ABV plus an uninterpreted sort for strings): one
/// assert per constraint, then `(check-sat)` and `(get-model)`.
std::string export_smtlib(const std::vector<Constraint>& pc);

}  // namespace fspvm
