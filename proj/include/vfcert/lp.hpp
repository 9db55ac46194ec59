#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vfcert/errors.hpp"

namespace vfcert {

enum class Sense { Minimize, Maximize };
enum class Rel { Le, Ge, Eq };

struct LinRow {
    std::vector<double> coeffs;
    Rel rel = Rel::Le;
    double rhs = 0.0;
};

// Dense linear program: objective over n variables, constraint rows, and
// variable boxes (+-inf allowed).
struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<double> objective;
    std::vector<LinRow> rows;
    std::vector<double> lower, upper;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int add_var(double lo, double hi, double obj = 0.0) {
        objective.push_back(obj);
        lower.push_back(lo);
        upper.push_back(hi);
        return num_vars() - 1;
    }
    void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Timeout };

std::string status_name(SolveStatus s);

struct SolveOutcome {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> primal;
    // MILP timeout bookkeeping: proven dual bound and whether `primal`
    // holds an incumbent.
    double best_bound = std::numeric_limits<double>::quiet_NaN();
    bool has_incumbent = false;
};

// Two-phase primal simplex with Bland's anti-cycling rule (deterministic).
// Feasibility tolerance 1e-9.
SolveOutcome lp_solve(const LinearProgram& program);

// Plain-text dump, one constraint per line; format documented in README.
std::string lp_to_text(const LinearProgram& program);

struct MilpProgram {
    LinearProgram lp;
    std::vector<int> binaries; // variable indices restricted to {0, 1}
    double timeout_s = std::numeric_limits<double>::infinity();
};

// Best-first branch-and-bound on LP relaxations, branching on the most
// fractional binary.  Integrality tolerance 1e-6, absolute gap 1e-8.  On
// timeout the outcome carries the proven dual bound and any incumbent.
SolveOutcome milp_solve(const MilpProgram& program);

} // namespace vfcert
