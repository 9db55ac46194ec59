#include "vfcert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vfcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolFeas = 1e-9;
constexpr double kTolCost = 1e-9;
constexpr double kTolPivot = 1e-11;

// Bounded-variable primal simplex on a dense tableau.  Columns are the
// structural variables, one slack per row, and phase-1 artificials; every
// column carries its own [lo, hi] box, so variable bounds never become
// extra rows.  Bland's anti-cycling rule drives both the entering and the
// leaving choice; the reduced-cost row is recomputed from scratch
// periodically and before any optimal/unbounded verdict.
class BoundedSimplex {
public:
    enum class Result { Optimal, Infeasible, Unbounded };

    BoundedSimplex(const LinearProgram& program, const std::vector<double>& objective)
        : m_(static_cast<int>(program.rows.size())), n_struct_(program.num_vars()) {
        n_cols_ = n_struct_ + m_;  // slacks; artificials appended on demand
        stride_ = n_cols_ + m_;    // headroom for artificials
        lo_.assign(stride_, 0.0);
        hi_.assign(stride_, 0.0);
        for (int j = 0; j < n_struct_; ++j) {
            lo_[j] = program.lower[j];
            hi_[j] = program.upper[j];
        }
        for (int i = 0; i < m_; ++i) {
            switch (program.rows[i].rel) {
            case Rel::Le:
                lo_[n_struct_ + i] = 0.0;
                hi_[n_struct_ + i] = kInf;
                break;
            case Rel::Ge:
                lo_[n_struct_ + i] = -kInf;
                hi_[n_struct_ + i] = 0.0;
                break;
            case Rel::Eq:
                lo_[n_struct_ + i] = 0.0;
                hi_[n_struct_ + i] = 0.0;
                break;
            }
        }
        cost_.assign(stride_, 0.0);
        for (int j = 0; j < n_struct_; ++j)
            cost_[j] = objective[j];

        // Tableau [A | I] with the slack basis.
        tab_.assign(static_cast<std::size_t>(m_) * stride_, 0.0);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_struct_; ++j)
                at(i, j) = program.rows[i].coeffs[j];
            at(i, n_struct_ + i) = 1.0;
        }

        state_.assign(stride_, State::AtLower);
        value_.assign(stride_, 0.0);
        for (int j = 0; j < n_cols_; ++j)
            set_nonbasic_start(j);
        basis_.resize(m_);
        beta_.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            basis_[i] = n_struct_ + i;
            state_[n_struct_ + i] = State::Basic;
            double b = program.rows[i].rhs;
            for (int j = 0; j < n_struct_; ++j)
                if (at(i, j) != 0.0)
                    b -= at(i, j) * value_[j];
            beta_[i] = b;
        }
    }

    Result solve() {
        if (!phase1())
            return Result::Infeasible;
        barred_from_ = n_cols_base_;
        d_.assign(stride_, 0.0);
        recompute_costs();
        return iterate() ? Result::Optimal : Result::Unbounded;
    }

    double value_of(int j) const {
        if (state_[j] == State::Basic) {
            for (int i = 0; i < m_; ++i)
                if (basis_[i] == j)
                    return beta_[i];
        }
        return value_[j];
    }

private:
    enum class State : char { AtLower, AtUpper, Free, Basic };

    int m_, n_struct_, n_cols_;
    int n_cols_base_ = 0;
    int stride_;
    int barred_from_ = 1 << 30;
    std::vector<double> tab_, lo_, hi_, cost_, d_, beta_, value_;
    std::vector<State> state_;
    std::vector<int> basis_;

    double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * stride_ + c]; }
    double at(int r, int c) const { return tab_[static_cast<std::size_t>(r) * stride_ + c]; }

    void set_nonbasic_start(int j) {
        if (std::isfinite(lo_[j])) {
            state_[j] = State::AtLower;
            value_[j] = lo_[j];
        } else if (std::isfinite(hi_[j])) {
            state_[j] = State::AtUpper;
            value_[j] = hi_[j];
        } else {
            state_[j] = State::Free;
            value_[j] = 0.0;
        }
    }

    bool phase1() {
        // Rows whose slack value escapes its box get an artificial column.
        n_cols_base_ = n_cols_;
        std::vector<double> art_cost(stride_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const int s = basis_[i];
            const double target = beta_[i];
            const double clamped = std::min(hi_[s], std::max(lo_[s], target));
            if (std::abs(target - clamped) <= kTolFeas)
                continue;
            // Slack parks at its nearest bound; the artificial absorbs the rest.
            const double residual = target - clamped;
            const int a = n_cols_++;
            lo_[a] = 0.0;
            hi_[a] = kInf;
            if (residual < 0) {
                // Basic columns must read +1: flip the whole row.
                for (int j = 0; j < n_cols_base_; ++j)
                    at(i, j) = -at(i, j);
            }
            at(i, a) = 1.0;
            state_[s] = clamped == lo_[s] ? State::AtLower : State::AtUpper;
            value_[s] = clamped;
            state_[a] = State::Basic;
            basis_[i] = a;
            beta_[i] = std::abs(residual);
            art_cost[a] = 1.0;
        }
        if (n_cols_ == n_cols_base_)
            return true; // slack basis already feasible
        barred_from_ = 1 << 30;
        std::swap(cost_, art_cost);
        d_.assign(stride_, 0.0);
        recompute_costs();
        const bool ok = iterate();
        std::swap(cost_, art_cost);
        if (!ok)
            throw SolverError("simplex: phase 1 reported unbounded");
        double infeas = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_cols_base_)
                infeas += beta_[i];
        if (infeas > kTolFeas)
            return false;
        // Drive remaining artificials out on zero-length pivots.
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_cols_base_)
                continue;
            for (int j = 0; j < n_cols_base_; ++j) {
                if (state_[j] == State::Basic || std::abs(at(i, j)) <= kTolPivot)
                    continue;
                const double keep = state_[j] == State::Basic ? 0.0 : value_[j];
                const int leaving = basis_[i];
                state_[leaving] = State::AtLower;
                value_[leaving] = 0.0;
                pivot(i, j, keep);
                break;
            }
        }
        return true;
    }

    void recompute_costs() {
        for (int j = 0; j < n_cols_; ++j)
            d_[j] = cost_[j];
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_[basis_[i]];
            if (cb == 0.0)
                continue;
            for (int j = 0; j < n_cols_; ++j)
                d_[j] -= cb * at(i, j);
        }
        for (int i = 0; i < m_; ++i)
            d_[basis_[i]] = 0.0;
    }

    // Improving direction for nonbasic column j, or 0.
    int entering_direction(int j) const {
        if (state_[j] == State::Basic || j >= barred_from_ || lo_[j] == hi_[j])
            return 0;
        switch (state_[j]) {
        case State::AtLower:
            return d_[j] < -kTolCost ? 1 : 0;
        case State::AtUpper:
            return d_[j] > kTolCost ? -1 : 0;
        case State::Free:
            if (d_[j] < -kTolCost)
                return 1;
            if (d_[j] > kTolCost)
                return -1;
            return 0;
        default:
            return 0;
        }
    }

    // Tableau pivot of row r on column e; the entering variable assumes
    // `enter_value`.  Caller updates the leaving variable's state first.
    void pivot(int r, int e, double enter_value) {
        const double inv = 1.0 / at(r, e);
        for (int j = 0; j < n_cols_; ++j)
            at(r, j) *= inv;
        at(r, e) = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r)
                continue;
            const double f = at(i, e);
            if (f == 0.0)
                continue;
            for (int j = 0; j < n_cols_; ++j)
                at(i, j) -= f * at(r, j);
            at(i, e) = 0.0;
        }
        const double fd = d_[e];
        if (fd != 0.0) {
            for (int j = 0; j < n_cols_; ++j)
                d_[j] -= fd * at(r, j);
            d_[e] = 0.0;
        }
        basis_[r] = e;
        state_[e] = State::Basic;
        beta_[r] = enter_value;
    }

    bool iterate() {
        long pivots = 0;
        int fresh_retries = 0;
        const long cap = 500000;
        for (;;) {
            if (++pivots > cap)
                throw SolverError("simplex: iteration cap exceeded (numerical breakdown?)");
            if (pivots % 256 == 0)
                recompute_costs();

            int enter = -1, dir = 0;
            for (int j = 0; j < n_cols_; ++j) {
                dir = entering_direction(j);
                if (dir != 0) {
                    enter = j;
                    break; // Bland: smallest index
                }
            }
            if (enter < 0) {
                // Confirm optimality against fresh reduced costs.
                recompute_costs();
                bool really = true;
                for (int j = 0; j < n_cols_ && really; ++j)
                    really = entering_direction(j) == 0;
                if (really)
                    return true;
                if (++fresh_retries > 64)
                    throw SolverError("simplex: reduced-cost oscillation");
                continue;
            }

            // Ratio test: tightest limit among the basic-variable bounds and
            // the entering variable's own opposite bound.  Two passes: the
            // exact minimum first, then Bland's smallest basis index among
            // the rows attaining it.
            auto row_limit = [&](int i, bool& to_lower) {
                const double alpha = dir * at(i, enter);
                const int b = basis_[i];
                to_lower = alpha > 0.0;
                if (alpha > kTolPivot && std::isfinite(lo_[b]))
                    return std::max(0.0, (beta_[i] - lo_[b]) / alpha);
                if (alpha < -kTolPivot && std::isfinite(hi_[b]))
                    return std::max(0.0, (hi_[b] - beta_[i]) / (-alpha));
                return kInf;
            };
            double best_t = kInf;
            for (int i = 0; i < m_; ++i) {
                bool dummy;
                best_t = std::min(best_t, row_limit(i, dummy));
            }
            int leave_row = -1;
            bool leave_to_lower = true;
            for (int i = 0; i < m_; ++i) {
                bool to_lower;
                const double t = row_limit(i, to_lower);
                if (t <= best_t && (leave_row < 0 || basis_[i] < basis_[leave_row])) {
                    leave_row = i;
                    leave_to_lower = to_lower;
                }
            }
            double flip_t = kInf;
            if (state_[enter] != State::Free && std::isfinite(lo_[enter]) &&
                std::isfinite(hi_[enter]))
                flip_t = hi_[enter] - lo_[enter];

            if (leave_row < 0 && flip_t == kInf) {
                recompute_costs();
                if (entering_direction(enter) == 0) {
                    if (++fresh_retries > 64)
                        throw SolverError("simplex: reduced-cost oscillation");
                    continue; // stale costs, not a genuine ray
                }
                return false; // unbounded
            }

            if (flip_t <= best_t) {
                // Bound flip: no basis change.
                const double delta = dir * flip_t;
                for (int i = 0; i < m_; ++i) {
                    const double a = at(i, enter);
                    if (a != 0.0)
                        beta_[i] -= delta * a;
                }
                value_[enter] += delta;
                state_[enter] =
                    state_[enter] == State::AtLower ? State::AtUpper : State::AtLower;
                continue;
            }

            const double t = best_t;
            const double enter_value = value_[enter] + dir * t;
            for (int i = 0; i < m_; ++i) {
                if (i == leave_row)
                    continue;
                const double a = at(i, enter);
                if (a != 0.0)
                    beta_[i] -= dir * t * a;
            }
            const int leaving = basis_[leave_row];
            state_[leaving] = leave_to_lower ? State::AtLower : State::AtUpper;
            value_[leaving] = leave_to_lower ? lo_[leaving] : hi_[leaving];
            pivot(leave_row, enter, enter_value);
        }
    }
};

} // namespace

void LinearProgram::validate() const {
    const int n = num_vars();
    if (n < 1)
        throw ArgumentError("lp: at least one variable required");
    if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
        throw ArgumentError("lp: bounds arrays must match variable count");
    for (double c : objective)
        if (!std::isfinite(c))
            throw ArgumentError("lp: objective coefficients must be finite");
    for (const LinRow& row : rows) {
        if (static_cast<int>(row.coeffs.size()) != n)
            throw ArgumentError("lp: row width does not match variable count");
        for (double c : row.coeffs)
            if (!std::isfinite(c))
                throw ArgumentError("lp: constraint coefficients must be finite");
        if (!std::isfinite(row.rhs))
            throw ArgumentError("lp: right-hand sides must be finite");
    }
}

SolveOutcome lp_solve(const LinearProgram& program) {
    program.validate();
    const int n = program.num_vars();
    SolveOutcome out;
    for (int k = 0; k < n; ++k) {
        if (program.lower[k] > program.upper[k]) {
            out.status = SolveStatus::Infeasible;
            return out;
        }
    }

    const bool maximize = program.sense == Sense::Maximize;
    std::vector<double> obj = program.objective;
    if (maximize)
        for (double& c : obj)
            c = -c;

    BoundedSimplex simplex(program, obj);
    switch (simplex.solve()) {
    case BoundedSimplex::Result::Infeasible:
        out.status = SolveStatus::Infeasible;
        return out;
    case BoundedSimplex::Result::Unbounded:
        out.status = SolveStatus::Unbounded;
        return out;
    case BoundedSimplex::Result::Optimal:
        break;
    }

    out.status = SolveStatus::Optimal;
    out.primal.assign(n, 0.0);
    for (int k = 0; k < n; ++k)
        out.primal[k] = simplex.value_of(k);
    double value = 0.0;
    for (int k = 0; k < n; ++k)
        value += program.objective[k] * out.primal[k];
    out.objective = value;
    out.best_bound = value;
    return out;
}

std::string lp_to_text(const LinearProgram& program) {
    std::ostringstream oss;
    oss.precision(17);
    oss << (program.sense == Sense::Minimize ? "min:" : "max:");
    bool first_obj = true;
    for (int k = 0; k < program.num_vars(); ++k) {
        if (program.objective[k] == 0.0)
            continue;
        oss << " " << (first_obj ? "" : "+ ") << program.objective[k] << " x" << k;
        first_obj = false;
    }
    oss << "\n";
    int r = 0;
    for (const LinRow& row : program.rows) {
        oss << "r" << r++ << ":";
        bool first = true;
        for (int k = 0; k < program.num_vars(); ++k) {
            if (row.coeffs[k] == 0.0)
                continue;
            oss << " " << (first ? "" : "+ ") << row.coeffs[k] << " x" << k;
            first = false;
        }
        const char* rel = row.rel == Rel::Le ? "<=" : (row.rel == Rel::Ge ? ">=" : "=");
        oss << " " << rel << " " << row.rhs << "\n";
    }
    for (int k = 0; k < program.num_vars(); ++k)
        oss << "bounds: " << program.lower[k] << " <= x" << k << " <= " << program.upper[k] << "\n";
    return oss.str();
}

std::string status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal:
        return "optimal";
    case SolveStatus::Infeasible:
        return "infeasible";
    case SolveStatus::Unbounded:
        return "unbounded";
    default:
        return "timeout";
    }
}

} // namespace vfcert
