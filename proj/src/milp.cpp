#include "vfcert/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace vfcert {

namespace {

constexpr double kTolInt = 1e-6;
constexpr double kGap = 1e-8;

struct Node {
    double bound = 0.0;
    long id = 0;
    std::vector<double> lower, upper;
    std::vector<double> primal;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound)
            return a.bound > b.bound; // min-heap on bound
        return a.id > b.id;
    }
};

} // namespace

SolveOutcome milp_solve(const MilpProgram& program) {
    LinearProgram lp = program.lp;
    lp.validate();
    const bool maximize = lp.sense == Sense::Maximize;
    if (maximize) {
        lp.sense = Sense::Minimize;
        for (double& c : lp.objective)
            c = -c;
    }
    for (int k : program.binaries) {
        if (k < 0 || k >= lp.num_vars())
            throw ArgumentError("milp: binary index out of range");
        lp.lower[k] = std::max(lp.lower[k], 0.0);
        lp.upper[k] = std::min(lp.upper[k], 1.0);
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    auto solve_at = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
        LinearProgram node_lp = lp;
        node_lp.lower = lo;
        node_lp.upper = hi;
        return lp_solve(node_lp);
    };

    auto finish = [&](SolveOutcome out) {
        if (maximize) {
            out.objective = -out.objective;
            out.best_bound = -out.best_bound;
        }
        return out;
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;

    SolveOutcome root = solve_at(lp.lower, lp.upper);
    if (root.status == SolveStatus::Infeasible)
        return finish(root);
    if (root.status == SolveStatus::Unbounded)
        return finish(root);
    open.push({root.objective, next_id++, lp.lower, lp.upper, root.primal});

    bool have_incumbent = false;
    double incumbent_obj = 0.0;
    std::vector<double> incumbent;

    auto timeout_outcome = [&](double open_bound) {
        SolveOutcome out;
        out.status = SolveStatus::Timeout;
        out.best_bound = have_incumbent ? std::min(open_bound, incumbent_obj) : open_bound;
        out.has_incumbent = have_incumbent;
        if (have_incumbent) {
            out.objective = incumbent_obj;
            out.primal = incumbent;
        }
        return finish(out);
    };

    while (!open.empty()) {
        if (elapsed() > program.timeout_s)
            return timeout_outcome(open.top().bound);
        Node node = open.top();
        open.pop();
        if (have_incumbent && node.bound >= incumbent_obj - kGap)
            break; // bound-based proof of optimality

        // Most fractional binary (ties broken by smallest index).
        int branch_var = -1;
        double best_frac = kTolInt;
        for (int k : program.binaries) {
            const double v = node.primal[k];
            const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
            if (frac > best_frac + 1e-15) {
                best_frac = frac;
                branch_var = k;
            }
        }
        if (branch_var < 0) {
            // Integral: node LP optimum is feasible for the MILP.
            if (!have_incumbent || node.bound < incumbent_obj) {
                have_incumbent = true;
                incumbent_obj = node.bound;
                incumbent = node.primal;
                for (int k : program.binaries)
                    incumbent[k] = std::round(incumbent[k]);
            }
            continue;
        }

        for (int side = 0; side < 2; ++side) {
            if (elapsed() > program.timeout_s)
                return timeout_outcome(open.empty() ? node.bound : std::min(node.bound, open.top().bound));
            Node child;
            child.lower = node.lower;
            child.upper = node.upper;
            if (side == 0)
                child.upper[branch_var] = 0.0;
            else
                child.lower[branch_var] = 1.0;
            SolveOutcome sol = solve_at(child.lower, child.upper);
            if (sol.status == SolveStatus::Infeasible)
                continue;
            if (sol.status == SolveStatus::Unbounded)
                return finish(sol);
            if (have_incumbent && sol.objective >= incumbent_obj - kGap)
                continue;
            child.bound = sol.objective;
            child.id = next_id++;
            child.primal = sol.primal;
            open.push(std::move(child));
        }
    }

    SolveOutcome out;
    if (have_incumbent) {
        out.status = SolveStatus::Optimal;
        out.objective = incumbent_obj;
        out.best_bound = incumbent_obj;
        out.primal = incumbent;
    } else {
        out.status = SolveStatus::Infeasible;
    }
    return finish(out);
}

} // namespace vfcert
