#include "vfcert/lp.hpp"
#include "vfcert/sampler.hpp"
#include "vfcert/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace vfcert {

namespace {

struct MilpEncoding {
    LinearProgram lp;
    std::vector<int> binaries;
    std::vector<int> var_base; // first variable index of each layer's outputs
    int output_base = 0;
};

void add_row(LinearProgram& lp, std::vector<std::pair<int, double>> terms, Rel rel, double rhs) {
    LinRow row;
    row.coeffs.assign(lp.num_vars(), 0.0);
    for (const auto& [idx, w] : terms)
        row.coeffs[idx] += w;
    row.rel = rel;
    row.rhs = rhs;
    lp.rows.push_back(std::move(row));
}

// Exact big-M encoding of the network over the given input relaxation.
// Pre-activation bounds come from the DeepPoly elements; stable ReLUs are
// linear, unstable ones get one binary each.
MilpEncoding encode_network(const Network& net, const std::vector<double>& in_lo,
                            const std::vector<double>& in_hi,
                            const std::vector<AbstractElement>& elems,
                            const std::vector<PlanePair>* planes, const FlowGraph* graph,
                            const AttackBudget& budget) {
    MilpEncoding enc;
    LinearProgram& lp = enc.lp;
    lp.sense = Sense::Minimize;

    const int n = net.input_size;
    for (int k = 0; k < n; ++k)
        lp.add_var(in_lo[k], in_hi[k]);

    enc.var_base.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        enc.var_base[l] = lp.num_vars();
        for (int k = 0; k < net.layers[l].size; ++k)
            lp.add_var(elems[l].lo[k], elems[l].hi[k]);
    }
    enc.output_base = enc.var_base.back();

    // Displacement variables plus plane and flow rows on the inputs.
    const bool with_flow = budget.gamma < kInf && graph;
    if (planes && graph) {
        std::vector<int> vx(graph->num_pixels, -1), vy(graph->num_pixels, -1);
        for (int p = 0; p < graph->num_pixels; ++p) {
            vx[p] = lp.add_var(-budget.delta, budget.delta);
            vy[p] = lp.add_var(-budget.delta, budget.delta);
        }
        for (int k = 0; k < n; ++k) {
            const PlanePair& pl = (*planes)[k];
            const int p = graph->pixel_of_input[k];
            add_row(lp, {{k, 1.0}, {vx[p], -pl.lo1}, {vy[p], -pl.lo2}}, Rel::Ge, pl.lo0);
            add_row(lp, {{k, 1.0}, {vx[p], -pl.up1}, {vy[p], -pl.up2}}, Rel::Le, pl.up0);
        }
        if (with_flow) {
            for (const auto& [a, b] : graph->edges) {
                for (const auto& comp : {vx, vy}) {
                    add_row(lp, {{comp[a], 1.0}, {comp[b], -1.0}}, Rel::Le, budget.gamma);
                    add_row(lp, {{comp[a], 1.0}, {comp[b], -1.0}}, Rel::Ge, -budget.gamma);
                }
            }
        }
    }

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        const int base = enc.var_base[l];
        const int prev_base = l == 0 ? 0 : enc.var_base[l - 1];
        switch (layer.kind) {
        case Layer::Kind::Affine:
            for (int k = 0; k < layer.size; ++k) {
                std::vector<std::pair<int, double>> terms{{base + k, 1.0}};
                for (const auto& [idx, w] : layer.map.rows[k])
                    terms.emplace_back(prev_base + idx, -w);
                add_row(lp, std::move(terms), Rel::Eq, layer.map.bias[k]);
            }
            break;
        case Layer::Kind::Relu: {
            const std::vector<double>& plo = l == 0 ? in_lo : elems[l - 1].lo;
            const std::vector<double>& phi = l == 0 ? in_hi : elems[l - 1].hi;
            for (int k = 0; k < layer.size; ++k) {
                const int y = base + k;
                const int x = prev_base + k;
                const double lo = plo[k], hi = phi[k];
                if (hi <= 0.0) {
                    lp.lower[y] = 0.0;
                    lp.upper[y] = 0.0;
                } else if (lo >= 0.0) {
                    add_row(lp, {{y, 1.0}, {x, -1.0}}, Rel::Eq, 0.0);
                } else {
                    const int b = lp.add_var(0.0, 1.0);
                    enc.binaries.push_back(b);
                    lp.lower[y] = 0.0;
                    lp.upper[y] = std::max(0.0, hi);
                    add_row(lp, {{y, 1.0}, {x, -1.0}}, Rel::Ge, 0.0);          // y >= x
                    add_row(lp, {{y, 1.0}, {x, -1.0}, {b, -lo}}, Rel::Le, -lo); // y <= x - lo(1-b)
                    add_row(lp, {{y, 1.0}, {b, -hi}}, Rel::Le, 0.0);            // y <= hi*b
                }
            }
            break;
        }
        case Layer::Kind::ResidualAdd: {
            const int other_base = layer.from == -1 ? 0 : enc.var_base[layer.from];
            for (int k = 0; k < layer.size; ++k)
                add_row(lp, {{base + k, 1.0}, {prev_base + k, -1.0}, {other_base + k, -1.0}},
                        Rel::Eq, 0.0);
            break;
        }
        }
    }

    // Rows built incrementally have ragged widths; pad to the final count.
    const int n_vars = lp.num_vars();
    for (LinRow& row : lp.rows)
        row.coeffs.resize(n_vars, 0.0);
    return enc;
}

} // namespace

CertificationReport milp_certify(const Network& net, const std::vector<double>& in_lo,
                                 const std::vector<double>& in_hi,
                                 const std::vector<PlanePair>* planes, const FlowGraph* graph,
                                 const AttackBudget& budget, int label, double timeout_s,
                                 const Image* image, const std::vector<double>* clean_logits) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const bool with_flow = budget.gamma < kInf;
    if (with_flow && (!planes || !graph))
        throw ContractError("milp_certify: flow constraints require bounding planes");

    const int outputs = net.output_size();
    if (label < 0 || label >= outputs)
        throw ContractError("milp_certify: label out of range");

    std::vector<AbstractElement> elems =
        deeppoly_analyze(net, in_lo, in_hi, planes, graph, budget);
    MilpEncoding enc = encode_network(net, in_lo, in_hi, elems,
                                      with_flow ? planes : nullptr, graph, budget);

    CertificationReport report;
    report.norm = budget.norm;
    report.delta = budget.delta;
    report.gamma = budget.gamma;
    report.method = method_name(Method::Milp, with_flow);
    report.predicted_label = label;

    // Adversarial labels in decreasing clean-logit order so likely-hard
    // margins get their full timeout share first.
    std::vector<int> order;
    for (int t = 0; t < outputs; ++t)
        if (t != label)
            order.push_back(t);
    if (clean_logits) {
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return (*clean_logits)[a] > (*clean_logits)[b]; });
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return elems.back().hi[a] > elems.back().hi[b]; });
    }

    bool all_positive = true;
    bool any_timeout = false;
    bool falsified = false;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int t = order[pos];
        MilpProgram prog;
        prog.lp = enc.lp;
        prog.lp.objective.assign(prog.lp.num_vars(), 0.0);
        prog.lp.objective[enc.output_base + label] = 1.0;
        prog.lp.objective[enc.output_base + t] = -1.0;
        prog.binaries = enc.binaries;
        const double remaining = timeout_s - elapsed();
        prog.timeout_s = std::max(0.0, remaining) / static_cast<double>(order.size() - pos);

        SolveOutcome sol = milp_solve(prog);
        if (sol.status == SolveStatus::Optimal) {
            report.margins[t] = sol.objective;
            if (sol.objective <= 0.0) {
                all_positive = false;
                // Decode the relaxation point into a concrete attack when
                // possible; only a re-verified field is reported.
                if (image && !falsified) {
                    std::vector<double> point(sol.primal.begin(), sol.primal.begin() + net.input_size);
                    std::optional<VectorField> field = decode_input_point(*image, budget, point);
                    if (field && field_admissible(*field, budget)) {
                        const std::vector<double> logits = forward(net, deform(*image, *field));
                        const int pred = argmax_label(logits);
                        if (pred != label && logits[label] - logits[pred] < 0.0) {
                            falsified = true;
                            report.witness = std::move(*field);
                            report.adversarial_label = pred;
                        }
                    }
                }
                if (!falsified)
                    report.note = "negative margin without realizable witness";
            }
        } else if (sol.status == SolveStatus::Timeout) {
            report.margins[t] = sol.best_bound;
            if (!(sol.best_bound > 0.0)) {
                any_timeout = true;
                all_positive = false;
            }
        } else {
            throw SolverError("milp_certify: unexpected solver status " + status_name(sol.status));
        }
    }

    if (falsified)
        report.status = "falsified";
    else if (all_positive)
        report.status = "certified";
    else if (any_timeout)
        report.status = "timeout";
    else
        report.status = "unknown";
    report.time_s = elapsed();
    return report;
}

} // namespace vfcert
