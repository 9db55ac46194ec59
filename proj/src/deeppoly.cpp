#include "vfcert/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace vfcert {

LayerIntervals interval_propagate_all(const Network& net, const std::vector<double>& in_lo,
                                      const std::vector<double>& in_hi) {
    if (static_cast<int>(in_lo.size()) != net.input_size ||
        static_cast<int>(in_hi.size()) != net.input_size)
        throw ContractError("interval_propagate: bounds do not match the network input");
    LayerIntervals out;
    out.lo.resize(net.layers.size());
    out.hi.resize(net.layers.size());
    const std::vector<double>* plo = &in_lo;
    const std::vector<double>* phi = &in_hi;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        std::vector<double>& lo = out.lo[l];
        std::vector<double>& hi = out.hi[l];
        switch (layer.kind) {
        case Layer::Kind::Affine: {
            lo.assign(layer.size, 0.0);
            hi.assign(layer.size, 0.0);
            for (int k = 0; k < layer.size; ++k) {
                double a = layer.map.bias[k], b = layer.map.bias[k];
                for (const auto& [idx, w] : layer.map.rows[k]) {
                    if (w > 0) {
                        a += w * (*plo)[idx];
                        b += w * (*phi)[idx];
                    } else {
                        a += w * (*phi)[idx];
                        b += w * (*plo)[idx];
                    }
                }
                lo[k] = a;
                hi[k] = b;
            }
            break;
        }
        case Layer::Kind::Relu: {
            lo = *plo;
            hi = *phi;
            for (double& v : lo)
                v = std::max(0.0, v);
            for (double& v : hi)
                v = std::max(0.0, v);
            break;
        }
        case Layer::Kind::ResidualAdd: {
            const std::vector<double>& olo = layer.from == -1 ? in_lo : out.lo[layer.from];
            const std::vector<double>& ohi = layer.from == -1 ? in_hi : out.hi[layer.from];
            lo = *plo;
            hi = *phi;
            for (int k = 0; k < layer.size; ++k) {
                lo[k] += olo[k];
                hi[k] += ohi[k];
            }
            break;
        }
        }
        plo = &lo;
        phi = &hi;
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
interval_propagate(const Network& net, const PixelBounds& bounds) {
    LayerIntervals all = interval_propagate_all(net, bounds.lo, bounds.hi);
    return {all.lo.back(), all.hi.back()};
}

namespace {

// Lower bound of an affine expression anchored at layer `anchor`, obtained
// by substituting each layer's constraints down to the input and keeping
// the best interval concretization seen along the way.  When `lp` is set
// the fully backsubstituted input expression is additionally concretized
// through the flow-tightening LP.
struct BacksubContext {
    const Network* net = nullptr;
    const std::vector<AbstractElement>* elems = nullptr;
    const std::vector<double>* in_lo = nullptr;
    const std::vector<double>* in_hi = nullptr;
    const std::vector<PlanePair>* planes = nullptr;
    const FlowGraph* graph = nullptr;
    AttackBudget budget;
    bool use_lp = false;
};

// `concretize_at_anchor` uses the anchor layer's own concrete bounds
// (margin expressions; the bounds exist there).  `intermediate_stops`
// additionally keeps the best interval concretization after every
// substitution step (per-neuron bounds); margin expressions skip those so
// the final input-layer form is the one the flow LP sees.
double backsub_lower(const BacksubContext& ctx, int anchor, std::vector<double> anchor_coeffs,
                     double constant, bool concretize_at_anchor, bool intermediate_stops) {
    const Network& net = *ctx.net;
    std::map<int, std::vector<double>> coeffs;
    coeffs.emplace(anchor, std::move(anchor_coeffs));
    std::vector<double> input_coeffs(net.input_size, 0.0);

    auto concretize = [&]() {
        double v = constant;
        for (const auto& [l, c] : coeffs) {
            const AbstractElement& e = (*ctx.elems)[l];
            for (std::size_t k = 0; k < c.size(); ++k) {
                if (c[k] > 0)
                    v += c[k] * e.lo[k];
                else if (c[k] < 0)
                    v += c[k] * e.hi[k];
            }
        }
        for (std::size_t k = 0; k < input_coeffs.size(); ++k) {
            if (input_coeffs[k] > 0)
                v += input_coeffs[k] * (*ctx.in_lo)[k];
            else if (input_coeffs[k] < 0)
                v += input_coeffs[k] * (*ctx.in_hi)[k];
        }
        return v;
    };

    double best = -kInf;
    if (concretize_at_anchor)
        best = std::max(best, concretize());

    for (int l = anchor; l >= 0; --l) {
        auto it = coeffs.find(l);
        if (it == coeffs.end())
            continue;
        std::vector<double> c = std::move(it->second);
        coeffs.erase(it);
        const Layer& layer = net.layers[l];

        auto& prev = [&]() -> std::vector<double>& {
            if (l == 0)
                return input_coeffs;
            auto [pit, inserted] = coeffs.try_emplace(l - 1);
            if (inserted)
                pit->second.assign(net.layers[l - 1].size, 0.0);
            return pit->second;
        }();

        switch (layer.kind) {
        case Layer::Kind::Affine:
            for (int k = 0; k < layer.size; ++k) {
                if (c[k] == 0.0)
                    continue;
                constant += c[k] * layer.map.bias[k];
                for (const auto& [idx, w] : layer.map.rows[k])
                    prev[idx] += c[k] * w;
            }
            break;
        case Layer::Kind::Relu: {
            const std::vector<ReluRelax>& relax = (*ctx.elems)[l].relu;
            for (int k = 0; k < layer.size; ++k) {
                if (c[k] > 0) {
                    prev[k] += c[k] * relax[k].lo_coeff;
                } else if (c[k] < 0) {
                    prev[k] += c[k] * relax[k].up_coeff;
                    constant += c[k] * relax[k].up_const;
                }
            }
            break;
        }
        case Layer::Kind::ResidualAdd: {
            std::vector<double>* other;
            if (layer.from == -1) {
                other = &input_coeffs;
            } else {
                auto [oit, inserted] = coeffs.try_emplace(layer.from);
                if (inserted)
                    oit->second.assign(net.layers[layer.from].size, 0.0);
                other = &oit->second;
            }
            for (int k = 0; k < layer.size; ++k) {
                if (c[k] == 0.0)
                    continue;
                prev[k] += c[k];
                (*other)[k] += c[k];
            }
            break;
        }
        }
        if (intermediate_stops || l == 0)
            best = std::max(best, concretize());
    }

    if (ctx.use_lp) {
        AffineExpr expr;
        expr.constant = constant;
        for (std::size_t k = 0; k < input_coeffs.size(); ++k)
            if (input_coeffs[k] != 0.0)
                expr.terms.emplace_back(static_cast<int>(k), input_coeffs[k]);
        best = std::max(best, tightened_bound(expr, ctx.planes, *ctx.in_lo, *ctx.in_hi,
                                              *ctx.graph, ctx.budget, false));
    }
    return best;
}

ReluRelax relax_for(double lo, double hi) {
    ReluRelax r;
    if (hi <= 0.0) {
        r.lo_coeff = 0.0;
        r.up_coeff = 0.0;
        r.up_const = 0.0;
    } else if (lo >= 0.0) {
        r.lo_coeff = 1.0;
        r.up_coeff = 1.0;
        r.up_const = 0.0;
    } else {
        const double slope = hi / (hi - lo);
        r.up_coeff = slope;
        r.up_const = -slope * lo;
        // lambda tie hi == -lo broken toward 0.
        r.lo_coeff = hi > -lo ? 1.0 : 0.0;
    }
    return r;
}

} // namespace

std::vector<AbstractElement> deeppoly_analyze(const Network& net, const std::vector<double>& in_lo,
                                              const std::vector<double>& in_hi,
                                              const std::vector<PlanePair>* planes,
                                              const FlowGraph* graph, const AttackBudget& budget,
                                              const DeepPolyOptions& opts) {
    if (static_cast<int>(in_lo.size()) != net.input_size ||
        static_cast<int>(in_hi.size()) != net.input_size)
        throw ContractError("deeppoly: bounds do not match the network input");
    std::vector<AbstractElement> elems(net.layers.size());

    BacksubContext ctx;
    ctx.net = &net;
    ctx.elems = &elems;
    ctx.in_lo = &in_lo;
    ctx.in_hi = &in_hi;
    ctx.planes = planes;
    ctx.graph = graph;
    ctx.budget = budget;
    ctx.use_lp = opts.tighten_intermediate && budget.gamma < kInf && planes && graph;

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        AbstractElement& e = elems[l];
        if (layer.kind == Layer::Kind::Relu) {
            const std::vector<double>& plo = l == 0 ? in_lo : elems[l - 1].lo;
            const std::vector<double>& phi = l == 0 ? in_hi : elems[l - 1].hi;
            e.lo.resize(layer.size);
            e.hi.resize(layer.size);
            e.relu.resize(layer.size);
            for (int k = 0; k < layer.size; ++k) {
                e.relu[k] = relax_for(plo[k], phi[k]);
                e.lo[k] = std::max(0.0, plo[k]);
                e.hi[k] = std::max(0.0, phi[k]);
            }
            continue;
        }
        e.lo.resize(layer.size);
        e.hi.resize(layer.size);
        for (int k = 0; k < layer.size; ++k) {
            std::vector<double> unit(layer.size, 0.0);
            unit[k] = 1.0;
            const double lo = backsub_lower(ctx, static_cast<int>(l), unit, 0.0, false, true);
            unit[k] = -1.0;
            const double hi = -backsub_lower(ctx, static_cast<int>(l), unit, 0.0, false, true);
            // The two backsubstitutions round independently and may cross
            // by an ulp on zero-width inputs; min/max keeps both sides valid.
            e.lo[k] = std::min(lo, hi);
            e.hi[k] = std::max(lo, hi);
        }
    }
    return elems;
}

CertificationReport deeppoly_certify(const Network& net, const std::vector<double>& in_lo,
                                     const std::vector<double>& in_hi,
                                     const std::vector<PlanePair>* planes,
                                     const FlowGraph* graph, const AttackBudget& budget,
                                     int label, const DeepPolyOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool with_flow = budget.gamma < kInf;
    if (with_flow && (!planes || !graph))
        throw ContractError("deeppoly_certify: flow constraints require bounding planes");

    std::vector<AbstractElement> elems =
        deeppoly_analyze(net, in_lo, in_hi, planes, graph, budget, opts);

    BacksubContext ctx;
    ctx.net = &net;
    ctx.elems = &elems;
    ctx.in_lo = &in_lo;
    ctx.in_hi = &in_hi;
    ctx.planes = planes;
    ctx.graph = graph;
    ctx.budget = budget;
    ctx.use_lp = with_flow;

    const int outputs = net.output_size();
    if (label < 0 || label >= outputs)
        throw ContractError("deeppoly_certify: label out of range");

    CertificationReport report;
    report.norm = budget.norm;
    report.delta = budget.delta;
    report.gamma = budget.gamma;
    report.method = method_name(Method::DeepPoly, with_flow);
    report.predicted_label = label;
    bool all_positive = true;
    const int anchor = static_cast<int>(net.layers.size()) - 1;
    for (int t = 0; t < outputs; ++t) {
        if (t == label)
            continue;
        std::vector<double> coeff(outputs, 0.0);
        coeff[label] = 1.0;
        coeff[t] = -1.0;
        const double margin = backsub_lower(ctx, anchor, std::move(coeff), 0.0, true, false);
        report.margins[t] = margin;
        all_positive = all_positive && margin > 0.0;
    }
    report.status = all_positive ? "certified" : "unknown";
    report.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace vfcert
