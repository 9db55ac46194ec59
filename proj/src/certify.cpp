#include "vfcert/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "vfcert/sampler.hpp"

namespace vfcert {

using nlohmann::json;

Method parse_method(const std::string& s) {
    if (s == "interval")
        return Method::Interval;
    if (s == "deeppoly")
        return Method::DeepPoly;
    if (s == "milp")
        return Method::Milp;
    throw ArgumentError("unknown method '" + s + "' (expected interval, deeppoly or milp)");
}

std::string method_name(Method m, bool with_flow) {
    switch (m) {
    case Method::Interval:
        return "interval";
    case Method::DeepPoly:
        return with_flow ? "deeppoly+flow" : "deeppoly";
    default:
        return with_flow ? "milp+flow" : "milp";
    }
}

std::optional<VectorField> decode_input_point(const Image& image, const AttackBudget& budget,
                                              const std::vector<double>& targets) {
    if (image.channels() != 1)
        return std::nullopt;
    const int W = image.width();
    if (static_cast<int>(targets.size()) != W * W)
        return std::nullopt;
    VectorField field(W);
    std::vector<double> lo, hi;
    for (int i = 1; i <= W; ++i) {
        for (int j = 1; j <= W; ++j) {
            pixel_interval(image, i, j, budget, lo, hi);
            const double target = std::min(hi[0], std::max(lo[0], targets[field.index(i, j)]));
            const std::array<double, 2> dmin = extremal_witness(image, i, j, budget, false);
            const std::array<double, 2> dmax = extremal_witness(image, i, j, budget, true);
            // Bisect along the segment between the extremal witnesses; the
            // interpolant is continuous and the ball is convex, so the
            // segment stays admissible and brackets the target.
            double t0 = 0.0, t1 = 1.0;
            double f0 = lo[0];
            auto eval_at = [&](double t) {
                const double x = i + dmin[0] + t * (dmax[0] - dmin[0]);
                const double y = j + dmin[1] + t * (dmax[1] - dmin[1]);
                return interpolate(image, x, y)[0];
            };
            for (int it = 0; it < 100; ++it) {
                const double tm = 0.5 * (t0 + t1);
                const double fm = eval_at(tm);
                if ((f0 - target) * (fm - target) <= 0.0) {
                    t1 = tm;
                } else {
                    t0 = tm;
                    f0 = fm;
                }
            }
            const double t = 0.5 * (t0 + t1);
            field.dx_at(i, j) = dmin[0] + t * (dmax[0] - dmin[0]);
            field.dy_at(i, j) = dmin[1] + t * (dmax[1] - dmin[1]);
        }
    }
    return field;
}

CertificationReport certify_image(const Network& net, const Image& image,
                                  const AttackBudget& budget, Method method, double timeout_s,
                                  int threads, const PixelBounds* bounds_override,
                                  const BoundingPlanes* planes_override) {
    const auto t0 = std::chrono::steady_clock::now();
    const int W = image.width();
    const int C = image.channels();
    if (net.input_size != W * W * C)
        throw ContractError("certify_image: network input size does not match the image");

    const std::vector<double> logits = forward(net, image);
    const int label = argmax_label(logits);

    PixelBounds bounds = bounds_override ? *bounds_override : bounds_map(image, budget, threads);
    const bool with_flow = budget.gamma < kInf;

    std::vector<PlanePair> plane_entries;
    FlowGraph graph;
    const std::vector<PlanePair>* planes = nullptr;
    const FlowGraph* graph_ptr = nullptr;
    if (with_flow && method != Method::Interval) {
        if (planes_override)
            plane_entries = planes_override->entries;
        else
            plane_entries = fit_all_planes(image, budget.delta, threads).entries;
        planes = &plane_entries;
        graph = FlowGraph::grid(W, C);
        graph_ptr = &graph;
    }

    CertificationReport report;
    switch (method) {
    case Method::Interval: {
        auto [out_lo, out_hi] = interval_propagate(net, bounds);
        report.norm = budget.norm;
        report.delta = budget.delta;
        report.gamma = budget.gamma;
        report.method = method_name(Method::Interval, false);
        report.predicted_label = label;
        bool all_positive = true;
        for (int t = 0; t < net.output_size(); ++t) {
            if (t == label)
                continue;
            const double margin = out_lo[label] - out_hi[t];
            report.margins[t] = margin;
            all_positive = all_positive && margin > 0.0;
        }
        report.status = all_positive ? "certified" : "unknown";
        break;
    }
    case Method::DeepPoly:
        report = deeppoly_certify(net, bounds.lo, bounds.hi, planes, graph_ptr, budget, label);
        break;
    case Method::Milp:
        report = milp_certify(net, bounds.lo, bounds.hi, planes, graph_ptr, budget, label,
                              timeout_s, &image, &logits);
        break;
    }
    report.predicted_label = label;
    report.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string report_to_json_text(const CertificationReport& r) {
    json margins = json::object();
    for (const auto& [t, v] : r.margins)
        margins[std::to_string(t)] = v;
    json doc = {{"image", r.image_id},
                {"norm", norm_name(r.norm)},
                {"delta", r.delta},
                {"gamma", r.gamma == kInf ? json("inf") : json(r.gamma)},
                {"method", r.method},
                {"label", r.predicted_label},
                {"status", r.status},
                {"margins", std::move(margins)},
                {"time_s", r.time_s}};
    if (r.witness) {
        doc["witness"] = {{"w", r.witness->width}, {"dx", r.witness->dx}, {"dy", r.witness->dy}};
        doc["adv_label"] = r.adversarial_label;
    }
    if (!r.note.empty())
        doc["note"] = r.note;
    return doc.dump();
}

CertificationReport report_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("report json: parse error: ") + e.what());
    }
    CertificationReport r;
    r.image_id = doc.value("image", std::string());
    r.norm = parse_norm(doc["norm"].get<std::string>());
    r.delta = doc["delta"].get<double>();
    r.gamma = doc["gamma"].is_string() ? kInf : doc["gamma"].get<double>();
    r.method = doc["method"].get<std::string>();
    r.predicted_label = doc.value("label", -1);
    r.status = doc["status"].get<std::string>();
    for (const auto& [key, value] : doc["margins"].items())
        r.margins[std::stoi(key)] = value.get<double>();
    r.time_s = doc.value("time_s", 0.0);
    if (doc.contains("witness")) {
        VectorField field(doc["witness"]["w"].get<int>());
        field.dx = doc["witness"]["dx"].get<std::vector<double>>();
        field.dy = doc["witness"]["dy"].get<std::vector<double>>();
        r.witness = std::move(field);
        r.adversarial_label = doc.value("adv_label", -1);
    }
    r.note = doc.value("note", std::string());
    return r;
}

} // namespace vfcert
