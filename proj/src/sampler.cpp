#include "vfcert/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace vfcert {

using nlohmann::json;

namespace {

double pixel_norm(double dx, double dy, Norm p) {
    switch (p) {
    case Norm::L1:
        return std::abs(dx) + std::abs(dy);
    case Norm::L2:
        return std::hypot(dx, dy);
    default:
        return std::max(std::abs(dx), std::abs(dy));
    }
}

void clip_to_ball(double& dx, double& dy, const AttackBudget& budget) {
    if (budget.norm == Norm::LInf) {
        dx = std::min(budget.delta, std::max(-budget.delta, dx));
        dy = std::min(budget.delta, std::max(-budget.delta, dy));
        return;
    }
    const double norm = pixel_norm(dx, dy, budget.norm);
    if (norm > budget.delta && norm > 0.0) {
        const double s = budget.delta / norm * (1.0 - 1e-15);
        dx *= s;
        dy *= s;
    }
}

void clip_to_image(int i, int j, int W, double& dx, double& dy) {
    dx = std::min(double(W - i), std::max(double(1 - i), dx));
    dy = std::min(double(W - j), std::max(double(1 - j), dy));
}

} // namespace

bool field_admissible(const VectorField& field, const AttackBudget& budget, double flow_tol,
                      double norm_tol) {
    const int W = field.width;
    for (int i = 1; i <= W; ++i) {
        for (int j = 1; j <= W; ++j) {
            const double dx = field.dx_at(i, j);
            const double dy = field.dy_at(i, j);
            if (pixel_norm(dx, dy, budget.norm) > budget.delta + norm_tol)
                return false;
            const double x = i + dx, y = j + dy;
            if (x < 1.0 - norm_tol || x > W + norm_tol || y < 1.0 - norm_tol || y > W + norm_tol)
                return false;
        }
    }
    if (budget.gamma < kInf) {
        auto flow_ok = [&](int i1, int j1, int i2, int j2) {
            return std::abs(field.dx_at(i1, j1) - field.dx_at(i2, j2)) <= budget.gamma + flow_tol &&
                   std::abs(field.dy_at(i1, j1) - field.dy_at(i2, j2)) <= budget.gamma + flow_tol;
        };
        for (int i = 1; i <= W; ++i) {
            for (int j = 1; j <= W; ++j) {
                if (j + 1 <= W && !flow_ok(i, j, i, j + 1))
                    return false;
                if (i + 1 <= W && !flow_ok(i, j, i + 1, j))
                    return false;
            }
        }
    }
    return true;
}

VectorField sample_field(int width, const AttackBudget& budget, CounterRng rng,
                         int projection_cap) {
    VectorField field(width);
    // Flow 0 forces a constant field; combined with the in-image rule the
    // only constant field on a full grid is zero.
    if (budget.delta == 0.0 || budget.gamma == 0.0)
        return field;

    for (int i = 1; i <= width; ++i) {
        for (int j = 1; j <= width; ++j) {
            double dx = 0.0, dy = 0.0;
            switch (budget.norm) {
            case Norm::LInf:
                dx = (2.0 * rng.next_double() - 1.0) * budget.delta;
                dy = (2.0 * rng.next_double() - 1.0) * budget.delta;
                break;
            case Norm::L2: {
                const double r = budget.delta * std::sqrt(rng.next_double());
                const double th = 2.0 * M_PI * rng.next_double();
                dx = r * std::cos(th);
                dy = r * std::sin(th);
                break;
            }
            case Norm::L1: {
                double a = rng.next_double();
                double b = rng.next_double();
                if (a + b > 1.0) {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                dx = (rng.next_double() < 0.5 ? -a : a) * budget.delta;
                dy = (rng.next_double() < 0.5 ? -b : b) * budget.delta;
                break;
            }
            }
            clip_to_image(i, j, width, dx, dy);
            field.dx_at(i, j) = dx;
            field.dy_at(i, j) = dy;
        }
    }
    if (budget.gamma == kInf)
        return field;

    auto project_edges = [&](std::vector<double>& comp) {
        auto relax = [&](std::size_t a, std::size_t b) {
            const double diff = comp[a] - comp[b];
            if (std::abs(diff) > budget.gamma) {
                const double shift = std::copysign((std::abs(diff) - budget.gamma) * 0.5, diff);
                comp[a] -= shift;
                comp[b] += shift;
            }
        };
        for (int i = 0; i < width; ++i) {
            for (int j = 0; j < width; ++j) {
                const std::size_t p = static_cast<std::size_t>(i) * width + j;
                if (j + 1 < width)
                    relax(p, p + 1);
                if (i + 1 < width)
                    relax(p, p + width);
            }
        }
    };

    for (int iter = 0; iter < projection_cap; ++iter) {
        project_edges(field.dx);
        project_edges(field.dy);
        for (int i = 1; i <= width; ++i) {
            for (int j = 1; j <= width; ++j) {
                double dx = field.dx_at(i, j);
                double dy = field.dy_at(i, j);
                clip_to_ball(dx, dy, budget);
                clip_to_image(i, j, width, dx, dy);
                field.dx_at(i, j) = dx;
                field.dy_at(i, j) = dy;
            }
        }
        if (field_admissible(field, budget))
            return field;
    }
    // Shrink toward the zero field, which satisfies every constraint.
    for (int halving = 0; halving < 80; ++halving) {
        for (double& v : field.dx)
            v *= 0.5;
        for (double& v : field.dy)
            v *= 0.5;
        if (field_admissible(field, budget))
            return field;
    }
    return VectorField(width);
}

std::optional<std::pair<VectorField, int>> random_attack(const Network& net, const Image& image,
                                                         const AttackBudget& budget, int label,
                                                         int tries, CounterRng rng) {
    for (int t = 0; t < tries; ++t) {
        VectorField field = sample_field(image.width(), budget, rng.derive(t));
        const std::vector<double> logits = forward(net, deform(image, field));
        const int pred = argmax_label(logits);
        if (pred != label)
            return std::make_pair(std::move(field), pred);
    }
    return std::nullopt;
}

CoverageReport estimate_coverage(const Image& image, const AttackBudget& budget, int samples,
                                 CounterRng rng) {
    if (samples < 2)
        throw ArgumentError("estimate_coverage: need at least 2 samples");
    const int W = image.width();
    const int C = image.channels();
    CoverageReport report;
    report.certified = bounds_map(image, budget);
    report.sampled = PixelBounds(W, C);
    std::fill(report.sampled.lo.begin(), report.sampled.lo.end(), kInf);
    std::fill(report.sampled.hi.begin(), report.sampled.hi.end(), -kInf);

    for (int s = 0; s < samples; ++s) {
        const VectorField field = sample_field(W, budget, rng.derive(s));
        const Image deformed = deform(image, field);
        for (std::size_t k = 0; k < deformed.data().size(); ++k) {
            report.sampled.lo[k] = std::min(report.sampled.lo[k], deformed.data()[k]);
            report.sampled.hi[k] = std::max(report.sampled.hi[k], deformed.data()[k]);
        }
    }

    double total = 0.0;
    for (std::size_t k = 0; k < report.sampled.lo.size(); ++k) {
        const double l = report.certified.lo[k], u = report.certified.hi[k];
        const double sl = report.sampled.lo[k], su = report.sampled.hi[k];
        if (sl < l - 1e-12 || su > u + 1e-12) {
            std::ostringstream oss;
            oss << "estimate_coverage: sampled value escaped the certified bounds at entry " << k
                << " ([" << sl << ", " << su << "] vs [" << l << ", " << u << "])";
            throw Error(oss.str());
        }
        total += u > l ? (su - sl) / (u - l) : 1.0;
    }
    report.coverage = total / static_cast<double>(report.sampled.lo.size());
    return report;
}

std::string field_to_json_text(const VectorField& field) {
    json doc = {{"w", field.width}, {"dx", field.dx}, {"dy", field.dy}};
    return doc.dump();
}

VectorField field_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("field json: parse error: ") + e.what());
    }
    if (!doc.contains("w") || !doc.contains("dx") || !doc.contains("dy"))
        throw FormatError("field json: expected w/dx/dy");
    VectorField field(doc["w"].get<int>());
    std::vector<double> dx = doc["dx"].get<std::vector<double>>();
    std::vector<double> dy = doc["dy"].get<std::vector<double>>();
    if (dx.size() != field.dx.size() || dy.size() != field.dy.size())
        throw FormatError("field json: array lengths do not match width");
    field.dx = std::move(dx);
    field.dy = std::move(dy);
    return field;
}

std::string coverage_to_json_text(const CoverageReport& report) {
    json doc = {{"width", report.certified.width}, {"channels", report.certified.channels},
                {"s_l", report.sampled.lo},        {"s_u", report.sampled.hi},
                {"l", report.certified.lo},        {"u", report.certified.hi},
                {"coverage", report.coverage}};
    return doc.dump();
}

} // namespace vfcert
