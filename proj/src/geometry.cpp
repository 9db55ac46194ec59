#include "vfcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vfcert/quartic.hpp"

namespace vfcert {

using nlohmann::json;

Norm parse_norm(const std::string& s) {
    if (s == "1")
        return Norm::L1;
    if (s == "2")
        return Norm::L2;
    if (s == "inf" || s == "Inf" || s == "INF")
        return Norm::LInf;
    throw ArgumentError("unknown norm '" + s + "' (expected 1, 2 or inf)");
}

std::string norm_name(Norm p) {
    switch (p) {
    case Norm::L1:
        return "1";
    case Norm::L2:
        return "2";
    default:
        return "inf";
    }
}

namespace {

// Local displacement box of region A_mn around pixel (i, j).
struct LocalBox {
    double x0, x1, y0, y1;
};

LocalBox local_box(int i, int j, int m, int n) {
    return {double(m - i), double(m + 1 - i), double(n - j), double(n + 1 - j)};
}

double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

bool in_box(const LocalBox& b, double x, double y, double tol = 0.0) {
    return x >= b.x0 - tol && x <= b.x1 + tol && y >= b.y0 - tol && y <= b.y1 + tol;
}

void clamp_into_box(const LocalBox& b, double& x, double& y) {
    x = clampd(x, b.x0, b.x1);
    y = clampd(y, b.y0, b.y1);
}

double box_distance(const LocalBox& b, Norm p) {
    const double dx = std::max({b.x0, -b.x1, 0.0});
    const double dy = std::max({b.y0, -b.y1, 0.0});
    switch (p) {
    case Norm::L1:
        return dx + dy;
    case Norm::L2:
        return std::hypot(dx, dy);
    default:
        return std::max(dx, dy);
    }
}

void emit(std::vector<Candidate>& out, const LocalBox& b, int i, int j, int m, int n,
          double x, double y, double pad = 0.0) {
    clamp_into_box(b, x, y);
    out.push_back({i + x, j + y, m, n, pad});
}

// ---- T_inf: rectangle intersection, vertices only ------------------------

void collect_inf(std::vector<Candidate>& out, int i, int j, double delta, int m, int n) {
    const LocalBox b = local_box(i, j, m, n);
    const double x0 = std::max(-delta, b.x0), x1 = std::min(delta, b.x1);
    const double y0 = std::max(-delta, b.y0), y1 = std::min(delta, b.y1);
    if (x0 > x1 || y0 > y1)
        return;
    emit(out, b, i, j, m, n, x0, y0);
    emit(out, b, i, j, m, n, x1, y0);
    emit(out, b, i, j, m, n, x0, y1);
    emit(out, b, i, j, m, n, x1, y1);
}

// ---- T_1: diamond intersection --------------------------------------------

void collect_l1(std::vector<Candidate>& out, int i, int j, double delta, int m, int n,
                const RegionCoeffs& coeffs) {
    const LocalBox b = local_box(i, j, m, n);
    if (box_distance(b, Norm::L1) > delta)
        return;

    // Closest box point to the ball center; guarantees a nonempty set.
    {
        const double px = clampd(0.0, b.x0, b.x1);
        const double py = clampd(0.0, b.y0, b.y1);
        if (std::abs(px) + std::abs(py) <= delta)
            emit(out, b, i, j, m, n, px, py);
    }

    // Box edges clipped by |x| + |y| <= delta; the interpolant is linear
    // along them, so endpoints suffice.
    auto vertical = [&](double x) {
        if (x < b.x0 || x > b.x1)
            return;
        const double r = delta - std::abs(x);
        if (r < 0)
            return;
        const double lo = std::max(b.y0, -r), hi = std::min(b.y1, r);
        if (lo > hi)
            return;
        emit(out, b, i, j, m, n, x, lo);
        emit(out, b, i, j, m, n, x, hi);
    };
    auto horizontal = [&](double y) {
        if (y < b.y0 || y > b.y1)
            return;
        const double r = delta - std::abs(y);
        if (r < 0)
            return;
        const double lo = std::max(b.x0, -r), hi = std::min(b.x1, r);
        if (lo > hi)
            return;
        emit(out, b, i, j, m, n, lo, y);
        emit(out, b, i, j, m, n, hi, y);
    };
    vertical(b.x0);
    vertical(b.x1);
    horizontal(b.y0);
    horizontal(b.y1);

    // Diagonal diamond edges y = s*x + a: endpoints of the clipped segment
    // plus the stationary point of the degree-2 restriction.
    struct Diag {
        double s, a, xlo, xhi;
    };
    const Diag diags[4] = {{-1.0, delta, 0.0, delta},
                           {+1.0, delta, -delta, 0.0},
                           {-1.0, -delta, -delta, 0.0},
                           {+1.0, -delta, 0.0, delta}};
    for (const Diag& dg : diags) {
        double lo = std::max(dg.xlo, b.x0);
        double hi = std::min(dg.xhi, b.x1);
        // y-range of the box translated onto the line parameter.
        if (dg.s > 0) {
            lo = std::max(lo, b.y0 - dg.a);
            hi = std::min(hi, b.y1 - dg.a);
        } else {
            lo = std::max(lo, dg.a - b.y1);
            hi = std::min(hi, dg.a - b.y0);
        }
        if (lo > hi)
            continue;
        emit(out, b, i, j, m, n, lo, dg.s * lo + dg.a);
        emit(out, b, i, j, m, n, hi, dg.s * hi + dg.a);
        // Restriction f(x) = const + (Bc + s*Cc + Dc*a) x + s*Dc x^2 in
        // pixel-centered coefficients; stationary where the derivative
        // vanishes.
        for (int c = 0; c < coeffs.channels(); ++c) {
            double bx, cy, d;
            coeffs.centered(c, i, j, bx, cy, d);
            if (d == 0.0)
                continue;
            const double xs = -(bx + dg.s * cy + d * dg.a) / (2.0 * dg.s * d);
            if (xs >= lo && xs <= hi)
                emit(out, b, i, j, m, n, xs, dg.s * xs + dg.a);
        }
    }
}

// ---- T_2: disc intersection ------------------------------------------------

// Derivative of the interpolant along the circle of radius delta, in
// pixel-centered coefficients: g(theta) = d/dtheta I(delta cos, delta sin).
struct ArcFunc {
    double bx, cy, d, delta;

    double g(double th) const {
        return delta * (-bx * std::sin(th) + cy * std::cos(th)) +
               d * delta * delta * std::cos(2.0 * th);
    }
    double gprime(double th) const {
        return delta * (-bx * std::cos(th) - cy * std::sin(th)) -
               2.0 * d * delta * delta * std::sin(2.0 * th);
    }
    // Newton-polish a stationary-angle guess; returns the polished angle.
    double polish(double th) const {
        for (int it = 0; it < 50; ++it) {
            const double f = g(th);
            const double df = gprime(th);
            if (f == 0.0 || std::abs(df) < 1e-300)
                break;
            const double step = f / df;
            th -= step;
            if (std::abs(step) <= 1e-15)
                break;
        }
        return th;
    }
};

void collect_l2(std::vector<Candidate>& out, int i, int j, double delta, int m, int n,
                const RegionCoeffs& coeffs) {
    const LocalBox b = local_box(i, j, m, n);
    if (box_distance(b, Norm::L2) > delta)
        return;
    const double d2 = delta * delta;

    {
        const double px = clampd(0.0, b.x0, b.x1);
        const double py = clampd(0.0, b.y0, b.y1);
        if (px * px + py * py <= d2)
            emit(out, b, i, j, m, n, px, py);
    }

    // Straight edges of the intersection: box edges clipped by the disc.
    auto vertical = [&](double x) {
        if (x < b.x0 || x > b.x1 || x * x > d2)
            return;
        const double r = std::sqrt(std::max(0.0, d2 - x * x));
        const double lo = std::max(b.y0, -r), hi = std::min(b.y1, r);
        if (lo > hi)
            return;
        emit(out, b, i, j, m, n, x, lo);
        emit(out, b, i, j, m, n, x, hi);
    };
    auto horizontal = [&](double y) {
        if (y < b.y0 || y > b.y1 || y * y > d2)
            return;
        const double r = std::sqrt(std::max(0.0, d2 - y * y));
        const double lo = std::max(b.x0, -r), hi = std::min(b.x1, r);
        if (lo > hi)
            return;
        emit(out, b, i, j, m, n, lo, y);
        emit(out, b, i, j, m, n, hi, y);
    };
    vertical(b.x0);
    vertical(b.x1);
    horizontal(b.y0);
    horizontal(b.y1);

    // Axis extremes of the ball; cheap and removes the v=0 / w=0 edge case
    // of the stationarity derivation.
    const double axis[4][2] = {{delta, 0.0}, {-delta, 0.0}, {0.0, delta}, {0.0, -delta}};
    for (const auto& p : axis)
        if (in_box(b, p[0], p[1]))
            emit(out, b, i, j, m, n, p[0], p[1]);

    if (delta == 0.0)
        return;

    // Stationary points on the arc, per channel.
    for (int c = 0; c < coeffs.channels(); ++c) {
        double bx, cy, d;
        coeffs.centered(c, i, j, bx, cy, d);
        const double r = std::hypot(bx, cy);
        const ArcFunc arc{bx, cy, d, delta};

        auto push_angle = [&](double th) {
            th = arc.polish(th);
            const double scale = delta * r + std::abs(d) * d2 + 1.0;
            if (std::abs(arc.g(th)) > 1e-7 * scale)
                return;
            const double x = delta * std::cos(th);
            const double y = delta * std::sin(th);
            if (!in_box(b, x, y, 1e-12))
                return;
            emit(out, b, i, j, m, n, x, y);
            // Root-finding soundness pad: widen the accepted coordinate by
            // +-1e-9 along the arc (expressed on the x coordinate).
            for (double e : {-1e-9, 1e-9}) {
                const double xv = clampd(x + e, -delta, delta);
                const double yv = std::copysign(std::sqrt(std::max(0.0, d2 - xv * xv)), y);
                if (in_box(b, xv, yv, 1e-12))
                    emit(out, b, i, j, m, n, xv, yv);
            }
        };

        if (d == 0.0 && r == 0.0)
            continue; // constant on the circle
        if (r <= 1e-14 * std::abs(d) * delta) {
            // Pure saddle term: extrema at odd multiples of pi/4.
            for (int k = 0; k < 4; ++k)
                push_angle(M_PI * 0.25 + k * M_PI * 0.5);
            continue;
        }
        if (std::abs(d) * delta <= 0.2 * r) {
            // Near-linear regime: exactly two stationary angles, reached by
            // polishing from the d == 0 solution and its antipode.
            const double th0 = std::atan2(cy, bx);
            push_angle(th0);
            push_angle(th0 + M_PI);
            continue;
        }

        // Quartic regime.  Stationarity y(bx + d*y) = x(cy + d*x) on
        // x^2 + y^2 = delta^2 reduces to a degree-4 polynomial in x; solved
        // in a d^2-scaled form so no coefficient divides by d.
        const double J = d * d * d2 * d2 - bx * bx * d2;
        const double K = -2.0 * cy * d * d2;
        const double L = bx * bx + cy * cy - 4.0 * d * d * d2;
        const double M = 4.0 * d * cy;
        const double N = 4.0 * d * d;
        std::vector<double> roots;
        bool solved = true;
        try {
            roots = quartic_real_roots(J, K, L, M, N);
        } catch (const SolverError& e) {
            solved = false;
            std::cerr << "warning: T2 arc root finding failed (" << e.what()
                      << "); falling back to dense arc sampling\n";
        }
        if (solved) {
            for (double v : roots) {
                if (std::abs(v) > delta * (1.0 + 1e-9))
                    continue;
                const double xv = clampd(v, -delta, delta);
                const double yabs = std::sqrt(std::max(0.0, d2 - xv * xv));
                for (double ys : {yabs, -yabs}) {
                    push_angle(std::atan2(ys, xv));
                    if (yabs == 0.0)
                        break;
                }
            }
        } else {
            // Sound fallback: dense sampling widened by the Lipschitz bound
            // of the restriction times the angular step.
            const int samples = 4096;
            const double step = 2.0 * M_PI / samples;
            double lip = 0.0;
            for (int ch = 0; ch < coeffs.channels(); ++ch) {
                double bb, cc, dd;
                coeffs.centered(ch, i, j, bb, cc, dd);
                lip = std::max(lip, delta * std::hypot(bb, cc) + std::abs(dd) * d2);
            }
            const double pad = lip * step;
            for (int k = 0; k < samples; ++k) {
                const double th = k * step;
                const double x = delta * std::cos(th);
                const double y = delta * std::sin(th);
                if (in_box(b, x, y))
                    emit(out, b, i, j, m, n, x, y, pad);
            }
            break; // samples already cover every channel
        }
    }
}

void collect_region(std::vector<Candidate>& out, int i, int j, const AttackBudget& budget,
                    const RegionCoeffs& coeffs) {
    switch (budget.norm) {
    case Norm::LInf:
        collect_inf(out, i, j, budget.delta, coeffs.m, coeffs.n);
        break;
    case Norm::L1:
        collect_l1(out, i, j, budget.delta, coeffs.m, coeffs.n, coeffs);
        break;
    case Norm::L2:
        collect_l2(out, i, j, budget.delta, coeffs.m, coeffs.n, coeffs);
        break;
    }
}

} // namespace

std::vector<std::pair<int, int>> reachable_regions(int i, int j, int width,
                                                   const AttackBudget& budget) {
    if (i < 1 || i > width || j < 1 || j > width)
        throw ArgumentError("pixel out of grid");
    std::vector<std::pair<int, int>> regions;
    const double delta = budget.delta;
    const int mlo = std::max(1, static_cast<int>(std::ceil(i - delta - 1.0)));
    const int mhi = std::min(width - 1, static_cast<int>(std::floor(i + delta)));
    const int nlo = std::max(1, static_cast<int>(std::ceil(j - delta - 1.0)));
    const int nhi = std::min(width - 1, static_cast<int>(std::floor(j + delta)));
    for (int m = mlo; m <= mhi; ++m) {
        for (int n = nlo; n <= nhi; ++n) {
            if (box_distance(local_box(i, j, m, n), budget.norm) <= delta)
                regions.emplace_back(m, n);
        }
    }
    return regions;
}

std::vector<std::array<double, 2>> candidates_inf(int i, int j, double delta, int m, int n,
                                                  const RegionCoeffs& coeffs) {
    std::vector<Candidate> pts;
    collect_inf(pts, i, j, delta, m, n);
    (void)coeffs;
    std::vector<std::array<double, 2>> out;
    for (const Candidate& c : pts)
        out.push_back({c.x, c.y});
    return out;
}

std::vector<std::array<double, 2>> candidates_l1(int i, int j, double delta, int m, int n,
                                                 const RegionCoeffs& coeffs) {
    std::vector<Candidate> pts;
    collect_l1(pts, i, j, delta, m, n, coeffs);
    std::vector<std::array<double, 2>> out;
    for (const Candidate& c : pts)
        out.push_back({c.x, c.y});
    return out;
}

std::vector<Candidate> candidates_l2(int i, int j, double delta, int m, int n,
                                     const RegionCoeffs& coeffs) {
    std::vector<Candidate> pts;
    collect_l2(pts, i, j, delta, m, n, coeffs);
    return pts;
}

CandidateSet candidate_set(const Image& image, int i, int j, const AttackBudget& budget) {
    CandidateSet set;
    set.i = i;
    set.j = j;
    for (auto [m, n] : reachable_regions(i, j, image.width(), budget)) {
        const RegionCoeffs coeffs = region_coeffs(image, m, n);
        collect_region(set.pts, i, j, budget, coeffs);
    }
    return set;
}

namespace {

void pixel_interval_cached(const Image& image, int i, int j, const AttackBudget& budget,
                           const std::vector<RegionCoeffs>& cache, double* lo, double* hi) {
    const int C = image.channels();
    for (int c = 0; c < C; ++c) {
        lo[c] = kInf;
        hi[c] = -kInf;
    }
    std::vector<Candidate> pts;
    for (auto [m, n] : reachable_regions(i, j, image.width(), budget)) {
        const RegionCoeffs& coeffs = cache[static_cast<std::size_t>(m - 1) * (image.width() - 1) + (n - 1)];
        pts.clear();
        collect_region(pts, i, j, budget, coeffs);
        for (const Candidate& cand : pts) {
            for (int c = 0; c < C; ++c) {
                const double v = coeffs.eval(c, cand.x, cand.y);
                lo[c] = std::min(lo[c], v - cand.pad);
                hi[c] = std::max(hi[c], v + cand.pad);
            }
        }
    }
}

std::vector<RegionCoeffs> build_region_cache(const Image& image) {
    const int W = image.width();
    std::vector<RegionCoeffs> cache;
    cache.reserve(static_cast<std::size_t>(W - 1) * (W - 1));
    for (int m = 1; m <= W - 1; ++m)
        for (int n = 1; n <= W - 1; ++n)
            cache.push_back(region_coeffs(image, m, n));
    return cache;
}

} // namespace

void pixel_interval(const Image& image, int i, int j, const AttackBudget& budget,
                    std::vector<double>& lo, std::vector<double>& hi) {
    if (image.width() < 2)
        throw ArgumentError("pixel bounds need at least a 2x2 image");
    if (!image.in_grid(i, j))
        throw ArgumentError("pixel out of grid");
    const int C = image.channels();
    lo.assign(C, 0.0);
    hi.assign(C, 0.0);
    std::vector<RegionCoeffs> cache = build_region_cache(image);
    pixel_interval_cached(image, i, j, budget, cache, lo.data(), hi.data());
}

PixelBounds bounds_map(const Image& image, const AttackBudget& budget, int threads) {
    const int W = image.width();
    if (W < 2)
        throw ArgumentError("pixel bounds need at least a 2x2 image");
    const int C = image.channels();
    PixelBounds bounds(W, C);
    const std::vector<RegionCoeffs> cache = build_region_cache(image);

    auto run = [&](int row_begin, int row_end) {
        for (int i = row_begin; i <= row_end; ++i)
            for (int j = 1; j <= W; ++j)
                pixel_interval_cached(image, i, j, budget, cache,
                                      &bounds.lo[bounds.index(i, j, 0)],
                                      &bounds.hi[bounds.index(i, j, 0)]);
    };

    if (threads <= 1 || W < 2 * threads) {
        run(1, W);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (W + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo_row = 1 + t * chunk;
            const int hi_row = std::min(W, lo_row + chunk - 1);
            if (lo_row > hi_row)
                break;
            pool.emplace_back(run, lo_row, hi_row);
        }
        for (auto& th : pool)
            th.join();
    }
    return bounds;
}

std::array<double, 2> extremal_witness(const Image& image, int i, int j,
                                       const AttackBudget& budget, bool maximize) {
    if (image.channels() != 1)
        throw ArgumentError("extremal_witness: only single-channel images are supported");
    if (!image.in_grid(i, j))
        throw ArgumentError("pixel out of grid");

    double best_val = maximize ? -kInf : kInf;
    Candidate best{double(i), double(j), 0, 0, 0.0};
    std::vector<Candidate> pts;
    for (auto [m, n] : reachable_regions(i, j, image.width(), budget)) {
        const RegionCoeffs coeffs = region_coeffs(image, m, n);
        pts.clear();
        collect_region(pts, i, j, budget, coeffs);
        for (const Candidate& cand : pts) {
            const double v = coeffs.eval(0, cand.x, cand.y);
            if ((maximize && v > best_val) || (!maximize && v < best_val)) {
                best_val = v;
                best = cand;
            }
        }
    }

    double dx = best.x - i;
    double dy = best.y - j;
    // Guard against rounding pushing the witness marginally outside the ball.
    switch (budget.norm) {
    case Norm::LInf:
        dx = clampd(dx, -budget.delta, budget.delta);
        dy = clampd(dy, -budget.delta, budget.delta);
        break;
    case Norm::L1: {
        const double norm = std::abs(dx) + std::abs(dy);
        if (norm > budget.delta && norm > 0.0) {
            const double s = budget.delta / norm * (1.0 - 1e-15);
            dx *= s;
            dy *= s;
        }
        break;
    }
    case Norm::L2: {
        const double norm = std::hypot(dx, dy);
        if (norm > budget.delta && norm > 0.0) {
            const double s = budget.delta / norm * (1.0 - 1e-15);
            dx *= s;
            dy *= s;
        }
        break;
    }
    }
    return {dx, dy};
}

// ---------------------------------------------------------------------------
// PixelBounds JSON

std::string bounds_to_json_text(const PixelBounds& b) {
    json doc = {{"width", b.width}, {"channels", b.channels}, {"l", b.lo}, {"u", b.hi}};
    return doc.dump();
}

PixelBounds bounds_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bounds json: parse error: ") + e.what());
    }
    if (!doc.contains("width") || !doc.contains("channels") || !doc.contains("l") || !doc.contains("u"))
        throw FormatError("bounds json: expected width/channels/l/u");
    PixelBounds b(doc["width"].get<int>(), doc["channels"].get<int>());
    std::vector<double> lo = doc["l"].get<std::vector<double>>();
    std::vector<double> hi = doc["u"].get<std::vector<double>>();
    if (lo.size() != b.lo.size() || hi.size() != b.hi.size())
        throw FormatError("bounds json: array lengths do not match width/channels");
    b.lo = std::move(lo);
    b.hi = std::move(hi);
    return b;
}

void save_bounds_json(const PixelBounds& b, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw FormatError("bounds json: cannot open " + path + " for writing");
    out << bounds_to_json_text(b) << "\n";
}

PixelBounds load_bounds_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("bounds json: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return bounds_from_json_text(buf.str());
}

} // namespace vfcert
