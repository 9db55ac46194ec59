#include "vfcert/planes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace vfcert {

using nlohmann::json;

FlowGraph FlowGraph::grid(int width, int channels) {
    FlowGraph g;
    g.num_pixels = width * width;
    g.pixel_of_input.resize(static_cast<std::size_t>(width) * width * channels);
    for (int i = 0; i < width; ++i)
        for (int j = 0; j < width; ++j)
            for (int c = 0; c < channels; ++c)
                g.pixel_of_input[(static_cast<std::size_t>(i) * width + j) * channels + c] =
                    i * width + j;
    for (int i = 0; i < width; ++i) {
        for (int j = 0; j < width; ++j) {
            const int p = i * width + j;
            if (j + 1 < width)
                g.edges.emplace_back(p, p + 1);
            if (i + 1 < width)
                g.edges.emplace_back(p, p + width);
        }
    }
    return g;
}

FlowGraph FlowGraph::line(int n, int channels) {
    FlowGraph g;
    g.num_pixels = n;
    g.pixel_of_input.resize(static_cast<std::size_t>(n) * channels);
    for (int p = 0; p < n; ++p)
        for (int c = 0; c < channels; ++c)
            g.pixel_of_input[static_cast<std::size_t>(p) * channels + c] = p;
    for (int p = 0; p + 1 < n; ++p)
        g.edges.emplace_back(p, p + 1);
    return g;
}

PlanePair repair_plane(PlanePair plane, const std::vector<std::array<double, 2>>& offsets,
                       const std::vector<double>& values) {
    for (int pass = 0; pass < 16; ++pass) {
        double lo_viol = 0.0, up_viol = 0.0;
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            lo_viol = std::max(lo_viol, plane.lower(offsets[k][0], offsets[k][1]) - values[k]);
            up_viol = std::max(up_viol, values[k] - plane.upper(offsets[k][0], offsets[k][1]));
        }
        if (lo_viol <= 0.0 && up_viol <= 0.0)
            break;
        if (lo_viol > 0.0)
            plane.lo0 = std::nexttoward(plane.lo0 - lo_viol, -kInf);
        if (up_viol > 0.0)
            plane.up0 = std::nexttoward(plane.up0 + up_viol, kInf);
    }
    return plane;
}

namespace {

// One-sided plane fit: maximize the summed plane value subject to
// plane(p,q) <= value (lower plane) or the mirrored problem (upper plane).
PlanePair fit_channel(const std::vector<std::array<double, 2>>& offsets,
                      const std::vector<double>& values) {
    const std::size_t K = offsets.size();
    double sx = 0.0, sy = 0.0;
    for (const auto& o : offsets) {
        sx += o[0];
        sy += o[1];
    }

    auto solve_side = [&](bool lower_side) {
        LinearProgram lp;
        lp.sense = Sense::Minimize;
        const double sgn = lower_side ? -1.0 : 1.0;
        lp.objective = {sgn * double(K), sgn * sx, sgn * sy};
        lp.lower = {-kInf, -kInf, -kInf};
        lp.upper = {kInf, kInf, kInf};
        for (std::size_t k = 0; k < K; ++k) {
            LinRow row;
            row.coeffs = {1.0, offsets[k][0], offsets[k][1]};
            row.rel = lower_side ? Rel::Le : Rel::Ge;
            row.rhs = values[k];
            lp.rows.push_back(std::move(row));
        }
        SolveOutcome sol = lp_solve(lp);
        if (sol.status != SolveStatus::Optimal)
            throw SolverError("fit_planes: plane LP did not solve to optimality (" +
                              status_name(sol.status) + ")");
        return sol.primal;
    };

    const std::vector<double> lo = solve_side(true);
    const std::vector<double> up = solve_side(false);
    PlanePair plane{lo[0], lo[1], lo[2], up[0], up[1], up[2]};
    return repair_plane(plane, offsets, values);
}

} // namespace

std::vector<PlanePair> fit_planes(const Image& image, int i, int j, double delta) {
    // Planes are always fitted on infinity-ball candidates; the box encloses
    // the L1 and L2 balls, so the planes stay sound for every norm.
    const AttackBudget box(Norm::LInf, delta);
    std::vector<PlanePair> out(image.channels());

    std::vector<std::array<double, 2>> offsets;
    std::vector<std::vector<double>> values(image.channels());
    for (auto [m, n] : reachable_regions(i, j, image.width(), box)) {
        const RegionCoeffs coeffs = region_coeffs(image, m, n);
        for (const auto& p : candidates_inf(i, j, delta, m, n, coeffs)) {
            offsets.push_back({p[0] - i, p[1] - j});
            for (int c = 0; c < image.channels(); ++c)
                values[c].push_back(coeffs.eval(c, p[0], p[1]));
        }
    }
    for (int c = 0; c < image.channels(); ++c)
        out[c] = fit_channel(offsets, values[c]);
    return out;
}

BoundingPlanes fit_all_planes(const Image& image, double delta, int threads) {
    const int W = image.width();
    const int C = image.channels();
    BoundingPlanes planes(W, C);
    auto run = [&](int row_begin, int row_end) {
        for (int i = row_begin; i <= row_end; ++i) {
            for (int j = 1; j <= W; ++j) {
                std::vector<PlanePair> per_channel = fit_planes(image, i, j, delta);
                for (int c = 0; c < C; ++c)
                    planes.at(i, j, c) = per_channel[c];
            }
        }
    };
    if (threads <= 1 || W < 2 * threads) {
        run(1, W);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (W + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = 1 + t * chunk;
            const int hi = std::min(W, lo + chunk - 1);
            if (lo > hi)
                break;
            pool.emplace_back(run, lo, hi);
        }
        for (auto& th : pool)
            th.join();
    }
    return planes;
}

LinearProgram build_tightening_lp(const AffineExpr& expr,
                                  const std::vector<PlanePair>* planes,
                                  const std::vector<double>& lower,
                                  const std::vector<double>& upper,
                                  const FlowGraph& graph, const AttackBudget& budget) {
    const int n_inputs = static_cast<int>(lower.size());
    if (static_cast<int>(graph.pixel_of_input.size()) != n_inputs)
        throw ContractError("tightening lp: flow graph does not match input size");
    if (planes && static_cast<int>(planes->size()) != n_inputs)
        throw ContractError("tightening lp: planes do not match input size");

    // Referenced inputs and pixels.
    std::map<int, double> coeff_of;
    for (const auto& [idx, a] : expr.terms) {
        if (idx < 0 || idx >= n_inputs)
            throw ContractError("tightening lp: expression references a non-input variable");
        if (a != 0.0)
            coeff_of[idx] += a;
    }

    LinearProgram lp;
    lp.sense = Sense::Minimize;
    std::map<int, int> var_of_input;
    std::map<int, std::pair<int, int>> disp_of_pixel; // pixel -> (vx, vy)
    for (const auto& [idx, a] : coeff_of) {
        var_of_input[idx] = lp.add_var(lower[idx], upper[idx], a);
    }
    const bool with_flow = budget.gamma < kInf;
    const bool with_disp = planes != nullptr || with_flow;
    if (with_disp) {
        for (const auto& [idx, a] : coeff_of) {
            (void)a;
            const int pixel = graph.pixel_of_input[idx];
            if (!disp_of_pixel.count(pixel)) {
                const int vx = lp.add_var(-budget.delta, budget.delta, 0.0);
                const int vy = lp.add_var(-budget.delta, budget.delta, 0.0);
                disp_of_pixel[pixel] = {vx, vy};
            }
        }
    }
    const int n_vars = lp.num_vars();

    if (planes) {
        for (const auto& [idx, var] : var_of_input) {
            const PlanePair& p = (*planes)[idx];
            const auto [vx, vy] = disp_of_pixel.at(graph.pixel_of_input[idx]);
            LinRow lo_row;
            lo_row.coeffs.assign(n_vars, 0.0);
            lo_row.coeffs[var] = 1.0;
            lo_row.coeffs[vx] = -p.lo1;
            lo_row.coeffs[vy] = -p.lo2;
            lo_row.rel = Rel::Ge;
            lo_row.rhs = p.lo0;
            lp.rows.push_back(std::move(lo_row));
            LinRow up_row;
            up_row.coeffs.assign(n_vars, 0.0);
            up_row.coeffs[var] = 1.0;
            up_row.coeffs[vx] = -p.up1;
            up_row.coeffs[vy] = -p.up2;
            up_row.rel = Rel::Le;
            up_row.rhs = p.up0;
            lp.rows.push_back(std::move(up_row));
        }
    }

    if (with_flow) {
        for (const auto& [a, b] : graph.edges) {
            auto ia = disp_of_pixel.find(a);
            auto ib = disp_of_pixel.find(b);
            if (ia == disp_of_pixel.end() || ib == disp_of_pixel.end())
                continue; // edges to unreferenced pixels are dropped (sound)
            for (int comp = 0; comp < 2; ++comp) {
                const int va = comp == 0 ? ia->second.first : ia->second.second;
                const int vb = comp == 0 ? ib->second.first : ib->second.second;
                LinRow le;
                le.coeffs.assign(n_vars, 0.0);
                le.coeffs[va] = 1.0;
                le.coeffs[vb] = -1.0;
                le.rel = Rel::Le;
                le.rhs = budget.gamma;
                LinRow ge = le;
                ge.rel = Rel::Ge;
                ge.rhs = -budget.gamma;
                lp.rows.push_back(std::move(le));
                lp.rows.push_back(std::move(ge));
            }
        }
    }
    return lp;
}

double tightened_bound(const AffineExpr& expr, const std::vector<PlanePair>* planes,
                       const std::vector<double>& lower, const std::vector<double>& upper,
                       const FlowGraph& graph, const AttackBudget& budget, bool maximize) {
    if (expr.terms.empty())
        return expr.constant;
    LinearProgram lp = build_tightening_lp(expr, planes, lower, upper, graph, budget);
    if (maximize)
        lp.sense = Sense::Maximize;
    SolveOutcome sol = lp_solve(lp);
    if (sol.status != SolveStatus::Optimal)
        throw SolverError("tightening lp: solver returned " + status_name(sol.status));
    return sol.objective + expr.constant;
}

// ---------------------------------------------------------------------------
// JSON

std::string planes_to_json_text(const BoundingPlanes& p) {
    json arr = json::array();
    for (const PlanePair& e : p.entries)
        arr.push_back({e.lo0, e.lo1, e.lo2, e.up0, e.up1, e.up2});
    json doc = {{"width", p.width}, {"channels", p.channels}, {"planes", std::move(arr)}};
    return doc.dump();
}

BoundingPlanes planes_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("planes json: parse error: ") + e.what());
    }
    if (!doc.contains("width") || !doc.contains("channels") || !doc.contains("planes"))
        throw FormatError("planes json: expected width/channels/planes");
    BoundingPlanes p(doc["width"].get<int>(), doc["channels"].get<int>());
    const json& arr = doc["planes"];
    if (!arr.is_array() || arr.size() != p.entries.size())
        throw FormatError("planes json: wrong number of plane entries");
    for (std::size_t k = 0; k < p.entries.size(); ++k) {
        const json& e = arr[k];
        if (!e.is_array() || e.size() != 6)
            throw FormatError("planes json: plane entries must be sextuples");
        p.entries[k] = PlanePair{e[0].get<double>(), e[1].get<double>(), e[2].get<double>(),
                                 e[3].get<double>(), e[4].get<double>(), e[5].get<double>()};
    }
    return p;
}

void save_planes_json(const BoundingPlanes& p, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw FormatError("planes json: cannot open " + path + " for writing");
    out << planes_to_json_text(p) << "\n";
}

BoundingPlanes load_planes_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("planes json: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return planes_from_json_text(buf.str());
}

} // namespace vfcert
