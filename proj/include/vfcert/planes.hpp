#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vfcert/geometry.hpp"
#include "vfcert/lp.hpp"

namespace vfcert {

// Lower plane lo0 + lo1*vx + lo2*vy and upper plane up0 + up1*vx + up2*vy
// bounding a pixel value in terms of its displacement components.
struct PlanePair {
    double lo0 = 0, lo1 = 0, lo2 = 0;
    double up0 = 0, up1 = 0, up2 = 0;

    double lower(double vx, double vy) const { return lo0 + lo1 * vx + lo2 * vy; }
    double upper(double vx, double vy) const { return up0 + up1 * vx + up2 * vy; }
};

// Planes for every pixel/channel, row-major over (i, j, c).
struct BoundingPlanes {
    int width = 0;
    int channels = 0;
    std::vector<PlanePair> entries;

    BoundingPlanes() = default;
    BoundingPlanes(int w, int c)
        : width(w), channels(c), entries(static_cast<std::size_t>(w) * w * c) {}

    std::size_t index(int i, int j, int c) const {
        return (static_cast<std::size_t>(i - 1) * width + (j - 1)) * channels + c;
    }
    const PlanePair& at(int i, int j, int c = 0) const { return entries[index(i, j, c)]; }
    PlanePair& at(int i, int j, int c = 0) { return entries[index(i, j, c)]; }
};

std::string planes_to_json_text(const BoundingPlanes& p);
BoundingPlanes planes_from_json_text(const std::string& text);
void save_planes_json(const BoundingPlanes& p, const std::string& path);
BoundingPlanes load_planes_json(const std::string& path);

// Flow-constraint graph: one node per pixel, one edge per 4-neighbor pair.
// Inputs of a network map onto pixels via pixel_of_input (channels of the
// same pixel share a displacement vector).
struct FlowGraph {
    int num_pixels = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> pixel_of_input;

    // Standard W x W image with C channels, row-major (i, j, c) inputs.
    static FlowGraph grid(int width, int channels);
    // A single row of n pixels with C channels (small fixtures).
    static FlowGraph line(int n, int channels);
};

// Displacement-candidate coordinates of one pixel, relative to the pixel.
struct PlaneFitInput {
    std::vector<std::array<double, 2>> offsets; // (p - i, q - j) per candidate
    std::vector<std::vector<double>> values;    // [channel][candidate]
};

// Bounding planes for pixel (i, j), one PlanePair per channel, fitted by LP
// over the candidate set of the infinity ball of radius delta and repaired
// for floating-point soundness.
std::vector<PlanePair> fit_planes(const Image& image, int i, int j, double delta);

// Planes for every pixel (fit_planes batched; rows split across threads).
BoundingPlanes fit_all_planes(const Image& image, double delta, int threads = 1);

// Shifts plane offsets so that every candidate satisfies
// lower(p,q) <= value <= upper(p,q) exactly.
PlanePair repair_plane(PlanePair plane, const std::vector<std::array<double, 2>>& offsets,
                       const std::vector<double>& values);

// Affine expression over input pixel-channels: constant + sum coeff * x_k.
struct AffineExpr {
    double constant = 0.0;
    std::vector<std::pair<int, double>> terms; // (input index, coefficient)
};

// LP whose minimum lower-bounds `expr` over all admissible deformations:
// interval rows l <= x <= u, bounding-plane rows when `planes` is given,
// and flow rows between referenced 4-neighbor pixels when gamma < inf.
// Displacement components are box-bounded by [-delta, delta].  The LP
// objective omits expr.constant; see tightened_bound.
LinearProgram build_tightening_lp(const AffineExpr& expr,
                                  const std::vector<PlanePair>* planes,
                                  const std::vector<double>& lower,
                                  const std::vector<double>& upper,
                                  const FlowGraph& graph, const AttackBudget& budget);

// Minimum (or maximum) of expr over the tightened feasible set, constant
// included.
double tightened_bound(const AffineExpr& expr, const std::vector<PlanePair>* planes,
                       const std::vector<double>& lower, const std::vector<double>& upper,
                       const FlowGraph& graph, const AttackBudget& budget, bool maximize);

} // namespace vfcert
