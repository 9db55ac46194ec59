#pragma once

#include <array>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vfcert/image.hpp"

namespace vfcert {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Norm { L1, L2, LInf };

Norm parse_norm(const std::string& s);      // "1", "2", "inf"
std::string norm_name(Norm p);

// Attack budget: T_p norm bound delta on per-pixel displacement and flow
// bound gamma on the l_inf difference between 4-neighbor displacements.
struct AttackBudget {
    Norm norm = Norm::LInf;
    double delta = 0.0;
    double gamma = kInf;

    AttackBudget() = default;
    AttackBudget(Norm p, double d, double g = kInf) : norm(p), delta(d), gamma(g) {
        if (!(delta >= 0.0))
            throw ArgumentError("budget: delta must be >= 0");
        if (!(gamma >= 0.0))
            throw ArgumentError("budget: gamma must be nonnegative or inf");
    }
};

// One extremal-candidate coordinate inside B_delta^p(i,j) intersected with
// interpolation region A_mn.  `pad` widens the value at this coordinate when
// it comes from the dense-sampling fallback (sound but looser).
struct Candidate {
    double x = 0.0;
    double y = 0.0;
    int m = 0;
    int n = 0;
    double pad = 0.0;
};

struct CandidateSet {
    int i = 0;
    int j = 0;
    std::vector<Candidate> pts;
};

// Per-pixel per-channel interval bounds, row-major over (i, j, c).
struct PixelBounds {
    int width = 0;
    int channels = 0;
    std::vector<double> lo, hi;

    PixelBounds() = default;
    PixelBounds(int w, int c)
        : width(w), channels(c), lo(static_cast<std::size_t>(w) * w * c, 0.0),
          hi(static_cast<std::size_t>(w) * w * c, 0.0) {}

    std::size_t index(int i, int j, int c) const {
        return (static_cast<std::size_t>(i - 1) * width + (j - 1)) * channels + c;
    }
    double lo_at(int i, int j, int c = 0) const { return lo[index(i, j, c)]; }
    double hi_at(int i, int j, int c = 0) const { return hi[index(i, j, c)]; }
};

std::string bounds_to_json_text(const PixelBounds& b);
PixelBounds bounds_from_json_text(const std::string& text);
void save_bounds_json(const PixelBounds& b, const std::string& path);
PixelBounds load_bounds_json(const std::string& path);

// Regions A_mn with nonempty intersection B_delta^p(i,j) ∩ A_mn, in
// row-major (m, n) order.
std::vector<std::pair<int, int>> reachable_regions(int i, int j, int width, const AttackBudget& budget);

// Candidate coordinates on one region for each norm.  Coordinates are
// absolute; the empty list signals an empty intersection.  `coeffs` must be
// the region's coefficients (used by the L1/L2 stationary-point analysis;
// unused for LInf but kept for a uniform signature).
std::vector<std::array<double, 2>> candidates_inf(int i, int j, double delta, int m, int n,
                                                  const RegionCoeffs& coeffs);
std::vector<std::array<double, 2>> candidates_l1(int i, int j, double delta, int m, int n,
                                                 const RegionCoeffs& coeffs);
// L2 candidates; entries whose value must be widened by the fallback carry
// a nonzero pad.
std::vector<Candidate> candidates_l2(int i, int j, double delta, int m, int n,
                                     const RegionCoeffs& coeffs);

// Union of candidates over all reachable regions (and all channels for the
// stationary-point families).
CandidateSet candidate_set(const Image& image, int i, int j, const AttackBudget& budget);

// Tight interval bounds for pixel (i, j) over all admissible displacements,
// per channel.
void pixel_interval(const Image& image, int i, int j, const AttackBudget& budget,
                    std::vector<double>& lo, std::vector<double>& hi);

// Interval bounds for every pixel.  Per-pixel work is independent; threads
// > 1 splits the pixel range.
PixelBounds bounds_map(const Image& image, const AttackBudget& budget, int threads = 1);

// Displacement achieving the lower (maximize = false) or upper bound of a
// single-channel pixel, exact within 1e-9.  Multi-channel input is not
// supported (per-channel extrema need different displacements).
std::array<double, 2> extremal_witness(const Image& image, int i, int j,
                                       const AttackBudget& budget, bool maximize);

} // namespace vfcert
