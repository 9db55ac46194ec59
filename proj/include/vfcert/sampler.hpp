#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vfcert/geometry.hpp"
#include "vfcert/network.hpp"

namespace vfcert {

// Counter-based SplitMix64 generator; the k-th output is
// mix(seed + k * 0x9E3779B97F4A7C15) with the standard SplitMix64 finalizer,
// so streams are reproducible across platforms and languages.  Documented in
// the README.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed) : seed_(seed) {}

    uint64_t next_u64() {
        ++counter_;
        return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }
    // Uniform in [0, 1), 53 mantissa bits.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Independent stream for sub-task `stream` (sample index, image index).
    CounterRng derive(uint64_t stream) const {
        return CounterRng(mix(seed_ ^ mix(stream + 0x9E3779B97F4A7C15ULL)));
    }

    uint64_t seed() const { return seed_; }

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

private:
    uint64_t seed_;
    uint64_t counter_ = 0;
};

struct SamplerConfig {
    AttackBudget budget;
    int count = 1;
    uint64_t seed = 0;
    int projection_cap = 100;
};

// Independent admissibility check: T_p norm within `norm_tol`, flow
// constraints within `flow_tol`, deformed coordinates inside the image.
bool field_admissible(const VectorField& field, const AttackBudget& budget,
                      double flow_tol = 1e-9, double norm_tol = 1e-12);

// Random admissible field: i.i.d. per-pixel draws on B_delta^p, iterated
// projection onto the flow constraints, re-clipped to the ball and image;
// shrinks toward the zero field if the projection cap is hit.
VectorField sample_field(int width, const AttackBudget& budget, CounterRng rng,
                         int projection_cap = 100);

// First sampled admissible field whose deformation flips the predicted
// label, if any.  Deterministic given the rng seed.
std::optional<std::pair<VectorField, int>> random_attack(const Network& net, const Image& image,
                                                         const AttackBudget& budget, int label,
                                                         int tries, CounterRng rng);

struct CoverageReport {
    PixelBounds sampled;   // per-pixel sampled min/max
    PixelBounds certified; // analytic bounds
    double coverage = 0.0; // mean over pixels/channels of width ratios
};

// Sampled per-pixel extremes against the analytic bounds.  Throws if any
// sampled value escapes its bound (that would mean the bounds are unsound).
CoverageReport estimate_coverage(const Image& image, const AttackBudget& budget, int samples,
                                 CounterRng rng);

std::string field_to_json_text(const VectorField& field);
VectorField field_from_json_text(const std::string& text);
std::string coverage_to_json_text(const CoverageReport& report);

} // namespace vfcert
