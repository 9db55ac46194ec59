#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfcert/geometry.hpp"
#include "vfcert/network.hpp"
#include "vfcert/planes.hpp"

namespace vfcert {

// Per-layer interval state.
struct LayerIntervals {
    std::vector<std::vector<double>> lo, hi; // [layer][neuron]
};

// Interval propagation through every layer; ReLU clamps at zero.
LayerIntervals interval_propagate_all(const Network& net, const std::vector<double>& in_lo,
                                      const std::vector<double>& in_hi);
std::pair<std::vector<double>, std::vector<double>>
interval_propagate(const Network& net, const PixelBounds& bounds);

// DeepPoly state: per-neuron interval plus, for ReLU layers, the linear
// relaxation y >= lo_coeff * x and y <= up_coeff * x + up_const over the
// matching pre-activation neuron.  Affine layers carry their exact map.
struct ReluRelax {
    double lo_coeff = 0.0;
    double up_coeff = 0.0;
    double up_const = 0.0;
};

struct AbstractElement {
    std::vector<double> lo, hi;
    std::vector<ReluRelax> relu; // only populated for ReLU layers
};

struct DeepPolyOptions {
    // Solve the flow-tightening LP for every intermediate neuron bound as
    // well, not only for the output margin expressions.
    bool tighten_intermediate = false;
};

// Full DeepPoly analysis: abstract elements for every layer.
std::vector<AbstractElement> deeppoly_analyze(const Network& net,
                                              const std::vector<double>& in_lo,
                                              const std::vector<double>& in_hi,
                                              const std::vector<PlanePair>* planes,
                                              const FlowGraph* graph,
                                              const AttackBudget& budget,
                                              const DeepPolyOptions& opts = {});

struct CertificationReport {
    std::string image_id;
    Norm norm = Norm::LInf;
    double delta = 0.0;
    double gamma = kInf;
    std::string method;
    int predicted_label = -1;
    std::string status; // certified | falsified | unknown | timeout
    std::map<int, double> margins;
    double time_s = 0.0;
    std::optional<VectorField> witness;
    int adversarial_label = -1;
    std::string note;
};

std::string report_to_json_text(const CertificationReport& r);
CertificationReport report_from_json_text(const std::string& text);

// DeepPoly certification of `label`.  With gamma < inf the final
// backsubstituted input expression is concretized through the
// flow-tightening LP (planes required), otherwise by interval substitution.
CertificationReport deeppoly_certify(const Network& net, const std::vector<double>& in_lo,
                                     const std::vector<double>& in_hi,
                                     const std::vector<PlanePair>* planes,
                                     const FlowGraph* graph, const AttackBudget& budget,
                                     int label, const DeepPolyOptions& opts = {});

// Exact big-M MILP certification.  Pre-activation bounds come from a
// DeepPoly pass; stable ReLUs are encoded linearly without a binary.  When
// `image` is given, feasible negative-margin points are decoded into a
// vector-field witness and re-verified before the report says falsified.
CertificationReport milp_certify(const Network& net, const std::vector<double>& in_lo,
                                 const std::vector<double>& in_hi,
                                 const std::vector<PlanePair>* planes, const FlowGraph* graph,
                                 const AttackBudget& budget, int label, double timeout_s,
                                 const Image* image = nullptr,
                                 const std::vector<double>* clean_logits = nullptr);

enum class Method { Interval, DeepPoly, Milp };
Method parse_method(const std::string& s);
std::string method_name(Method m, bool with_flow);

// End-to-end driver: bounds, planes and flow graph from the image and
// budget, then the chosen verifier.
CertificationReport certify_image(const Network& net, const Image& image,
                                  const AttackBudget& budget, Method method,
                                  double timeout_s = kInf, int threads = 1,
                                  const PixelBounds* bounds_override = nullptr,
                                  const BoundingPlanes* planes_override = nullptr);

// Displacement field reproducing per-pixel target values; single-channel
// only (bisection between the extremal witnesses).
std::optional<VectorField> decode_input_point(const Image& image, const AttackBudget& budget,
                                              const std::vector<double>& targets);

} // namespace vfcert
