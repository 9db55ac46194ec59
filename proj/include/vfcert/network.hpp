#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vfcert/errors.hpp"
#include "vfcert/image.hpp"

namespace vfcert {

// Sparse affine map: out_k = bias_k + sum_j w_kj * in_j.
struct AffineMap {
    int in_size = 0;
    int out_size = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<double> bias;

    void apply(const std::vector<double>& in, std::vector<double>& out) const;
};

// Dense, convolution and flatten layers are lowered to one sparse affine
// form at load time so all verifiers share a single affine code path.
struct Layer {
    enum class Kind { Affine, Relu, ResidualAdd };
    Kind kind = Kind::Affine;
    AffineMap map;   // Kind::Affine
    int from = -1;   // Kind::ResidualAdd: 0-based earlier layer, -1 = network input
    int size = 0;    // output size
    std::string raw; // original JSON object, kept for save round trips
};

struct Network {
    int input_size = 0;
    // > 0 when the input was declared as a W x W x C image; 0 for flat inputs.
    int input_width = 0;
    int input_channels = 0;
    std::vector<Layer> layers;

    int output_size() const { return layers.empty() ? input_size : layers.back().size; }
};

Network load_network_json(const std::string& path);
Network network_from_json_text(const std::string& text);
void save_network_json(const Network& net, const std::string& path);
std::string network_to_json_text(const Network& net);

// Concrete forward pass.
std::vector<double> forward(const Network& net, const std::vector<double>& input);
std::vector<double> forward(const Network& net, const Image& image);

int argmax_label(const std::vector<double>& logits);

// Convenience constructor for fully-connected fixtures and tests: weights
// are row-per-output matrices, with a ReLU between consecutive dense layers.
Network dense_network(int input_size,
                      const std::vector<std::vector<std::vector<double>>>& weights,
                      const std::vector<std::vector<double>>& biases);

} // namespace vfcert
