#include "vfcert/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vfcert {

using nlohmann::json;

void AffineMap::apply(const std::vector<double>& in, std::vector<double>& out) const {
    out.assign(out_size, 0.0);
    for (int k = 0; k < out_size; ++k) {
        double acc = bias[k];
        for (const auto& [idx, w] : rows[k])
            acc += w * in[idx];
        out[k] = acc;
    }
}

namespace {

struct ShapeState {
    bool spatial = false;
    int h = 0, w = 0, c = 0;
    int flat = 0;

    int size() const { return spatial ? h * w * c : flat; }
};

[[noreturn]] void layer_error(std::size_t idx, const std::string& msg) {
    std::ostringstream oss;
    oss << "network json: layer " << idx << ": " << msg;
    throw FormatError(oss.str());
}

std::pair<int, int> read_pair(const json& v, std::size_t idx, const char* name) {
    if (v.is_number_integer())
        return {v.get<int>(), v.get<int>()};
    if (v.is_array() && v.size() == 2)
        return {v[0].get<int>(), v[1].get<int>()};
    layer_error(idx, std::string(name) + " must be an integer or a pair");
}

AffineMap lower_dense(const json& spec, std::size_t idx, const ShapeState& in) {
    if (in.spatial)
        layer_error(idx, "dense layer applied to a spatial shape (insert flatten)");
    if (!spec.contains("weights") || !spec.contains("bias"))
        layer_error(idx, "dense layer needs weights and bias");
    const json& weights = spec["weights"];
    const json& bias = spec["bias"];
    if (!weights.is_array() || weights.empty())
        layer_error(idx, "weights must be a nonempty matrix");
    AffineMap map;
    map.out_size = static_cast<int>(weights.size());
    map.in_size = in.flat;
    if (!bias.is_array() || static_cast<int>(bias.size()) != map.out_size)
        layer_error(idx, "bias length must match the number of output rows");
    map.rows.resize(map.out_size);
    map.bias.resize(map.out_size);
    for (int k = 0; k < map.out_size; ++k) {
        const json& row = weights[k];
        if (!row.is_array() || static_cast<int>(row.size()) != map.in_size)
            layer_error(idx, "weight row width does not match the input size");
        map.bias[k] = bias[k].get<double>();
        for (int j = 0; j < map.in_size; ++j) {
            const double w = row[j].get<double>();
            if (w != 0.0)
                map.rows[k].emplace_back(j, w);
        }
    }
    return map;
}

// kernels[oc][ic][kh][kw]; input/output laid out row-major (h, w, c).
AffineMap lower_conv(const json& spec, std::size_t idx, ShapeState& shape) {
    if (!shape.spatial)
        layer_error(idx, "conv2d requires a spatial input shape");
    if (!spec.contains("kernels") || !spec.contains("bias"))
        layer_error(idx, "conv2d needs kernels and bias");
    const json& kern = spec["kernels"];
    if (!kern.is_array() || kern.empty())
        layer_error(idx, "kernels must be [out_c][in_c][kh][kw]");
    const int out_c = static_cast<int>(kern.size());
    const int in_c = static_cast<int>(kern[0].size());
    if (in_c != shape.c)
        layer_error(idx, "kernel input channels do not match the input shape");
    const int kh = static_cast<int>(kern[0][0].size());
    const int kw = static_cast<int>(kern[0][0][0].size());
    auto [sh, sw] = spec.contains("stride") ? read_pair(spec["stride"], idx, "stride")
                                            : std::pair<int, int>{1, 1};
    auto [ph, pw] = spec.contains("padding") ? read_pair(spec["padding"], idx, "padding")
                                             : std::pair<int, int>{0, 0};
    if (sh < 1 || sw < 1)
        layer_error(idx, "stride must be positive");
    const json& bias = spec["bias"];
    if (!bias.is_array() || static_cast<int>(bias.size()) != out_c)
        layer_error(idx, "bias length must equal the number of output channels");

    const int oh = (shape.h + 2 * ph - kh) / sh + 1;
    const int ow = (shape.w + 2 * pw - kw) / sw + 1;
    if (oh < 1 || ow < 1)
        layer_error(idx, "kernel does not fit the padded input");

    AffineMap map;
    map.in_size = shape.size();
    map.out_size = oh * ow * out_c;
    map.rows.resize(map.out_size);
    map.bias.resize(map.out_size);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int oc = 0; oc < out_c; ++oc) {
                const int out_idx = (oy * ow + ox) * out_c + oc;
                map.bias[out_idx] = bias[oc].get<double>();
                auto& row = map.rows[out_idx];
                for (int ic = 0; ic < in_c; ++ic) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * sh - ph + ky;
                        if (iy < 0 || iy >= shape.h)
                            continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * sw - pw + kx;
                            if (ix < 0 || ix >= shape.w)
                                continue;
                            const double w = kern[oc][ic][ky][kx].get<double>();
                            if (w == 0.0)
                                continue;
                            row.emplace_back((iy * shape.w + ix) * in_c + ic, w);
                        }
                    }
                }
            }
        }
    }
    shape.spatial = true;
    shape.h = oh;
    shape.w = ow;
    shape.c = out_c;
    return map;
}

AffineMap identity_map(int n) {
    AffineMap map;
    map.in_size = n;
    map.out_size = n;
    map.rows.resize(n);
    map.bias.assign(n, 0.0);
    for (int k = 0; k < n; ++k)
        map.rows[k].emplace_back(k, 1.0);
    return map;
}

} // namespace

Network network_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("network json: parse error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array())
        throw FormatError("network json: expected object with a layers array");
    if (doc["layers"].empty())
        throw FormatError("network json: layer list is empty");
    if (!doc.contains("input") || !doc["input"].is_object())
        throw FormatError("network json: missing input shape declaration");

    Network net;
    ShapeState shape;
    const json& input = doc["input"];
    if (input.contains("width")) {
        shape.spatial = true;
        shape.h = input["width"].get<int>();
        shape.w = shape.h;
        shape.c = input.value("channels", 1);
        net.input_width = shape.h;
        net.input_channels = shape.c;
        if (shape.h < 1 || shape.c < 1)
            throw FormatError("network json: input width/channels must be positive");
    } else if (input.contains("size")) {
        shape.flat = input["size"].get<int>();
        if (shape.flat < 1)
            throw FormatError("network json: input size must be positive");
    } else {
        throw FormatError("network json: input must declare width/channels or size");
    }
    net.input_size = shape.size();

    std::vector<ShapeState> shapes; // output shape per layer, for residual checks
    for (std::size_t idx = 0; idx < doc["layers"].size(); ++idx) {
        const json& spec = doc["layers"][idx];
        if (!spec.is_object() || !spec.contains("kind"))
            layer_error(idx, "expected object with a kind");
        const std::string kind = spec["kind"].get<std::string>();
        Layer layer;
        layer.raw = spec.dump();
        if (kind == "dense") {
            layer.kind = Layer::Kind::Affine;
            layer.map = lower_dense(spec, idx, shape);
            shape.spatial = false;
            shape.flat = layer.map.out_size;
        } else if (kind == "conv2d") {
            layer.kind = Layer::Kind::Affine;
            layer.map = lower_conv(spec, idx, shape);
        } else if (kind == "flatten") {
            layer.kind = Layer::Kind::Affine;
            layer.map = identity_map(shape.size());
            shape.flat = shape.size();
            shape.spatial = false;
        } else if (kind == "relu") {
            layer.kind = Layer::Kind::Relu;
        } else if (kind == "residual_add") {
            if (!spec.contains("from"))
                layer_error(idx, "residual_add needs a from index");
            const int from = spec["from"].get<int>();
            if (from < -1 || from >= static_cast<int>(idx))
                layer_error(idx, "residual_add must reference an earlier layer");
            const int from_size = from == -1 ? net.input_size : shapes[from].size();
            if (from_size != shape.size())
                layer_error(idx, "residual_add shapes do not match");
            layer.kind = Layer::Kind::ResidualAdd;
            layer.from = from;
        } else {
            layer_error(idx, "unknown kind '" + kind + "'");
        }
        layer.size = shape.size();
        shapes.push_back(shape);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Network load_network_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("network json: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return network_from_json_text(buf.str());
}

std::string network_to_json_text(const Network& net) {
    json layers = json::array();
    for (const Layer& layer : net.layers)
        layers.push_back(json::parse(layer.raw));
    json input;
    if (net.input_width > 0)
        input = {{"width", net.input_width}, {"channels", net.input_channels}};
    else
        input = {{"size", net.input_size}};
    json doc = {{"input", std::move(input)}, {"layers", std::move(layers)}};
    return doc.dump();
}

void save_network_json(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw FormatError("network json: cannot open " + path + " for writing");
    out << network_to_json_text(net) << "\n";
}

std::vector<double> forward(const Network& net, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != net.input_size)
        throw ContractError("forward: input size does not match the network");
    std::vector<std::vector<double>> outs(net.layers.size());
    const std::vector<double>* prev = &input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        std::vector<double>& out = outs[l];
        switch (layer.kind) {
        case Layer::Kind::Affine:
            layer.map.apply(*prev, out);
            break;
        case Layer::Kind::Relu:
            out = *prev;
            for (double& v : out)
                v = std::max(0.0, v);
            break;
        case Layer::Kind::ResidualAdd: {
            const std::vector<double>& other = layer.from == -1 ? input : outs[layer.from];
            out = *prev;
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] += other[k];
            break;
        }
        }
        prev = &out;
    }
    return outs.back();
}

std::vector<double> forward(const Network& net, const Image& image) {
    return forward(net, image.data());
}

int argmax_label(const std::vector<double>& logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

Network dense_network(int input_size,
                      const std::vector<std::vector<std::vector<double>>>& weights,
                      const std::vector<std::vector<double>>& biases) {
    json layers = json::array();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        layers.push_back({{"kind", "dense"}, {"weights", weights[l]}, {"bias", biases[l]}});
        if (l + 1 < weights.size())
            layers.push_back({{"kind", "relu"}});
    }
    json doc = {{"input", {{"size", input_size}}}, {"layers", std::move(layers)}};
    return network_from_json_text(doc.dump());
}

} // namespace vfcert
