#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vfcert/geometry.hpp"
#include "vfcert/image.hpp"
#include "vfcert/network.hpp"
#include "vfcert/planes.hpp"
#include "vfcert/quartic.hpp"
#include "vfcert/sampler.hpp"
#include "vfcert/verifier.hpp"

namespace py = pybind11;
using namespace vfcert;

namespace {

AttackBudget make_budget(const std::string& norm, double delta, double gamma) {
    return AttackBudget(parse_norm(norm), delta, gamma);
}

py::dict report_to_dict(const CertificationReport& r) {
    py::dict d;
    d["image"] = r.image_id;
    d["norm"] = norm_name(r.norm);
    d["delta"] = r.delta;
    d["gamma"] = r.gamma;
    d["method"] = r.method;
    d["label"] = r.predicted_label;
    d["status"] = r.status;
    py::dict margins;
    for (const auto& [t, v] : r.margins)
        margins[py::int_(t)] = v;
    d["margins"] = margins;
    d["time_s"] = r.time_s;
    if (r.witness) {
        py::dict w;
        w["w"] = r.witness->width;
        w["dx"] = r.witness->dx;
        w["dy"] = r.witness->dy;
        d["witness"] = w;
        d["adv_label"] = r.adversarial_label;
    }
    return d;
}

} // namespace

PYBIND11_MODULE(_vfcert, m) {
    m.doc() = "Certified robustness of neural networks against vector-field image deformations";

    py::register_exception<Error>(m, "VfcertError");

    py::class_<Image>(m, "Image")
        .def(py::init<int, int>(), py::arg("width"), py::arg("channels") = 1)
        .def(py::init<int, int, std::vector<double>>(), py::arg("width"), py::arg("channels"),
             py::arg("data"))
        .def_property_readonly("width", &Image::width)
        .def_property_readonly("channels", &Image::channels)
        .def("at", [](const Image& img, int i, int j, int c) { return img.at(i, j, c); },
             py::arg("i"), py::arg("j"), py::arg("c") = 0)
        .def("set", [](Image& img, int i, int j, int c, double v) { img.at(i, j, c) = v; })
        .def("data", [](const Image& img) { return img.data(); });

    py::class_<VectorField>(m, "VectorField")
        .def(py::init<int>())
        .def_readonly("width", &VectorField::width)
        .def_readwrite("dx", &VectorField::dx)
        .def_readwrite("dy", &VectorField::dy);

    py::class_<Network>(m, "Network")
        .def_property_readonly("input_size", [](const Network& n) { return n.input_size; })
        .def_property_readonly("output_size", &Network::output_size);

    m.def("interpolate", &interpolate, py::arg("image"), py::arg("x"), py::arg("y"));
    m.def("deform", &deform, py::arg("image"), py::arg("field"));
    m.def("load_idx", &load_idx, py::arg("path"));
    m.def("save_idx", &save_idx, py::arg("images"), py::arg("path"));
    m.def("load_tensor_json", &load_tensor_json, py::arg("path"));
    m.def("save_tensor_json", &save_tensor_json, py::arg("image"), py::arg("path"));

    m.def("quartic_real_roots", &quartic_real_roots, py::arg("j"), py::arg("k"), py::arg("l"),
          py::arg("m"), py::arg("n"));

    m.def(
        "pixel_interval",
        [](const Image& image, int i, int j, const std::string& norm, double delta) {
            std::vector<double> lo, hi;
            pixel_interval(image, i, j, AttackBudget(parse_norm(norm), delta), lo, hi);
            return py::make_tuple(lo, hi);
        },
        py::arg("image"), py::arg("i"), py::arg("j"), py::arg("norm"), py::arg("delta"));

    m.def(
        "bounds_map",
        [](const Image& image, const std::string& norm, double delta, int threads) {
            PixelBounds b = bounds_map(image, AttackBudget(parse_norm(norm), delta), threads);
            py::dict d;
            d["width"] = b.width;
            d["channels"] = b.channels;
            d["l"] = b.lo;
            d["u"] = b.hi;
            return d;
        },
        py::arg("image"), py::arg("norm"), py::arg("delta"), py::arg("threads") = 1);

    m.def(
        "extremal_witness",
        [](const Image& image, int i, int j, const std::string& norm, double delta, bool maximize) {
            return extremal_witness(image, i, j, AttackBudget(parse_norm(norm), delta), maximize);
        },
        py::arg("image"), py::arg("i"), py::arg("j"), py::arg("norm"), py::arg("delta"),
        py::arg("maximize"));

    m.def(
        "fit_planes",
        [](const Image& image, int i, int j, double delta) {
            py::list out;
            for (const PlanePair& p : fit_planes(image, i, j, delta))
                out.append(py::make_tuple(p.lo0, p.lo1, p.lo2, p.up0, p.up1, p.up2));
            return out;
        },
        py::arg("image"), py::arg("i"), py::arg("j"), py::arg("delta"));

    m.def("load_network_json", &load_network_json, py::arg("path"));
    m.def("network_from_json", &network_from_json_text, py::arg("text"));
    m.def("forward", [](const Network& net, const std::vector<double>& x) { return forward(net, x); },
          py::arg("network"), py::arg("input"));

    m.def(
        "certify_image",
        [](const Network& net, const Image& image, const std::string& norm, double delta,
           double gamma, const std::string& method, double timeout_s, int threads) {
            CertificationReport r = certify_image(net, image, make_budget(norm, delta, gamma),
                                                  parse_method(method), timeout_s, threads);
            return report_to_dict(r);
        },
        py::arg("network"), py::arg("image"), py::arg("norm"), py::arg("delta"),
        py::arg("gamma") = kInf, py::arg("method") = "deeppoly", py::arg("timeout_s") = kInf,
        py::arg("threads") = 1);

    m.def(
        "sample_field",
        [](int width, const std::string& norm, double delta, double gamma, uint64_t seed) {
            return sample_field(width, make_budget(norm, delta, gamma), CounterRng(seed));
        },
        py::arg("width"), py::arg("norm"), py::arg("delta"), py::arg("gamma") = kInf,
        py::arg("seed") = 0);

    m.def(
        "random_attack",
        [](const Network& net, const Image& image, const std::string& norm, double delta,
           double gamma, int label, int tries, uint64_t seed) -> py::object {
            auto hit = random_attack(net, image, make_budget(norm, delta, gamma), label, tries,
                                     CounterRng(seed));
            if (!hit)
                return py::none();
            py::dict d;
            d["field"] = hit->first;
            d["adv_label"] = hit->second;
            return d;
        },
        py::arg("network"), py::arg("image"), py::arg("norm"), py::arg("delta"), py::arg("gamma"),
        py::arg("label"), py::arg("tries"), py::arg("seed") = 0);

    m.def(
        "estimate_coverage",
        [](const Image& image, const std::string& norm, double delta, double gamma, int samples,
           uint64_t seed) {
            CoverageReport r = estimate_coverage(image, make_budget(norm, delta, gamma), samples,
                                                 CounterRng(seed));
            py::dict d;
            d["coverage"] = r.coverage;
            d["s_l"] = r.sampled.lo;
            d["s_u"] = r.sampled.hi;
            d["l"] = r.certified.lo;
            d["u"] = r.certified.hi;
            return d;
        },
        py::arg("image"), py::arg("norm"), py::arg("delta"), py::arg("gamma"), py::arg("samples"),
        py::arg("seed") = 0);
}
