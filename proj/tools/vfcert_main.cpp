#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vfcert/geometry.hpp"
#include "vfcert/image.hpp"
#include "vfcert/network.hpp"
#include "vfcert/planes.hpp"
#include "vfcert/sampler.hpp"
#include "vfcert/verifier.hpp"

namespace fs = std::filesystem;
using namespace vfcert;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string command;
    std::string dataset;
    std::string format = "idx"; // idx | tensor-json
    std::string network;
    std::string norm = "inf";
    double delta = 0.0;
    std::string gamma = "inf";
    std::string method = "deeppoly";
    double timeout = 300.0;
    std::string images; // "a..b" (inclusive) or single index; empty = all
    std::string output;
    uint64_t seed = 0;
    int threads = 0;
    int samples = 10000;
    int tries = 1000;
    std::string bounds_path; // optional fixture overrides
    std::string planes_path;
};

int default_threads() {
    if (const char* env = std::getenv("VFCERT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

double parse_gamma(const std::string& s) {
    if (s == "inf")
        return kInf;
    const double g = std::stod(s);
    if (!(g > 0.0) && g != 0.0)
        throw ArgumentError("gamma must be positive, zero or inf");
    return g;
}

std::pair<int, int> parse_range(const std::string& spec, int count) {
    if (spec.empty())
        return {0, count - 1};
    const auto dots = spec.find("..");
    int lo, hi;
    if (dots == std::string::npos) {
        lo = hi = std::stoi(spec);
    } else {
        lo = std::stoi(spec.substr(0, dots));
        hi = std::stoi(spec.substr(dots + 2));
    }
    if (lo < 0 || hi >= count || lo > hi)
        throw ArgumentError("image range out of bounds");
    return {lo, hi};
}

std::vector<Image> load_dataset(const RunConfig& cfg) {
    if (cfg.format == "idx")
        return load_idx(cfg.dataset);
    if (cfg.format == "tensor-json")
        return {load_tensor_json(cfg.dataset)};
    throw ArgumentError("unknown dataset format '" + cfg.format + "'");
}

AttackBudget budget_of(const RunConfig& cfg) {
    return AttackBudget(parse_norm(cfg.norm), cfg.delta, parse_gamma(cfg.gamma));
}

// Runs fn(index) for every selected image, preserving input order in the
// output.  Per-image errors become error records; the run continues.
template <typename Fn>
int for_images(const RunConfig& cfg, int lo, int hi, std::ostream& out, Fn fn) {
    const int count = hi - lo + 1;
    std::vector<std::string> lines(count);
    std::vector<bool> failed(count, false);
    const int threads = std::max(1, cfg.threads);

    auto work = [&](int k) {
        const int idx = lo + k;
        try {
            lines[k] = fn(idx);
        } catch (const std::exception& e) {
            json err = {{"image", idx}, {"status", "error"}, {"error", e.what()}};
            lines[k] = err.dump();
            failed[k] = true;
        }
    };

    if (threads <= 1) {
        for (int k = 0; k < count; ++k)
            work(k);
    } else {
        std::vector<std::future<void>> futures;
        for (int k = 0; k < count; ++k)
            futures.push_back(std::async(std::launch::async, work, k));
        for (auto& f : futures)
            f.get();
    }
    for (const std::string& line : lines)
        out << line << "\n";
    return std::count(failed.begin(), failed.end(), true) == 0 ? 0 : 1;
}

int cmd_bounds(const RunConfig& cfg) {
    const std::vector<Image> images = load_dataset(cfg);
    auto [lo, hi] = parse_range(cfg.images, static_cast<int>(images.size()));
    const AttackBudget budget = budget_of(cfg);
    fs::create_directories(cfg.output);
    int rc = 0;
    for (int idx = lo; idx <= hi; ++idx) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const PixelBounds bounds = bounds_map(images[idx], budget, std::max(1, cfg.threads));
            std::ostringstream name;
            name << "bounds_" << std::setw(3) << std::setfill('0') << idx << ".json";
            save_bounds_json(bounds, (fs::path(cfg.output) / name.str()).string());
        } catch (const std::exception& e) {
            std::cerr << "image " << idx << ": " << e.what() << "\n";
            rc = 1;
            continue;
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "image " << idx << ": bounds in " << dt << " s\n";
    }
    return rc;
}

int cmd_certify(const RunConfig& cfg) {
    const std::vector<Image> images = load_dataset(cfg);
    auto [lo, hi] = parse_range(cfg.images, static_cast<int>(images.size()));
    const AttackBudget budget = budget_of(cfg);
    const Network net = load_network_json(cfg.network);
    const Method method = parse_method(cfg.method);

    PixelBounds bounds_override;
    BoundingPlanes planes_override;
    const bool have_bounds = !cfg.bounds_path.empty();
    const bool have_planes = !cfg.planes_path.empty();
    if (have_bounds)
        bounds_override = load_bounds_json(cfg.bounds_path);
    if (have_planes)
        planes_override = load_planes_json(cfg.planes_path);

    std::ofstream out(cfg.output);
    if (!out)
        throw FormatError("cannot open " + cfg.output + " for writing");

    int certified = 0, attempted = 0;
    double total_time = 0.0;
    const int rc = for_images(cfg, lo, hi, out, [&](int idx) {
        CertificationReport report =
            certify_image(net, images[idx], budget, method, cfg.timeout, 1,
                          have_bounds ? &bounds_override : nullptr,
                          have_planes ? &planes_override : nullptr);
        report.image_id = std::to_string(idx);
        ++attempted;
        if (report.status == "certified")
            ++certified;
        total_time += report.time_s;
        std::cout << "image " << idx << ": " << report.status << " (" << report.time_s << " s)\n";
        return report_to_json_text(report);
    });
    std::cout << "certified " << certified << "/" << attempted << ", mean time "
              << (attempted ? total_time / attempted : 0.0) << " s\n";
    return rc;
}

int cmd_attack(const RunConfig& cfg) {
    const std::vector<Image> images = load_dataset(cfg);
    auto [lo, hi] = parse_range(cfg.images, static_cast<int>(images.size()));
    const AttackBudget budget = budget_of(cfg);
    const Network net = load_network_json(cfg.network);
    std::ofstream out(cfg.output);
    if (!out)
        throw FormatError("cannot open " + cfg.output + " for writing");

    return for_images(cfg, lo, hi, out, [&](int idx) {
        const Image& image = images[idx];
        const int label = argmax_label(forward(net, image));
        CounterRng rng(CounterRng(cfg.seed).derive(idx).seed());
        auto hit = random_attack(net, image, budget, label, cfg.tries, rng);
        json line = {{"image", idx}, {"label", label}, {"found", hit.has_value()}};
        if (hit) {
            line["adv_label"] = hit->second;
            line["field"] = json::parse(field_to_json_text(hit->first));
            std::cout << "image " << idx << ": flipped to " << hit->second << "\n";
        } else {
            std::cout << "image " << idx << ": none found\n";
        }
        return line.dump();
    });
}

int cmd_coverage(const RunConfig& cfg) {
    const std::vector<Image> images = load_dataset(cfg);
    auto [lo, hi] = parse_range(cfg.images, static_cast<int>(images.size()));
    const AttackBudget budget = budget_of(cfg);
    std::ofstream out(cfg.output);
    if (!out)
        throw FormatError("cannot open " + cfg.output + " for writing");

    return for_images(cfg, lo, hi, out, [&](int idx) {
        CounterRng rng(CounterRng(cfg.seed).derive(idx).seed());
        const CoverageReport report = estimate_coverage(images[idx], budget, cfg.samples, rng);
        json line = json::parse(coverage_to_json_text(report));
        line["image"] = idx;
        std::cout << "image " << idx << ": coverage " << report.coverage << "\n";
        return line.dump();
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certification of neural-network robustness against vector-field deformations"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.threads = default_threads();

    auto add_common = [&](CLI::App* sub, bool with_net) {
        sub->add_option("--dataset", cfg.dataset, "dataset path")->required();
        sub->add_option("--format", cfg.format, "dataset format: idx | tensor-json");
        if (with_net)
            sub->add_option("--network", cfg.network, "network JSON path")->required();
        sub->add_option("--norm", cfg.norm, "T_p norm: inf | 1 | 2");
        sub->add_option("--delta", cfg.delta, "displacement bound")->required();
        sub->add_option("--gamma", cfg.gamma, "flow bound (number or 'inf')");
        sub->add_option("--images", cfg.images, "image range a..b (inclusive) or single index");
        sub->add_option("--output", cfg.output, "output path")->required();
        sub->add_option("--seed", cfg.seed, "rng seed");
        sub->add_option("--threads", cfg.threads, "worker threads (env VFCERT_THREADS)");
    };

    CLI::App* bounds = app.add_subcommand("bounds", "per-pixel interval bounds");
    add_common(bounds, false);

    CLI::App* certify = app.add_subcommand("certify", "certify an image range");
    add_common(certify, true);
    certify->add_option("--method", cfg.method, "interval | deeppoly | milp");
    certify->add_option("--timeout", cfg.timeout, "per-image MILP timeout (s)");
    certify->add_option("--bounds", cfg.bounds_path, "fixture PixelBounds JSON override");
    certify->add_option("--planes", cfg.planes_path, "fixture BoundingPlanes JSON override");

    CLI::App* attack = app.add_subcommand("attack", "random admissible falsification");
    add_common(attack, true);
    attack->add_option("--tries", cfg.tries, "sampled fields per image");

    CLI::App* coverage = app.add_subcommand("coverage", "sampled bound-coverage estimation");
    add_common(coverage, false);
    coverage->add_option("--samples", cfg.samples, "sampled fields per image");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bounds->parsed())
            return cmd_bounds(cfg);
        if (certify->parsed())
            return cmd_certify(cfg);
        if (attack->parsed())
            return cmd_attack(cfg);
        if (coverage->parsed())
            return cmd_coverage(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
