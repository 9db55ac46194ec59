#include <doctest.h>

#include "approx.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toy_net_fixture.hpp"
#include "test_helpers.hpp"
#include "vfcert/geometry.hpp"
#include "vfcert/planes.hpp"
#include "vfcert/sampler.hpp"

using namespace vfcert;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return std::getenv("VFCERT_CLI"); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("vfcert_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// A 2x2 image whose first two pixels are the toy example inputs; the toy
// network reads all four pixels but weights the extra two with zero.
void write_toy_net_files(const TempDir& dir, double bias3) {
    Image img(2, 1);
    img.at(1, 1) = 0.0;
    img.at(1, 2) = 0.5;
    save_tensor_json(img, (dir.path / "image.json").string());

    json net = {{"input", {{"width", 2}, {"channels", 1}}},
                {"layers",
                 json::array({json{{"kind", "flatten"}},
                              json{{"kind", "dense"},
                                   {"weights", {{2, -1, 0, 0}, {-1, 1, 0, 0}}},
                                   {"bias", {0.25, bias3}}},
                              json{{"kind", "relu"}},
                              json{{"kind", "dense"},
                                   {"weights", {{-2, 0}, {-1, 1}}},
                                   {"bias", {0, 0}}}})}};
    std::ofstream((dir.path / "net.json").string()) << net.dump();

    PixelBounds bounds(2, 1);
    bounds.lo = {0.0, 0.25, 0.0, 0.0};
    bounds.hi = {0.25, 0.75, 0.0, 0.0};
    save_bounds_json(bounds, (dir.path / "bounds.json").string());

    BoundingPlanes planes(2, 1);
    planes.entries[0] = {0.0, 0.5, 0.0, 0.125, 0.25, 0.0};
    planes.entries[1] = {0.5, 0.5, 0.0, 0.5, 0.5, 0.0};
    planes.entries[2] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    planes.entries[3] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    save_planes_json(planes, (dir.path / "planes.json").string());
}

} // namespace

TEST_CASE("cli: bounds subcommand writes one file per image") {
    if (!cli_path())
        return; // binary not provided in this environment
    TempDir dir;
    CounterRng rng(501);
    std::vector<Image> images;
    for (int k = 0; k < 5; ++k)
        images.push_back(vfcert::testing::random_image(7, 1, rng));
    save_idx(images, (dir.path / "data.idx").string());

    const int rc = run_cli("bounds --dataset " + (dir.path / "data.idx").string() +
                           " --norm inf --delta 0.5 --images 0..4 --output " +
                           (dir.path / "out").string());
    CHECK(rc == 0);
    int count = 0;
    for (auto& entry : fs::directory_iterator(dir.path / "out")) {
        ++count;
        const PixelBounds b = load_bounds_json(entry.path().string());
        CHECK(b.width == 7);
    }
    CHECK(count == 5);

    // delta = 0 gives zero-width intervals.
    const int rc0 = run_cli("bounds --dataset " + (dir.path / "data.idx").string() +
                            " --norm 2 --delta 0 --images 0 --output " +
                            (dir.path / "zero").string());
    CHECK(rc0 == 0);
    const PixelBounds z = load_bounds_json((dir.path / "zero" / "bounds_000.json").string());
    for (std::size_t k = 0; k < z.lo.size(); ++k)
        CHECK(z.lo[k] == z.hi[k]);
}

TEST_CASE("cli: certify against the toy fixtures") {
    if (!cli_path())
        return;
    TempDir dir;
    write_toy_net_files(dir, -0.125);
    const std::string common = " --dataset " + (dir.path / "image.json").string() +
                               " --format tensor-json --network " +
                               (dir.path / "net.json").string() +
                               " --norm inf --delta 0.5 --bounds " +
                               (dir.path / "bounds.json").string() + " --planes " +
                               (dir.path / "planes.json").string();

    // gamma 0.25 certifies via the flow LP.
    int rc = run_cli("certify" + common + " --gamma 0.25 --method deeppoly --output " +
                     (dir.path / "certified.jsonl").string());
    CHECK(rc == 0);
    {
        std::istringstream lines(slurp(dir.path / "certified.jsonl"));
        std::string line;
        REQUIRE(std::getline(lines, line));
        const json rec = json::parse(line);
        CHECK(rec["status"] == "certified");
        CHECK(rec["method"] == "deeppoly+flow");
        CHECK(rec["margins"]["0"].get<double>() == testing::AbsApprox(0.0625).margin(1e-9));
    }

    // Interval mode cannot certify the same fixture.
    rc = run_cli("certify" + common + " --gamma inf --method interval --output " +
                 (dir.path / "interval.jsonl").string());
    CHECK(rc == 0);
    {
        const json rec = json::parse(slurp(dir.path / "interval.jsonl"));
        CHECK(rec["status"] == "unknown");
    }
}

TEST_CASE("cli: coverage and attack determinism") {
    if (!cli_path())
        return;
    TempDir dir;
    CounterRng rng(503);
    std::vector<Image> images = {vfcert::testing::random_image(5, 1, rng)};
    save_idx(images, (dir.path / "data.idx").string());

    const std::string cov = "coverage --dataset " + (dir.path / "data.idx").string() +
                            " --norm 2 --delta 0.5 --samples 60 --seed 9 --threads 1 --output ";
    CHECK(run_cli(cov + (dir.path / "c1.jsonl").string()) == 0);
    CHECK(run_cli(cov + (dir.path / "c2.jsonl").string()) == 0);
    const std::string c1 = slurp(dir.path / "c1.jsonl");
    CHECK(c1 == slurp(dir.path / "c2.jsonl")); // byte-identical under a fixed seed
    CHECK(json::parse(c1)["coverage"].get<double>() > 0.0);

    // Constant image with two samples covers everything.
    Image constant(4, 1);
    for (double& v : constant.data())
        v = 0.25;
    save_idx({constant}, (dir.path / "const.idx").string());
    CHECK(run_cli("coverage --dataset " + (dir.path / "const.idx").string() +
                  " --norm inf --delta 0.4 --samples 2 --seed 1 --threads 1 --output " +
                  (dir.path / "c3.jsonl").string()) == 0);
    CHECK(json::parse(slurp(dir.path / "c3.jsonl"))["coverage"].get<double>() ==
          testing::AbsApprox(1.0));

    json net = {{"input", {{"width", 5}, {"channels", 1}}},
                {"layers", json::array({json{{"kind", "flatten"}},
                                        json{{"kind", "dense"},
                                             {"weights", json::array({json::array(
                                                             {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                                                              1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}),
                                                         json::array({0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                                                      0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                                                      0, 0, 0, 0, 0})})},
                                             {"bias", {0, 1000}}}})}};
    std::ofstream((dir.path / "net.json").string()) << net.dump();
    const std::string atk = "attack --dataset " + (dir.path / "data.idx").string() +
                            " --network " + (dir.path / "net.json").string() +
                            " --norm inf --delta 0.5 --tries 20 --seed 4 --threads 1 --output ";
    CHECK(run_cli(atk + (dir.path / "a1.jsonl").string()) == 0);
    const json rec = json::parse(slurp(dir.path / "a1.jsonl"));
    CHECK(rec["found"] == false); // constant-winner logits never flip
}

TEST_CASE("cli: per-image errors keep the run going and fail the exit code") {
    if (!cli_path())
        return;
    TempDir dir;
    CounterRng rng(509);
    std::vector<Image> images = {vfcert::testing::random_image(4, 1, rng),
                                 vfcert::testing::random_image(4, 1, rng)};
    save_idx(images, (dir.path / "data.idx").string());
    // Network input size does not match the 4x4 images.
    json net = {{"input", {{"size", 3}}},
                {"layers", json::array({json{{"kind", "dense"},
                                             {"weights", {{1, 1, 1}, {0, 0, 0}}},
                                             {"bias", {0, 0}}}})}};
    std::ofstream((dir.path / "net.json").string()) << net.dump();
    const int rc = run_cli("certify --dataset " + (dir.path / "data.idx").string() +
                           " --network " + (dir.path / "net.json").string() +
                           " --norm inf --delta 0.1 --threads 1 --output " +
                           (dir.path / "err.jsonl").string());
    CHECK(rc != 0);
    std::istringstream lines(slurp(dir.path / "err.jsonl"));
    std::string line;
    int error_lines = 0;
    while (std::getline(lines, line))
        if (json::parse(line)["status"] == "error")
            ++error_lines;
    CHECK(error_lines == 2); // both images recorded, run continued
}
