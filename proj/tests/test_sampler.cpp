#include <doctest.h>

#include "approx.hpp"

#include <cmath>

#include "test_helpers.hpp"
#include "vfcert/sampler.hpp"
#include "vfcert/verifier.hpp"

using namespace vfcert;
using vfcert::testing::lp_norm;
using vfcert::testing::random_image;

TEST_CASE("counter rng is reproducible and stream-independent") {
    CounterRng a(42), b(42);
    for (int k = 0; k < 100; ++k)
        CHECK(a.next_u64() == b.next_u64());
    // Derived streams do not depend on how much of the parent was consumed.
    CounterRng c(42);
    c.next_u64();
    CHECK(CounterRng(42).derive(3).next_u64() == c.derive(3).next_u64());
    // Pinned first output so other implementations can check their port.
    CounterRng pinned(0);
    CHECK(pinned.next_u64() == CounterRng::mix(0x9E3779B97F4A7C15ULL));
}

TEST_CASE("sample_field: degenerate budgets") {
    // delta = 0 gives the zero field.
    VectorField f = sample_field(5, AttackBudget(Norm::L2, 0.0, kInf), CounterRng(1));
    for (double v : f.dx)
        CHECK(v == 0.0);
    // gamma = 0 forces a constant field (translation); with the in-image
    // rule on a full grid that is the zero field.
    f = sample_field(5, AttackBudget(Norm::LInf, 0.5, 0.0), CounterRng(2));
    for (std::size_t k = 0; k < f.dx.size(); ++k) {
        CHECK(f.dx[k] == f.dx[0]);
        CHECK(f.dy[k] == f.dy[0]);
    }
    CHECK(f.dx[0] == 0.0);
}

TEST_CASE("sample_field: admissibility across budgets") {
    for (Norm p : {Norm::L1, Norm::L2, Norm::LInf}) {
        for (double gamma : {kInf, 0.5, 0.1}) {
            const AttackBudget budget(p, 0.5, gamma);
            for (int s = 0; s < 200; ++s) {
                const VectorField f = sample_field(6, budget, CounterRng(9000 + s));
                // Independent checker: re-verify the T_p bound, Eq. 2 and
                // the in-image rule directly.
                for (int i = 1; i <= 6; ++i) {
                    for (int j = 1; j <= 6; ++j) {
                        CHECK(lp_norm(f.dx_at(i, j), f.dy_at(i, j), p) <= 0.5 + 1e-12);
                        CHECK(i + f.dx_at(i, j) >= 1.0 - 1e-12);
                        CHECK(i + f.dx_at(i, j) <= 6.0 + 1e-12);
                        CHECK(j + f.dy_at(i, j) >= 1.0 - 1e-12);
                        CHECK(j + f.dy_at(i, j) <= 6.0 + 1e-12);
                        if (gamma < kInf) {
                            if (j < 6) {
                                CHECK(std::abs(f.dx_at(i, j) - f.dx_at(i, j + 1)) <= gamma + 1e-9);
                                CHECK(std::abs(f.dy_at(i, j) - f.dy_at(i, j + 1)) <= gamma + 1e-9);
                            }
                            if (i < 6) {
                                CHECK(std::abs(f.dx_at(i, j) - f.dx_at(i + 1, j)) <= gamma + 1e-9);
                                CHECK(std::abs(f.dy_at(i, j) - f.dy_at(i + 1, j)) <= gamma + 1e-9);
                            }
                        }
                    }
                }
                CHECK(field_admissible(f, budget));
            }
        }
    }
}

TEST_CASE("sample_field: determinism under a fixed seed") {
    const AttackBudget budget(Norm::L2, 0.7, 0.2);
    const VectorField a = sample_field(5, budget, CounterRng(77));
    const VectorField b = sample_field(5, budget, CounterRng(77));
    CHECK(a.dx == b.dx);
    CHECK(a.dy == b.dy);
}

TEST_CASE("random_attack: constant logits never flip") {
    const Network net = dense_network(9, {{{0, 0, 0, 0, 0, 0, 0, 0, 0},
                                           {0, 0, 0, 0, 0, 0, 0, 0, 0}}},
                                      {{1.0, 0.0}});
    CounterRng rng(3);
    Image img = random_image(3, 1, rng);
    const auto hit = random_attack(net, img, AttackBudget(Norm::LInf, 0.9), 0, 50, CounterRng(5));
    CHECK(!hit.has_value());
}

TEST_CASE("random_attack finds and re-verifies flips on fragile nets") {
    CounterRng rng(401);
    int found = 0;
    for (int trial = 0; trial < 5; ++trial) {
        Image img = random_image(4, 1, rng);
        std::vector<std::vector<double>> w(3, std::vector<double>(16));
        std::vector<double> b(3);
        for (auto& row : w)
            for (double& v : row)
                v = 3.0 * (2 * rng.next_double() - 1);
        for (double& v : b)
            v = 0.05 * (2 * rng.next_double() - 1);
        const Network net = dense_network(16, {w}, {b});
        const int label = argmax_label(forward(net, img));
        const AttackBudget budget(Norm::LInf, 0.9);
        const auto hit = random_attack(net, img, budget, label, 200, CounterRng(600 + trial));
        if (!hit)
            continue;
        ++found;
        CHECK(field_admissible(hit->first, budget));
        const std::vector<double> logits = forward(net, deform(img, hit->first));
        CHECK(argmax_label(logits) == hit->second);
        CHECK(hit->second != label);
    }
    CHECK(found >= 1);
}

TEST_CASE("estimate_coverage: trivial cases and containment") {
    Image constant(6, 1);
    for (double& v : constant.data())
        v = 0.5;
    CoverageReport r = estimate_coverage(constant, AttackBudget(Norm::L2, 0.8), 2, CounterRng(1));
    CHECK(r.coverage == testing::AbsApprox(1.0));

    CounterRng rng(409);
    Image img = random_image(6, 1, rng);
    r = estimate_coverage(img, AttackBudget(Norm::L2, 0.0), 2, CounterRng(2));
    CHECK(r.coverage == testing::AbsApprox(1.0));

    r = estimate_coverage(img, AttackBudget(Norm::L2, 0.7), 500, CounterRng(3));
    CHECK(r.coverage > 0.5);
    CHECK(r.coverage <= 1.0 + 1e-12);
    for (std::size_t k = 0; k < r.sampled.lo.size(); ++k) {
        CHECK(r.sampled.lo[k] >= r.certified.lo[k] - 1e-12);
        CHECK(r.sampled.hi[k] <= r.certified.hi[k] + 1e-12);
    }

    CHECK_THROWS_AS(estimate_coverage(img, AttackBudget(Norm::L2, 0.5), 1, CounterRng(4)),
                    ArgumentError);
}

TEST_CASE("field and coverage json") {
    const AttackBudget budget(Norm::L1, 0.4, 0.3);
    const VectorField f = sample_field(4, budget, CounterRng(55));
    const VectorField back = field_from_json_text(field_to_json_text(f));
    CHECK(back.width == f.width);
    CHECK(back.dx == f.dx);
    CHECK(back.dy == f.dy);

    CounterRng rng(419);
    Image img = random_image(4, 1, rng);
    const CoverageReport r = estimate_coverage(img, budget, 50, CounterRng(6));
    const std::string text = coverage_to_json_text(r);
    CHECK(text.find("\"coverage\"") != std::string::npos);
    CHECK(text.find("\"s_l\"") != std::string::npos);
}

TEST_CASE("attack never flips a milp-certified instance") {
    CounterRng rng(421);
    for (int trial = 0; trial < 4; ++trial) {
        Image img = random_image(4, 1, rng);
        std::vector<std::vector<double>> w1(6, std::vector<double>(16)), w2(3, std::vector<double>(6));
        std::vector<double> b1(6), b2(3);
        for (auto& row : w1)
            for (double& v : row)
                v = 0.4 * (2 * rng.next_double() - 1);
        for (auto& row : w2)
            for (double& v : row)
                v = 0.4 * (2 * rng.next_double() - 1);
        for (double& v : b1)
            v = 0.1 * (2 * rng.next_double() - 1);
        for (double& v : b2)
            v = 0.1 * (2 * rng.next_double() - 1);
        const Network net = dense_network(16, {w1, w2}, {b1, b2});
        const AttackBudget budget(Norm::L2, 0.3);
        const CertificationReport r = certify_image(net, img, budget, Method::Milp);
        if (r.status != "certified")
            continue;
        const int label = argmax_label(forward(net, img));
        const auto hit = random_attack(net, img, budget, label, 300, CounterRng(800 + trial));
        CHECK(!hit.has_value());
    }
}
