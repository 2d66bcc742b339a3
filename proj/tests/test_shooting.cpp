#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "looppencil/shooting.hpp"
#include "support.hpp"

using namespace looppencil;
using namespace looppencil::testing;

namespace {

// Constant-coefficient oracle: -y'' + (q + 2 lambda p) y = lambda^2 y has
// y ~ exp(+- i omega x) with omega^2 = lambda^2 - 2 p lambda - q.
EdgeSolution constant_oracle(double p, double q, Complex lambda) {
    const Complex w2 = lambda * lambda - 2.0 * p * lambda - q;
    const Complex w = std::sqrt(w2);
    EdgeSolution out;
    if (std::abs(w) < 1e-8) {
        out.s = kPi;
        out.sp = 1.0;
        out.c = 1.0;
        out.cp = 0.0;
        return out;
    }
    out.s = std::sin(w * kPi) / w;
    out.sp = std::cos(w * kPi);
    out.c = std::cos(w * kPi);
    out.cp = -w * std::sin(w * kPi);
    return out;
}

} // namespace

TEST_CASE("zero coefficients match the closed form") {
    const auto edge = constant_edge(0.0, 0.0);
    for (Complex lambda : {Complex(2.0, 0.5), Complex(-3.2, -1.1), Complex(0.7, 0.0)}) {
        const EdgeSolution e = integrate_edge(edge, lambda);
        CHECK(std::abs(e.s - std::sin(lambda * kPi) / lambda) < 1e-10);
        CHECK(std::abs(e.sp - std::cos(lambda * kPi)) < 1e-10);
        CHECK(std::abs(e.c - std::cos(lambda * kPi)) < 1e-10);
        CHECK(std::abs(e.cp + lambda * std::sin(lambda * kPi)) < 1e-10);
    }
}

TEST_CASE("lambda = 0 end values") {
    const EdgeSolution e = integrate_edge(constant_edge(0.0, 0.0), Complex(0.0, 0.0));
    CHECK(std::abs(e.s - Complex(kPi, 0.0)) < 1e-12);
    CHECK(std::abs(e.sp - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(e.c - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(e.cp) < 1e-12);
}

TEST_CASE("constant coefficients match the shifted oracle") {
    std::mt19937 rng(12);
    const auto lambdas = random_lambdas(rng, 12, 15.0, 1.5);
    for (const auto& [p, q] : {std::pair{0.8, 0.0}, std::pair{-0.4, 0.6}, std::pair{1.2, -0.9}}) {
        const auto edge = constant_edge(p, q);
        for (Complex lambda : lambdas) {
            const EdgeSolution got = integrate_edge(edge, lambda);
            const EdgeSolution want = constant_oracle(p, q, lambda);
            CHECK(std::abs(got.s - want.s) < 1e-10);
            CHECK(std::abs(got.sp - want.sp) < 1e-10);
            CHECK(std::abs(got.c - want.c) < 1e-10);
            CHECK(std::abs(got.cp - want.cp) < 1e-10);
        }
    }
}

TEST_CASE("wronskian identity holds across random pencils") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 6; ++trial) {
        const auto pencil = random_pencil(rng, 2 + trial % 3, trial % 2 == 0);
        for (const Complex lambda : random_lambdas(rng, 8)) {
            const SolutionSample sample = sample_pencil(pencil, lambda);
            CHECK(wronskian_defect(sample) < 1e-9);
        }
    }
}

TEST_CASE("wronskian defect at a specific complex point") {
    const SolutionSample sample = sample_pencil(reference_m3(), Complex(10.0, 5.0));
    CHECK(wronskian_defect(sample) < 1e-9);
}

TEST_CASE("variational lambda-derivatives match finite differences") {
    std::mt19937 rng(5);
    const auto pencil = reference_m3();
    const auto lambdas = random_lambdas(rng, 20, 20.0, 1.0);
    const double h = 1e-5;
    for (Complex lambda : lambdas) {
        for (int j = 0; j < pencil.edge_count(); ++j) {
            const EdgeSolution mid = integrate_edge(pencil.edge(j), lambda, true);
            const EdgeSolution plus = integrate_edge(pencil.edge(j), lambda + h);
            const EdgeSolution minus = integrate_edge(pencil.edge(j), lambda - h);
            const auto relative = [](Complex got, Complex want) {
                return std::abs(got - want) / std::max(1e-6, std::abs(want));
            };
            CHECK(relative(mid.ds, (plus.s - minus.s) / (2.0 * h)) < 1e-6);
            CHECK(relative(mid.dsp, (plus.sp - minus.sp) / (2.0 * h)) < 1e-6);
            CHECK(relative(mid.dc, (plus.c - minus.c) / (2.0 * h)) < 1e-6);
            CHECK(relative(mid.dcp, (plus.cp - minus.cp) / (2.0 * h)) < 1e-6);
        }
    }
}

TEST_CASE("step budget exhaustion raises StepFailure") {
    IntegratorOptions opts;
    opts.max_steps = 5;
    CHECK_THROWS_AS(integrate_edge(reference_m3().edge(0), Complex(40.0, 0.0), false, opts),
                    StepFailure);
}
