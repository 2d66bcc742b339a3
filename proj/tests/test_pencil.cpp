#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "looppencil/pencil.hpp"
#include "support.hpp"

using namespace looppencil;
using namespace looppencil::testing;

TEST_CASE("alpha of simple coefficient functions") {
    CHECK(std::abs(compute_alpha(constant_edge(0.0, 0.0))) < 1e-15);
    CHECK(std::abs(compute_alpha(constant_edge(0.7, 0.3)) - Complex(0.7, 0.0)) < 1e-14);
    const auto cosine = make_edge([](double t) { return std::cos(t); },
                                  [](double) { return 0.0; }, 20);
    CHECK(std::abs(compute_alpha(cosine)) < 1e-12);
}

TEST_CASE("cached alpha agrees with quadrature recompute") {
    std::mt19937 rng(91);
    for (int trial = 0; trial < 12; ++trial) {
        const auto pencil = random_pencil(rng, 2 + trial % 3, trial % 2 == 1);
        for (const auto& edge : pencil.edges) {
            const Complex recomputed = compute_alpha(edge);
            const double scale = std::max(1.0, std::abs(edge.alpha));
            CHECK(std::abs(recomputed - edge.alpha) / scale < 1e-12);
        }
    }
}

TEST_CASE("normalize_shift on a constant loop") {
    std::vector<EdgeCoefficients> edges;
    edges.push_back(constant_edge(0.4, 0.0));
    edges.push_back(constant_edge(1.0, 0.0)); // alpha_m = 1
    const LoopGraphPencil pencil(std::move(edges));

    const auto [shifted, shift] = normalize_shift(pencil);
    CHECK(std::abs(shift - Complex(-1.0, 0.0)) < 1e-14);
    CHECK(std::abs(shifted.loop().alpha) < 1e-12);
    // q_m -> q_m - 2 C p_m - C^2 = 0 - 2(-1)(1) - 1 = 1.
    CHECK(std::abs(shifted.loop().q.eval(1.0) - Complex(1.0, 0.0)) < 1e-13);
    CHECK(std::abs(shifted.loop().p.eval(2.0)) < 1e-13);

    // Applying the shift twice changes nothing further.
    const auto [twice, shift2] = normalize_shift(shifted);
    CHECK(std::abs(shift2) < 1e-12);
    for (int j = 0; j < pencil.edge_count(); ++j) {
        CHECK(std::abs(twice.edge(j).p.eval(0.3) - shifted.edge(j).p.eval(0.3)) < 1e-12);
        CHECK(std::abs(twice.edge(j).q.eval(0.3) - shifted.edge(j).q.eval(0.3)) < 1e-12);
    }
}

TEST_CASE("assumption (A) checker") {
    SUBCASE("all-zero means fail (ii)") {
        const auto report = check_assumption_A(zero_pencil(3));
        CHECK_FALSE(report.a_holds);
        CHECK_FALSE(report.a_ii);
        CHECK(report.a_i);
        CHECK(report.a_iii);
        CHECK(report.congruent_pairs.size() == 3);
    }
    SUBCASE("distinct residues pass") {
        std::vector<EdgeCoefficients> edges{constant_edge(0.3, 0.0), constant_edge(0.7, 0.0),
                                            constant_edge(0.0, 0.0)};
        const auto report = check_assumption_A(LoopGraphPencil(std::move(edges)));
        CHECK(report.a_holds);
    }
    SUBCASE("congruent residues fail (ii)") {
        std::vector<EdgeCoefficients> edges{constant_edge(0.3, 0.0), constant_edge(1.3, 0.0),
                                            constant_edge(0.0, 0.0)};
        const auto report = check_assumption_A(LoopGraphPencil(std::move(edges)));
        CHECK_FALSE(report.a_ii);
        REQUIRE(report.congruent_pairs.size() == 1);
        CHECK(report.congruent_pairs[0] == std::make_pair(0, 1));
    }
    SUBCASE("complex mean fails (i), nonzero loop mean fails (iii)") {
        std::vector<EdgeCoefficients> edges{
            EdgeCoefficients(ChebSeries({Complex(0.3, 0.1)}), ChebSeries()),
            constant_edge(0.6, 0.0)};
        const auto report = check_assumption_A(LoopGraphPencil(std::move(edges)));
        CHECK_FALSE(report.a_i);
        CHECK_FALSE(report.a_iii);
    }
}
