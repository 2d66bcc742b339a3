#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "looppencil/basis.hpp"
#include "support.hpp"

using namespace looppencil;
using namespace looppencil::testing;

namespace {
const std::vector<double> kBetas{-0.5, -0.1, 0.4, 0.0};
const double kAlpha1 = 0.35;
} // namespace

TEST_CASE("reference-system Gram entries match their closed forms") {
    // Diagonal 2 pi.
    for (int n : {-3, 0, 2}) {
        for (double beta : kBetas) {
            const BasisElement v = v0_element(n, beta, kAlpha1);
            CHECK(std::abs(basis_inner(v, v) - Complex(2.0 * kPi, 0.0)) < 1e-12);
        }
    }
    // Off-diagonal sin(2(beta_l - beta_j) pi) / (2k - 2n + beta_l - beta_j).
    for (const auto& [n, j, k, l] : {std::tuple{0, 0, 1, 2}, std::tuple{-2, 3, 1, 0},
                                     std::tuple{1, 2, 1, 1}}) {
        const BasisElement a = v0_element(n, kBetas[j], kAlpha1);
        const BasisElement b = v0_element(k, kBetas[l], kAlpha1);
        const double diff = kBetas[l] - kBetas[j];
        const double denom = 2.0 * k - 2.0 * n + diff;
        const Complex expected(std::sin(2.0 * diff * kPi) / denom, 0.0);
        CHECK(std::abs(basis_inner(a, b) - expected) < 1e-12);
    }
}

TEST_CASE("Gram of the reference system equals the exponential-system Gram") {
    const Eigen::MatrixXcd g0 = gram_v0(kBetas, kAlpha1, 4);
    const Eigen::MatrixXcd ge = gram_exponential(kBetas, 4);
    CHECK((g0 - ge).cwiseAbs().maxCoeff() < 1e-12);
    // Hermitian to machine precision.
    CHECK((g0 - g0.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("inner products are conjugate-symmetric") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        BasisElement a, b;
        a.terms.push_back({Complex(unit(rng), unit(rng)), Complex(unit(rng), unit(rng)), 0,
                           Complex(3.0 * unit(rng), 0.4 * unit(rng))});
        a.terms.push_back({Complex(unit(rng), unit(rng)), Complex(unit(rng), unit(rng)), 1,
                           Complex(3.0 * unit(rng), 0.4 * unit(rng))});
        b.terms.push_back({Complex(unit(rng), unit(rng)), Complex(unit(rng), unit(rng)), 0,
                           Complex(3.0 * unit(rng), 0.4 * unit(rng))});
        const Complex ab = basis_inner(a, b);
        const Complex ba = basis_inner(b, a);
        CHECK(std::abs(ab - std::conj(ba)) < 1e-12);
    }
}

TEST_CASE("frame bounds of the reference system stay away from zero") {
    std::vector<double> m1_by_window;
    for (int window : {6, 10, 14}) {
        std::vector<BasisElement> elements;
        for (int n = -window; n <= window; ++n)
            for (double beta : kBetas) elements.push_back(v0_element(n, beta, kAlpha1));
        const FrameBounds bounds = frame_bounds(elements);
        CHECK(bounds.m1 > 0.05);
        CHECK(bounds.m2 >= bounds.m1);
        m1_by_window.push_back(bounds.m1);
    }
    // No decay trend as the window grows.
    CHECK(m1_by_window[2] > 0.7 * m1_by_window[0]);
}

TEST_CASE("duplicated element collapses the lower frame bound") {
    std::vector<BasisElement> elements;
    for (int n = -2; n <= 2; ++n)
        for (double beta : kBetas) elements.push_back(v0_element(n, beta, kAlpha1));
    elements.push_back(elements.front());
    CHECK_THROWS_AS(frame_bounds(elements), SingularGram);
}

TEST_CASE("probe of the reference subspectrum: closeness tails decay") {
    const LoopGraphPencil pencil = reference_m3();
    std::vector<double> alphas;
    for (int j = 0; j + 1 < pencil.edge_count(); ++j) alphas.push_back(pencil.edge(j).alpha.real());
    const BetaSet betas = solve_betas(alphas);
    const int n_window = 10;
    Spectrum spectrum = locate_spectrum(pencil, betas, n_window + 1);
    number_eigenvalues(spectrum, betas, -(n_window + 1), n_window + 1);
    const Subspectrum sub =
        build_subspectrum(spectrum, betas, pencil, n_window, InverseTarget::boundary_edge);

    const EdgeCoefficients edge1 = pencil.edge(0);
    const double alpha1 = edge1.alpha.real();
    const BasisProbe probe = build_probe(sub, alpha1, [&](Complex lambda, bool with_d) {
        return integrate_edge(edge1, lambda, with_d);
    });

    const FrameBounds bounds = frame_bounds(probe);
    CHECK(bounds.m1 > 1e-3);
    MESSAGE("probe frame bounds: M1 = ", bounds.m1, ", M2 = ", bounds.m2);

    // gap_n ~ 1/n^2 per branch group; fit the log-log slope over n >= 3.
    std::vector<double> log_n, log_gap;
    for (const auto& c : probe.closeness) {
        if (c.n < 3 || c.gap_sq <= 0.0) continue;
        log_n.push_back(std::log(static_cast<double>(c.n)));
        log_gap.push_back(std::log(c.gap_sq));
    }
    REQUIRE(log_n.size() >= 5);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sx += log_n[i];
        sy += log_gap[i];
        sxx += log_n[i] * log_n[i];
        sxy += log_n[i] * log_gap[i];
    }
    const double count = static_cast<double>(log_n.size());
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    CHECK(slope < -1.2); // summable tail: the partial sums of gap_sq converge
    MESSAGE("closeness tail log-log slope: ", slope);
}

TEST_CASE("sine-type report for well-separated betas") {
    const SineTypeReport report = sine_type_check({-0.5, -0.1, 0.4, 0.0});
    CHECK(report.separated);
    CHECK(std::abs(report.separation - 0.2) < 1e-12);
    CHECK(report.bounded);
    REQUIRE(report.strips.size() == 3);
    for (const auto& strip : report.strips) {
        CHECK(strip.lower > 0.0);
        CHECK(strip.upper / strip.lower < 2.0);
    }
    // The normalized magnitude stabilizes as |Im| grows.
    CHECK(std::abs(report.strips[2].upper - report.strips[2].lower) <
          0.05 * report.strips[2].upper);
}

TEST_CASE("coincident betas break the separation test") {
    const SineTypeReport report = sine_type_check({0.2, 0.2, -0.4, 0.0});
    CHECK(report.separation < 1e-14);
    CHECK_FALSE(report.separated);
}
