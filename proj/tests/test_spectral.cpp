#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "looppencil/spectral.hpp"
#include "support.hpp"

using namespace looppencil;
using namespace looppencil::testing;

namespace {

// Shared forward data for the reference pencil (computed once).
struct ReferenceForward {
    LoopGraphPencil pencil = reference_m3();
    BetaSet betas;
    Spectrum spectrum; // numbered, |n| <= 6
    int n_max = 6;
};

const ReferenceForward& reference_forward() {
    static const ReferenceForward data = [] {
        ReferenceForward d;
        std::vector<double> alphas;
        for (int j = 0; j + 1 < d.pencil.edge_count(); ++j)
            alphas.push_back(d.pencil.edge(j).alpha.real());
        d.betas = solve_betas(alphas);
        d.spectrum = locate_spectrum(d.pencil, d.betas, d.n_max + 1);
        number_eigenvalues(d.spectrum, d.betas, -(d.n_max + 1), d.n_max + 1);
        Spectrum trimmed;
        for (const auto& e : d.spectrum.entries)
            if (std::abs(e.n) <= d.n_max) trimmed.entries.push_back(e);
        d.spectrum = std::move(trimmed);
        return d;
    }();
    return data;
}

double scalar_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("d_function basics") {
    const std::vector<double> alphas{0.3};
    CHECK(std::abs(d_function(alphas, Complex(0.0, 0.0))) < 1e-14);
    // 2-periodic.
    for (Complex lambda : {Complex(0.7, 0.3), Complex(-1.9, -0.2)}) {
        CHECK(std::abs(d_function(alphas, lambda + 2.0) - d_function(alphas, lambda)) < 1e-11);
    }
    // Nonzero at the alpha residues.
    CHECK(std::abs(d_function(alphas, Complex(0.3, 0.0))) > 0.1);
}

TEST_CASE("solve_betas for m = 2, alpha = 0.3") {
    const BetaSet betas = solve_betas({0.3});
    REQUIRE(betas.values.size() == 4);
    CHECK(betas.values[0] > -1.0);
    CHECK(betas.values[0] < -0.7);
    CHECK(betas.values[1] > -0.7);
    CHECK(betas.values[1] < 0.3);
    CHECK(betas.values[2] > 0.3);
    CHECK(betas.values[2] < 1.0);
    CHECK(betas.values[3] == 0.0);
    for (double beta : betas.values) {
        CHECK(std::abs(d_function({0.3}, Complex(beta, 0.0))) < 1e-10);
    }
}

TEST_CASE("betas are distinct and avoid the alpha residues") {
    const BetaSet betas = reference_forward().betas;
    for (std::size_t i = 0; i + 1 < betas.values.size() - 1; ++i) {
        for (std::size_t j = i + 1; j + 1 < betas.values.size(); ++j) {
            CHECK(std::abs(betas.values[i] - betas.values[j]) > 1e-6);
        }
    }
    for (double beta : betas.values) {
        for (double alpha : betas.source_alphas) {
            const double d = beta - alpha;
            CHECK(std::abs(d - std::round(d)) > 1e-6);
        }
    }
}

TEST_CASE("degenerate alphas are rejected") {
    CHECK_THROWS_AS(solve_betas({0.3, 0.3 + 1e-12}), DegenerateAlphas);
    CHECK_THROWS_AS(solve_betas({1e-12}), DegenerateAlphas);
}

TEST_CASE("zero pencil eigenvalues in the unit window match the closed form") {
    const auto pencil = zero_pencil(2);
    const double root_a =
        scalar_root([](double x) { return 3.0 * std::cos(kPi * x) - 2.0; }, 0.1, 0.9);
    const Spectrum spectrum =
        locate_eigenvalues(pencil, Rect{0.1, 1.5, -0.5, 0.5});
    REQUIRE(spectrum.entries.size() == 2);
    CHECK(std::abs(spectrum.entries[0].lambda - Complex(root_a, 0.0)) < 1e-9);
    CHECK(std::abs(spectrum.entries[1].lambda - Complex(1.0, 0.0)) < 1e-9);
    for (const auto& e : spectrum.entries) CHECK(e.residual < 1e-9);
}

TEST_CASE("all-zero m = 3 pencil has double eigenvalues at the integers") {
    const auto pencil = zero_pencil(3);
    const Spectrum spectrum = locate_eigenvalues(pencil, Rect{0.5, 2.5, -1.0, 1.0});
    CHECK(spectrum.total_multiplicity() == 6);
    const auto find = [&](double x) -> const EigenvalueEntry* {
        for (const auto& e : spectrum.entries)
            if (std::abs(e.lambda - Complex(x, 0.0)) < 1e-5) return &e;
        return nullptr;
    };
    REQUIRE(find(1.0) != nullptr);
    CHECK(find(1.0)->multiplicity == 2);
    REQUIRE(find(2.0) != nullptr);
    CHECK(find(2.0)->multiplicity == 2);
    REQUIRE(find(5.0 / 3.0) != nullptr);
    CHECK(find(5.0 / 3.0)->multiplicity == 1);
    REQUIRE(find(7.0 / 3.0) != nullptr);
    CHECK(find(7.0 / 3.0)->multiplicity == 1);
}

TEST_CASE("numbered spectrum of the reference pencil tracks the lattice") {
    const auto& ref = reference_forward();
    const int m = ref.pencil.edge_count();
    CHECK(ref.spectrum.entries.size() ==
          static_cast<std::size_t>((2 * ref.n_max + 1) * 2 * m - (m - 1)));
    for (const auto& e : ref.spectrum.entries) {
        CHECK(e.residual < 1e-9);
        const double target = 2.0 * e.n + ref.betas.values[e.k - 1];
        const double gap = std::abs(e.lambda - Complex(target, 0.0));
        CHECK(gap < 0.75);
        if (std::abs(e.n) >= 3) CHECK(gap < 0.5 / std::abs(e.n));
    }
}

TEST_CASE("numbering is deterministic under input shuffling") {
    const auto& ref = reference_forward();
    Spectrum original = ref.spectrum;

    Spectrum shuffled;
    for (const auto& e : original.entries) {
        EigenvalueEntry raw = e;
        raw.n = raw.k = 0;
        shuffled.entries.push_back(raw);
    }
    std::mt19937 rng(17);
    std::shuffle(shuffled.entries.begin(), shuffled.entries.end(), rng);
    // Collapse duplicated instances back to distinct roots before renumbering.
    std::vector<EigenvalueEntry> distinct;
    for (const auto& e : shuffled.entries) {
        bool seen = false;
        for (const auto& d : distinct) {
            if (std::abs(d.lambda - e.lambda) < 1e-12) {
                seen = true;
                break;
            }
        }
        if (!seen) distinct.push_back(e);
    }
    shuffled.entries = std::move(distinct);
    number_eigenvalues(shuffled, ref.betas, -(ref.n_max + 1), ref.n_max + 1);

    for (const auto& e : original.entries) {
        bool matched = false;
        for (const auto& s : shuffled.entries) {
            if (std::abs(s.lambda - e.lambda) < 1e-12 && s.n == e.n && s.k == e.k) {
                matched = true;
                break;
            }
        }
        CHECK(matched);
    }
}

TEST_CASE("spectrum covariance under the normalization shift") {
    // Loop with nonzero mean; the shifted problem must have shifted spectrum.
    std::vector<EdgeCoefficients> edges;
    edges.push_back(make_edge([](double t) { return 0.4 + 0.1 * std::cos(t); },
                              [](double t) { return 0.1 * std::sin(t); }));
    edges.push_back(make_edge([](double t) { return 0.15 + 0.15 * std::cos(t); },
                              [](double t) { return 0.1 * std::sin(2.0 * t); }));
    const LoopGraphPencil pencil(std::move(edges));
    const auto [shifted, shift] = normalize_shift(pencil);
    REQUIRE(std::abs(shift - Complex(-0.15, 0.0)) < 1e-12);

    const Rect window{0.25, 4.25, -1.0, 1.0};
    const Spectrum original = locate_eigenvalues(pencil, window);
    Rect moved = window;
    moved.re_lo += shift.real();
    moved.re_hi += shift.real();
    const Spectrum after = locate_eigenvalues(shifted, moved);
    REQUIRE(original.entries.size() == after.entries.size());
    for (std::size_t i = 0; i < original.entries.size(); ++i) {
        CHECK(std::abs(after.entries[i].lambda - original.entries[i].lambda - shift) < 1e-8);
    }
}

TEST_CASE("subspectrum selection and classification for the reference pencil") {
    const auto& ref = reference_forward();
    const Subspectrum sub = build_subspectrum(ref.spectrum, ref.betas, ref.pencil, ref.n_max,
                                              InverseTarget::boundary_edge);
    CHECK(sub.entries.size() == static_cast<std::size_t>(4 * (2 * ref.n_max + 1) - 1));
    for (const auto& e : sub.entries) {
        CHECK(e.cls == ThetaClass::theta1); // generic pencil: no vanishing S_j
        CHECK(e.m_theta == 1);
    }
    CHECK(sub.betas.size() == 4);

    const Subspectrum sub_loop =
        build_subspectrum(ref.spectrum, ref.betas, ref.pencil, ref.n_max, InverseTarget::loop);
    CHECK(sub_loop.entries.size() == sub.entries.size());
}

TEST_CASE("engineered Theta2 classification") {
    // At lambda = 3 both tuned boundary edges have vanishing S_j; only edge 2
    // counts for the boundary-edge problem, so the entry lands in Theta2.
    const auto pencil = theta2_pencil();
    const Complex lambda(3.0, 0.0);
    CHECK(std::abs(delta(pencil, lambda)) < 1e-8);

    const auto cls = classify_entry(pencil, lambda, InverseTarget::boundary_edge);
    CHECK(cls.cls == ThetaClass::theta2);
    CHECK(cls.j_theta == 2);

    // For the loop problem both vanishing boundary edges are in scope.
    CHECK_THROWS_AS(classify_entry(pencil, lambda, InverseTarget::loop), AssumptionDViolated);
}

TEST_CASE("Theta2 with the loop factor requires d_m away from zero") {
    // Edge tuned so S_1(pi, 3) = 0 with a zero loop: S_m(pi, 3) = 0 and
    // d_m(3) = -4, an admissible Theta2 entry with j_theta = m.
    std::vector<EdgeCoefficients> edges{constant_edge(5.0 / 6.0, 0.0), constant_edge(0.0, 0.0)};
    const LoopGraphPencil good(std::move(edges));
    CHECK(std::abs(delta(good, Complex(3.0, 0.0))) < 1e-9);
    const auto cls = classify_entry(good, Complex(3.0, 0.0), InverseTarget::boundary_edge);
    CHECK(cls.cls == ThetaClass::theta2);
    CHECK(cls.j_theta == 2);

    // At lambda = 2 with p_1 = 3/4: S_1(pi, 2) = 0, S_m(pi, 2) = 0 and
    // d_m(2) = 0 as well; the boundary-edge problem must reject this theta.
    std::vector<EdgeCoefficients> edges2{constant_edge(3.0 / 4.0, 0.0), constant_edge(0.0, 0.0)};
    const LoopGraphPencil bad(std::move(edges2));
    CHECK(std::abs(delta(bad, Complex(2.0, 0.0))) < 1e-9);
    CHECK_THROWS_AS(classify_entry(bad, Complex(2.0, 0.0), InverseTarget::boundary_edge),
                    AssumptionBViolated);
}

TEST_CASE("omega sequence of the zero loop vanishes everywhere") {
    const auto pencil = zero_pencil(2);
    const SignSequence seq = omega_sequence(pencil, 4.6);
    REQUIRE(seq.entries.size() == 8); // nonzero integers -4..4
    for (const auto& e : seq.entries) {
        CHECK(std::abs(e.nu - Complex(e.n, 0.0)) < 1e-9);
        CHECK(e.n != 0);
        CHECK(e.omega == 0);
    }
    CHECK_FALSE(check_condition_C(seq).c_holds);
    // d_m(nu_n) = 2 cos(n pi) - 2 vanishes at even n: the lemma's conclusion
    // genuinely fails once (C) is dropped.
    CHECK_FALSE(verify_lemma_om(pencil, seq));
}

TEST_CASE("omega sequence of the reference loop satisfies condition (C)") {
    const auto pencil = reference_m3();
    const SignSequence seq = omega_sequence(pencil, 5.6);
    CHECK(seq.entries.size() >= 10);
    for (const auto& e : seq.entries) {
        CHECK(e.s_residual < 1e-9);
        CHECK(e.omega != 0);
        // Wronskian consequence at the zeros: C_m S_m' = 1.
        const EdgeSolution loop = integrate_edge(pencil.loop(), e.nu);
        CHECK(std::abs(loop.c * loop.sp - Complex(1.0, 0.0)) < 1e-9);
    }
    CHECK(check_condition_C(seq).c_holds);
    CHECK(verify_lemma_om(pencil, seq));
}
