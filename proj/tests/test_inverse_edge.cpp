#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "looppencil/inverse.hpp"
#include "support.hpp"

using namespace looppencil;
using namespace looppencil::testing;

namespace {

struct EdgeRoundTrip {
    LoopGraphPencil pencil = reference_m3();
    BetaSet betas;
    Spectrum spectrum;
    Subspectrum sub;
    int n_window = 12;
};

const EdgeRoundTrip& edge_round_trip_data() {
    static const EdgeRoundTrip data = [] {
        EdgeRoundTrip d;
        std::vector<double> alphas;
        for (int j = 0; j + 1 < d.pencil.edge_count(); ++j)
            alphas.push_back(d.pencil.edge(j).alpha.real());
        d.betas = solve_betas(alphas);
        d.spectrum = locate_spectrum(d.pencil, d.betas, d.n_window + 1);
        number_eigenvalues(d.spectrum, d.betas, -(d.n_window + 1), d.n_window + 1);
        d.sub = build_subspectrum(d.spectrum, d.betas, d.pencil, d.n_window,
                                  InverseTarget::boundary_edge);
        return d;
    }();
    return data;
}

double eqal1_residual(double beta, const std::vector<double>& alphas) {
    double lhs = 0.0;
    for (double a : alphas) lhs += 1.0 / std::tan((beta - a) * kPi);
    const double rhs = 2.0 * (1.0 - std::cos(beta * kPi)) / std::sin(beta * kPi);
    return std::abs(lhs - rhs);
}

} // namespace

TEST_CASE("recover_alpha1 inverts the beta equation") {
    SUBCASE("m = 2 round trip") {
        const BetaSet betas = solve_betas({0.3});
        for (int k = 0; k < 3; ++k) {
            const double alpha1 = recover_alpha1(betas.values[k], {});
            CHECK(std::abs(alpha1 - 0.3) < 1e-9);
            CHECK(eqal1_residual(betas.values[k], {alpha1}) < 1e-7);
        }
    }
    SUBCASE("m = 3 with a known second edge") {
        const BetaSet betas = solve_betas({0.35, 0.62});
        const double alpha1 = recover_alpha1(betas.values[0], {0.62});
        CHECK(std::abs(alpha1 - 0.35) < 1e-9);
    }
    SUBCASE("lattice branch is rejected") {
        CHECK_THROWS_AS(recover_alpha1(0.0, {}), BranchSingular);
    }
}

TEST_CASE("branch limits from a synthetic subspectrum") {
    Subspectrum sub;
    sub.window_n = 20;
    const double beta = -0.41;
    for (int n = -20; n <= 20; ++n) {
        if (n == 0) continue;
        SubspectrumEntry e;
        e.n = n;
        e.k = 1;
        e.lambda = Complex(2.0 * n + beta + 0.3 / n - 0.05 / (n * n), 0.0);
        sub.entries.push_back(e);
    }
    CHECK(std::abs(estimate_branch_beta(sub, 1) - beta) < 1e-8);
}

TEST_CASE("main equations hold on the ground truth via exact transforms") {
    const auto& d = edge_round_trip_data();
    const Complex alpha1 = d.pencil.edge(0).alpha;
    AssemblyOptions opts;
    opts.truncation = 16;
    const ReconstructionSystem sys = assemble_system(d.pencil, d.sub, alpha1, opts);

    // Exact transforms of the kernels from shooting: g_K = lambda S_1 - sin,
    // g_N = S_1' - cos. Rows evaluated on those reproduce the right sides.
    double worst = 0.0;
    for (std::size_t i = 0; i < sys.rows.size(); ++i) {
        const RowInfo& row = sys.rows[i];
        if (row.cls == RowClass::anchor) {
            const Complex lhs = std::sin(alpha1 * kPi); // int K_1 dt at lambda = 0
            worst = std::max(worst, std::abs(lhs - sys.rhs(i)));
            continue;
        }
        REQUIRE(row.j == 0); // the reference pencil has only simple subspectrum values
        const SolutionSample sample = sample_pencil(d.pencil, row.lambda);
        const FactorPair pair = edge1_pair(sample);
        const Complex arg = (row.lambda - alpha1) * kPi;
        const Complex g_k = row.lambda * sample.edge(0).s - std::sin(arg);
        const Complex g_n = sample.edge(0).sp - std::cos(arg);
        const Complex denom = (row.cls == RowClass::theta1) ? pair.b : pair.a;
        const Complex lhs = (pair.a * g_k + row.lambda * pair.b * g_n) / denom;
        worst = std::max(worst, std::abs(lhs - sys.rhs(i)));
    }
    CHECK(worst < 1e-6);
    MESSAGE("ground-truth row residual (exact transforms): ", worst);
}

TEST_CASE("derivative-row machinery against the analytic continuation identity") {
    // At a simple eigenvalue the derivative of (scal1)/B gives
    // (f, d/dl (h/B)) = (G/B)' + lambda Delta'/B, which exercises every term
    // of the j = 1 rows without needing a double eigenvalue.
    const auto& d = edge_round_trip_data();
    const Complex alpha1 = d.pencil.edge(0).alpha;
    for (std::size_t pick : {0ul, 5ul, 17ul}) {
        const Complex lambda = d.sub.entries[pick].lambda;
        const SolutionSample s = sample_pencil(d.pencil, lambda, true);
        const FactorPair pair = edge1_pair(s);
        const Complex arg = (lambda - alpha1) * kPi;

        const Complex g_k = lambda * s.edge(0).s - std::sin(arg);
        const Complex g_n = s.edge(0).sp - std::cos(arg);
        const Complex dg_k = s.edge(0).s + lambda * s.edge(0).ds - kPi * std::cos(arg);
        const Complex dg_n = s.edge(0).dsp + kPi * std::sin(arg);

        const Complex w = pair.a / pair.b;
        const Complex dw = (pair.da * pair.b - pair.a * pair.db) / (pair.b * pair.b);
        const Complex lhs = dw * g_k + w * dg_k + g_n + lambda * dg_n;

        const Complex g = g1(s, alpha1);
        const Complex dg = g1_derivative(s, alpha1);
        const Complex rhs = (dg * pair.b - g * pair.db) / (pair.b * pair.b) +
                            lambda * delta_derivative(s) / pair.b;
        CHECK(std::abs(lhs - rhs) < 1e-6);
    }
}

TEST_CASE("solved kernels reproduce the edge characteristic data") {
    const auto& d = edge_round_trip_data();

    // Recover alpha1 from the subspectrum branches alone.
    double best_beta = 0.0, best_margin = -1.0;
    for (int slot = 1; slot <= 4; ++slot) {
        const double est = estimate_branch_beta(d.sub, slot, 4);
        if (std::abs(std::sin(est * kPi)) > best_margin) {
            best_margin = std::abs(std::sin(est * kPi));
            best_beta = est;
        }
    }
    const double alpha1 = recover_alpha1(best_beta, {d.pencil.edge(1).alpha.real()});
    CHECK(std::abs(alpha1 - 0.35) < 2e-4);

    AssemblyOptions opts;
    opts.truncation = 16;
    const ReconstructionSystem sys =
        assemble_system(d.pencil, d.sub, Complex(alpha1, 0.0), opts);
    CHECK(sys.matrix.rows() >= sys.cols());
    const KernelSolution sol = solve_kernels(sys);
    CHECK(sol.diagnostics.sigma_min > 1e-10);

    // Moment identity on the solved kernels.
    CHECK(std::abs(sol.kernels.first.integral() - std::sin(alpha1 * kPi)) < 1e-8);

    const EdgeReconstruction rec = reconstruct_edge_functions(sol.kernels, Complex(alpha1, 0.0));
    double worst_s = 0.0, worst_sp = 0.0;
    for (int i = 0; i < 30; ++i) {
        const double x = 0.41 + i * 0.37;
        const EdgeSolution truth = integrate_edge(d.pencil.edge(0), Complex(x, 0.0));
        worst_s = std::max(worst_s, std::abs(rec.s1(Complex(x, 0.0)) - truth.s));
        worst_sp = std::max(worst_sp, std::abs(rec.s1p(Complex(x, 0.0)) - truth.sp));
    }
    CHECK(worst_s < 1e-3);
    CHECK(worst_sp < 5e-3);
    MESSAGE("edge round trip at N=12, L=16: sup|s1 gap| = ", worst_s, ", sup|s1p gap| = ", worst_sp);
}

TEST_CASE("zero edge produces vanishing kernels through the solver") {
    // Unknown edge identically zero (alpha_1 = 0); the subspectrum is taken
    // directly from localized eigenvalues, bypassing the lattice numbering.
    std::vector<EdgeCoefficients> edges;
    edges.push_back(constant_edge(0.0, 0.0));
    edges.push_back(reference_m2().edge(1));
    const LoopGraphPencil pencil(std::move(edges));

    const Spectrum spectrum = locate_eigenvalues(pencil, Rect{-8.3, 8.3, -1.5, 1.5});
    Subspectrum sub;
    sub.target = InverseTarget::boundary_edge;
    sub.window_n = 8;
    sub.betas = {0.0, 0.0, 0.0, 0.0};
    for (const auto& e : spectrum.entries) {
        if (std::abs(e.lambda) < 0.3 || e.multiplicity > 1) continue;
        SubspectrumEntry entry;
        entry.lambda = e.lambda;
        entry.multiplicity = e.multiplicity;
        const auto cls = classify_entry(pencil, e.lambda, InverseTarget::boundary_edge);
        entry.cls = cls.cls;
        entry.j_theta = cls.j_theta;
        sub.entries.push_back(entry);
    }
    REQUIRE(sub.entries.size() >= 24);

    AssemblyOptions opts;
    opts.truncation = 10;
    const ReconstructionSystem sys = assemble_system(pencil, sub, Complex(0.0, 0.0), opts);
    const KernelSolution sol = solve_kernels(sys);
    CHECK(sol.kernels.first.max_abs_coefficient() < 1e-6);
    CHECK(sol.kernels.second.max_abs_coefficient() < 1e-6);

    const EdgeReconstruction rec = reconstruct_edge_functions(sol.kernels, Complex(0.0, 0.0));
    CHECK(std::abs(rec.s1(Complex(2.5, 0.0)) - std::sin(2.5 * kPi) / 2.5) < 1e-6);
    CHECK(std::abs(rec.s1(Complex(1e-9, 0.0)) - Complex(kPi, 0.0)) < 1e-6);

    // Least-squares residual is monotone under nested row sets.
    Subspectrum fewer = sub;
    fewer.entries.resize(sub.entries.size() - 6);
    const ReconstructionSystem sys_small = assemble_system(pencil, fewer, Complex(0.0, 0.0), opts);
    const KernelSolution sol_small = solve_kernels(sys_small);
    CHECK(sol_small.diagnostics.residual_norm <= sol.diagnostics.residual_norm + 1e-12);
}

TEST_CASE("solver rejects underdetermined systems") {
    const auto& d = edge_round_trip_data();
    AssemblyOptions opts;
    opts.truncation = 64; // unknowns far beyond the available rows
    const ReconstructionSystem sys =
        assemble_system(d.pencil, d.sub, d.pencil.edge(0).alpha, opts);
    CHECK_THROWS_AS(solve_kernels(sys), RankDeficient);
}

TEST_CASE("reconstruction with zero kernels is the bare sine quotient") {
    KernelPair none;
    none.first = ExpSeries(8);
    none.second = ExpSeries(8);
    const EdgeReconstruction rec = reconstruct_edge_functions(none, Complex(0.0, 0.0));
    for (double x : {0.4, 1.7, 2.5}) {
        CHECK(std::abs(rec.s1(Complex(x, 0.0)) - std::sin(x * kPi) / x) < 1e-12);
        CHECK(std::abs(rec.s1p(Complex(x, 0.0)) - std::cos(x * kPi)) < 1e-12);
    }
    // Weyl function has a pole at the Dirichlet eigenvalue lambda = 1.
    CHECK(std::abs(rec.weyl(Complex(1.0 + 1e-5, 0.0))) > 1e3);
}

TEST_CASE("weyl fit recovers smooth coefficients from truth targets") {
    const auto edge = reference_m3().edge(0);
    const auto s1 = [&edge](Complex z) { return integrate_edge(edge, z).s; };
    const auto s1p = [&edge](Complex z) { return integrate_edge(edge, z).sp; };

    SUBCASE("residual vanishes when started at the truth") {
        FitOptions opts;
        opts.degree = 6;
        opts.grid = 24;
        std::vector<double> start;
        for (int i = 0; i <= 6; ++i)
            start.push_back(i < static_cast<int>(edge.p.coefficients().size())
                                ? edge.p.coefficients()[i].real()
                                : 0.0);
        for (int i = 0; i <= 6; ++i)
            start.push_back(i < static_cast<int>(edge.q.coefficients().size())
                                ? edge.q.coefficients()[i].real()
                                : 0.0);
        opts.initial_params = start;
        opts.max_iterations = 4;
        const CoefficientFit fit = fit_edge_weyl(s1, s1p, opts);
        CHECK(fit.residual < 1e-10);
    }

    SUBCASE("cold start converges to the truth") {
        FitOptions opts;
        opts.degree = 6;
        opts.grid = 28;
        const CoefficientFit fit = fit_edge_weyl(s1, s1p, opts);
        double gap_p = 0.0, gap_q = 0.0;
        for (int i = 0; i <= 24; ++i) {
            const double x = kPi * i / 24.0;
            gap_p = std::max(gap_p, std::abs(fit.p.eval(x) - edge.p.eval(x)));
            gap_q = std::max(gap_q, std::abs(fit.q.eval(x) - edge.q.eval(x)));
        }
        CHECK(gap_p < 1e-5);
        CHECK(gap_q < 1e-4);
        MESSAGE("cold-start fit gaps: p ", gap_p, ", q ", gap_q);
    }
}
