#pragma once

#include <utility>
#include <vector>

#include "looppencil/cheb.hpp"

namespace looppencil {

/// Coefficient pair (p, q) of one edge, with the cached mean alpha = (1/pi) int_0^pi p.
struct EdgeCoefficients {
    ChebSeries p;
    ChebSeries q;
    Complex alpha{0.0, 0.0};

    EdgeCoefficients() = default;
    EdgeCoefficients(ChebSeries p_in, ChebSeries q_in)
        : p(std::move(p_in)), q(std::move(q_in)), alpha(p.mean()) {}
};

/// Pencil problem data on the star graph with one loop. All m edges have
/// parameter interval [0, pi]; the last edge (index m-1, 1-based m) is the loop.
struct LoopGraphPencil {
    std::vector<EdgeCoefficients> edges;

    LoopGraphPencil() = default;
    explicit LoopGraphPencil(std::vector<EdgeCoefficients> e);

    int edge_count() const { return static_cast<int>(edges.size()); }
    const EdgeCoefficients& edge(int j) const { return edges.at(j); } // 0-based
    const EdgeCoefficients& loop() const { return edges.back(); }

    /// alpha_j for j = 0..m-1 (0-based).
    std::vector<Complex> alphas() const;
};

/// Result of the assumption checkers; a checker fills only its own fields.
struct AssumptionReport {
    bool a_holds = false;
    bool a_i = false;   // all alpha_j real
    bool a_ii = false;  // alpha_j pairwise distinct mod 1
    bool a_iii = false; // alpha_m == 0
    bool b_holds = true;
    bool c_holds = true;
    bool d_holds = true;
    std::vector<int> violating_edges;        // (A): offending edge indices, 0-based
    std::vector<std::pair<int, int>> congruent_pairs; // (A)(ii): colliding pairs
    std::vector<int> violating_thetas;       // (B)/(D): offending subspectrum entries
    std::vector<int> vanishing_omegas;       // (C): indices n with omega_n == 0
};

/// Mean of p over [0, pi], recomputed by Gauss-Legendre quadrature that is
/// exact for the stored polynomial degree (independent of the cached value).
Complex compute_alpha(const EdgeCoefficients& edge);

/// Shift lambda -> lambda + C with C = -alpha_m, rewriting the coefficients as
/// p_j -> p_j + C, q_j -> q_j - 2 C p_j - C^2, so the returned pencil has
/// alpha_m = 0. Eigenvalues of the shifted problem are the originals plus C.
std::pair<LoopGraphPencil, Complex> normalize_shift(const LoopGraphPencil& pencil);

struct AssumptionOptions {
    double real_tolerance = 1e-10; // imaginary part allowed on alpha_j
    double mod1_tolerance = 1e-8;  // spacing of alpha_j mod 1
    double loop_tolerance = 1e-10; // |alpha_m| bound
};

AssumptionReport check_assumption_A(const LoopGraphPencil& pencil,
                                    const AssumptionOptions& opts = {});

} // namespace looppencil
