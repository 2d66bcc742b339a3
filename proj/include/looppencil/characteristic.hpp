#pragma once

#include <vector>

#include "looppencil/shooting.hpp"

namespace looppencil {

// ---------------------------------------------------------------------------
// Closed-form integrals over [-pi, pi] against exp(i mu t).
// ---------------------------------------------------------------------------

/// E(mu) = int_{-pi}^{pi} exp(i mu t) dt = 2 sin(pi mu) / mu, entire in mu.
Complex band_integral(Complex mu);
/// E'(mu) = int (i t) exp(i mu t) dt.
Complex band_integral_d1(Complex mu);
/// E''(mu) = int (i t)^2 exp(i mu t) dt.
Complex band_integral_d2(Complex mu);
/// E'''(mu) = int (i t)^3 exp(i mu t) dt.
Complex band_integral_d3(Complex mu);

// ---------------------------------------------------------------------------
// Characteristic function and its decompositions.
// ---------------------------------------------------------------------------

/// A/B factor pair of a decomposition of Delta, with optional lambda-derivatives.
struct FactorPair {
    Complex a{0.0, 0.0}, b{0.0, 0.0};
    Complex da{0.0, 0.0}, db{0.0, 0.0};
    bool has_derivatives = false;
};

/// d_m(lambda) = S_m'(pi) + C_m(pi) - 2 evaluated on the loop edge.
Complex dm(const SolutionSample& sample);
Complex dm_derivative(const SolutionSample& sample);

/// Q(lambda) = C_m(pi) - S_m'(pi).
Complex q_func(const SolutionSample& sample);

/// Characteristic function Delta(lambda) assembled from its defining sum of
/// products over the edges.
Complex delta(const SolutionSample& sample);
Complex delta_derivative(const SolutionSample& sample);

/// Decomposition Delta = A1 * S1 + B1 * S1', isolating the first boundary edge.
FactorPair edge1_pair(const SolutionSample& sample);
/// Right side G1 = -A1 sin((lambda - alpha1) pi) - lambda B1 cos((lambda - alpha1) pi).
Complex g1(const SolutionSample& sample, Complex alpha1);
Complex g1_derivative(const SolutionSample& sample, Complex alpha1);

/// Decomposition Delta = Am * Sm + Bm * d_m, isolating the loop.
FactorPair loop_pair(const SolutionSample& sample);
/// Right side Gm = -Am sin(lambda pi) - lambda Bm (2 cos(lambda pi) - 2).
Complex gm(const SolutionSample& sample);
Complex gm_derivative(const SolutionSample& sample);

/// Convenience overloads that integrate internally.
Complex delta(const LoopGraphPencil& pencil, Complex lambda, const IntegratorOptions& opts = {});
Complex dm(const LoopGraphPencil& pencil, Complex lambda, const IntegratorOptions& opts = {});
Complex q_func(const LoopGraphPencil& pencil, Complex lambda, const IntegratorOptions& opts = {});

/// Checks |alpha_m| <= tol before building the loop decomposition; the loop
/// main equations presume the normalized pencil.
void require_normalized(const LoopGraphPencil& pencil, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Transformation-kernel extraction.
// ---------------------------------------------------------------------------

/// Function on [-pi, pi] stored as a truncated exponential series plus an
/// optional linear/quadratic polynomial part:
///   f(t) = sum_{|l| <= L} c_l exp(i l t) + t_lin * t + t_quad * t^2.
/// The polynomial part absorbs the slowly decaying seam component of the
/// kernels (they are continuous on [-pi, pi] but not 2pi-periodic), which
/// keeps truncation error at the few-coefficient level.
struct ExpSeries {
    int truncation = 0;          // L
    std::vector<Complex> coef;   // size 2L+1, coefficient of exp(i l t) at index l+L
    Complex t_lin{0.0, 0.0};
    Complex t_quad{0.0, 0.0};

    ExpSeries() = default;
    explicit ExpSeries(int L) : truncation(L), coef(2 * L + 1, Complex(0.0, 0.0)) {}

    Complex at(int l) const { return coef.at(l + truncation); }
    Complex& at(int l) { return coef.at(l + truncation); }

    Complex eval(double t) const;
    /// int_{-pi}^{pi} f(t) exp(i lambda t) dt via the closed-form E integrals.
    Complex transform(Complex lambda) const;
    /// d/dlambda of transform().
    Complex transform_d1(Complex lambda) const;
    /// int_{-pi}^{pi} f(t) dt.
    Complex integral() const { return transform(Complex(0.0, 0.0)); }
    double max_abs_coefficient() const;
};

/// Kernels of the integral representations of S_j(pi,.), S_j'(pi,.), C_j(pi,.)
/// and of d_m, one triple per edge plus T = N_m + L_m for the loop.
struct KernelSet {
    int truncation = 0;
    std::vector<ExpSeries> k; // K_j
    std::vector<ExpSeries> n; // N_j
    std::vector<ExpSeries> l; // L_j
    ExpSeries t;              // T_m (loop only)
};

struct KernelExtractionOptions {
    bool fit_polynomial_tail = true;
    int tail_band = 8; // top-|l| samples per side used for the tail fit
    IntegratorOptions ode;
};

/// Sample lambda S_j(pi, lambda) - sin((lambda - alpha_j) pi) and its
/// relatives at integer lambda in [-L, L]; those samples are exactly 2 pi
/// times the exponential coefficients of the band-limited kernels.
KernelSet extract_kernels(const LoopGraphPencil& pencil, int truncation,
                          const KernelExtractionOptions& opts = {});

} // namespace looppencil
