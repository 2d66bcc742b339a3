#pragma once

#include <optional>
#include <string>
#include <vector>

#include "looppencil/characteristic.hpp"
#include "looppencil/pencil.hpp"
#include "looppencil/rootfinding.hpp"

namespace looppencil {

// ---------------------------------------------------------------------------
// Window roots of the limit function d and the eigenvalue lattice.
// ---------------------------------------------------------------------------

/// The 2m lattice offsets beta_k in (-1, 1): one root of the cotangent
/// equation per interval between consecutive alpha residues, plus the fixed
/// zero beta_{2m} = 0.
struct BetaSet {
    std::vector<double> values;        // size 2m; values[2m-1] == 0
    std::vector<double> source_alphas; // boundary-edge alpha_j mod 1, m-1 entries
};

/// Limit function d(lambda) whose zeros form the lattice {2n + beta_k};
/// `alphas` holds the m-1 boundary-edge means.
Complex d_function(const std::vector<double>& alphas, Complex lambda);

/// Bisection of sum_j cot((lambda - alpha_j) pi) = 2 tan(lambda pi / 2) on the
/// 2m-1 monotonicity intervals. Throws DegenerateAlphas when two residues
/// collide within `mod1_tolerance`.
BetaSet solve_betas(const std::vector<double>& alphas, double mod1_tolerance = 1e-8);

// ---------------------------------------------------------------------------
// Spectrum localization and numbering.
// ---------------------------------------------------------------------------

struct EigenvalueEntry {
    Complex lambda{0.0, 0.0};
    int multiplicity = 1;
    double residual = 0.0;
    // Numbering (n, k); k is 1-based, 0 when not yet assigned.
    int n = 0;
    int k = 0;
};

struct Spectrum {
    std::vector<EigenvalueEntry> entries;
    std::vector<std::string> diagnostics; // e.g. assignment ties (first taken)

    int total_multiplicity() const;
};

struct SpectralOptions {
    double im_height = 2.0;
    double cell_resolution = 1e-6;
    double zero_threshold = 1e-8;    // Theta classification threshold scale
    double assignment_tie = 1e-10;   // tie detection in the numbering
    IntegratorOptions ode;
    RootFindOptions rootfind;
};

/// Zeros of Delta inside the rectangle by argument-principle subdivision with
/// Newton polish. Window edges are nudged off zeros automatically.
Spectrum locate_eigenvalues(const LoopGraphPencil& pencil, Rect window,
                            const SpectralOptions& opts = {});

/// Eigenvalues covering lattice windows |n| <= n_max, located strip by strip
/// with Newton starts at the lattice points 2n + beta_k and an
/// argument-principle count as the correctness gate per strip (subdivision
/// fallback when the counts disagree).
Spectrum locate_spectrum(const LoopGraphPencil& pencil, const BetaSet& betas, int n_max,
                         const SpectralOptions& opts = {});

/// Assign (n, k) indices by value-sorted matching of roots (with
/// multiplicity) against the lattice targets 2n + beta_k; branches
/// k = m+2 .. 2m have no n = 0 member. Ties within `assignment_tie` are
/// reported in `diagnostics` and the first ordering is kept.
void number_eigenvalues(Spectrum& spectrum, const BetaSet& betas, int n_lo, int n_hi,
                        double assignment_tie = 1e-10);

// ---------------------------------------------------------------------------
// Subspectrum of the four-branch form.
// ---------------------------------------------------------------------------

enum class ThetaClass { theta1, theta2 };

struct SubspectrumEntry {
    int n = 0;
    int k = 0;                 // branch slot 1..4 in the subspectrum
    Complex lambda{0.0, 0.0};
    int multiplicity = 1;      // eigenvalue multiplicity in the spectrum
    int m_theta = 1;           // multiplicity inside the subspectrum (capped at 2)
    int occurrence = 0;        // 0 .. m_theta-1, selects the derivative order row
    ThetaClass cls = ThetaClass::theta1;
    int j_theta = -1;          // 1-based edge index with S_j(pi, lambda) = 0 (Theta2)
};

enum class InverseTarget { boundary_edge, loop };

struct Subspectrum {
    std::vector<SubspectrumEntry> entries;
    std::vector<double> betas; // the four branch offsets, slot order
    int window_n = 0;
    InverseTarget target = InverseTarget::boundary_edge;
};

struct ThetaClassification {
    ThetaClass cls = ThetaClass::theta1;
    int j_theta = -1; // 1-based
};

/// Theta1/Theta2 classification of one eigenvalue by the vanishing pattern of
/// S_j(pi, .) over the a-priori-known edges (j = 2..m for the boundary-edge
/// problem, j = 1..m-1 for the loop problem; the threshold scales with
/// 1/max(1, |lambda|)). Throws AssumptionBViolated / AssumptionDViolated on a
/// double vanishing, or when the loop factor vanishes together with d_m.
ThetaClassification classify_entry(const LoopGraphPencil& pencil, Complex lambda,
                                   InverseTarget target, const SpectralOptions& opts = {});

/// Select the four-branch index set (branch 1 skips n = 0) from a numbered
/// spectrum and classify every entry into Theta1/Theta2 by the vanishing
/// pattern of S_j(pi, lambda_theta) over the a-priori-known edges. Throws
/// AssumptionBViolated / AssumptionDViolated on double vanishing (or a
/// vanishing loop factor with d_m = 0 for the boundary-edge problem).
Subspectrum build_subspectrum(const Spectrum& spectrum, const BetaSet& betas,
                              const LoopGraphPencil& pencil, int window_n,
                              InverseTarget target, const SpectralOptions& opts = {});

// ---------------------------------------------------------------------------
// Loop sign data.
// ---------------------------------------------------------------------------

struct SignEntry {
    int n = 0;
    Complex nu{0.0, 0.0}; // zero of S_m(pi, .)
    int omega = 0;        // sign class of Q(nu_n): 0 / +1 / -1
    Complex q_value{0.0, 0.0};
    double s_residual = 0.0;
};

struct SignSequence {
    std::vector<SignEntry> entries;
};

/// Zeros nu_n of S_m(pi, .) with |Re nu| <= re_max and the sign data
/// omega_n of Q(nu_n). A real-axis scan is verified against the
/// argument-principle count; complex search fills any shortfall.
SignSequence omega_sequence(const LoopGraphPencil& pencil, double re_max,
                            const SpectralOptions& opts = {});

/// Condition (C): no omega_n vanishes (|Q(nu_n)| <= q_floor counts as zero).
AssumptionReport check_condition_C(const SignSequence& seq, double q_floor = 1e-9);

/// Checks min_n |d_m(nu_n)| > floor. Under condition (C) this must hold;
/// throws LemmaViolated if (C) holds yet a common zero shows up numerically.
bool verify_lemma_om(const LoopGraphPencil& pencil, const SignSequence& seq,
                     double floor = 1e-8, const SpectralOptions& opts = {});

} // namespace looppencil
