#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "looppencil/spectral.hpp"

namespace looppencil {

/// Solution vector of a main-equation system: the two unknown functions on
/// [-pi, pi], e.g. (K_1, N_1) for the boundary edge or (K_m, T_m) for the loop.
struct KernelPair {
    ExpSeries first;
    ExpSeries second;
};

enum class RowClass { anchor, theta1, theta2 };

struct RowInfo {
    RowClass cls = RowClass::anchor;
    int n = 0, k = 0, j = 0; // subspectrum index and derivative order
    Complex lambda{0.0, 0.0};
};

/// Discretized main equations: one row per (theta, j) pair plus the moment
/// anchor row. Unknowns are the exponential coefficients of both kernel
/// components (plus the two polynomial tail columns per component when
/// enabled); every matrix entry is a closed-form integral, no quadrature.
struct ReconstructionSystem {
    InverseTarget target = InverseTarget::boundary_edge;
    int truncation = 0;
    bool polynomial_columns = true;
    Complex alpha1{0.0, 0.0}; // 0 for the loop system
    Eigen::MatrixXcd matrix;
    Eigen::VectorXcd rhs;
    std::vector<RowInfo> rows;

    int block_cols() const { return 2 * truncation + 1 + (polynomial_columns ? 2 : 0); }
    int cols() const { return 2 * block_cols(); }
};

struct AssemblyOptions {
    int truncation = 32;
    bool polynomial_columns = true;
    double division_floor = 1e-10; // |B| (Theta1) resp. |A| (Theta2) must exceed this
    IntegratorOptions ode;
};

/// Main equations for the boundary-edge problem: rows h_1/B_1 on Theta1,
/// h_1/A_1 on Theta2, lambda-derivative rows for m_theta = 2, and the anchor
/// row with right side sin(alpha1 pi). `known` supplies edges 2..m; edge 1 of
/// the pencil is never evaluated.
ReconstructionSystem assemble_system(const LoopGraphPencil& known, const Subspectrum& sub,
                                     Complex alpha1, const AssemblyOptions& opts = {});

/// Main equations for the loop problem (anchor right side 0). `known`
/// supplies edges 1..m-1; the loop edge is never evaluated. Requires the
/// normalized pencil and condition (C) checked upstream; `omega` is carried
/// along for downstream verification only.
ReconstructionSystem assemble_loop_system(const LoopGraphPencil& known, const Subspectrum& sub,
                                          const SignSequence& omega,
                                          const AssemblyOptions& opts = {});

struct SolveOptions {
    double regularization = 0.0;  // Tikhonov parameter; 0 = plain least squares
    double anchor_weight = 64.0;  // relative emphasis of the moment row
    double escalate_below = 1e-12; // sigma_min threshold for auto-regularization
    double escalated_value = 1e-10;
};

struct SolveDiagnostics {
    double residual_norm = 0.0;     // least-squares residual of the equilibrated system
    double max_row_residual = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double condition = 0.0;
    double regularization_used = 0.0;
    int rank = 0;
};

struct KernelSolution {
    KernelPair kernels;
    SolveDiagnostics diagnostics;
};

/// Row-equilibrated least-squares solve by SVD with optional Tikhonov filter.
KernelSolution solve_kernels(const ReconstructionSystem& system, const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// Reconstructed characteristic data.
// ---------------------------------------------------------------------------

/// S_1(pi, .) and S_1'(pi, .) resynthesized from solved kernels; both entire
/// (the removable singularity at lambda = 0 is evaluated by its limit).
class EdgeReconstruction {
public:
    EdgeReconstruction(KernelPair kernels, Complex alpha1);

    Complex s1(Complex lambda) const;
    Complex s1p(Complex lambda) const;
    /// Weyl function S_1'(pi, .) / S_1(pi, .) of the Dirichlet problem on edge 1.
    Complex weyl(Complex lambda) const { return s1p(lambda) / s1(lambda); }

    const KernelPair& kernels() const { return kernels_; }
    Complex alpha1() const { return alpha1_; }

private:
    KernelPair kernels_;
    Complex alpha1_;
    Complex numerator_at_zero_;
};

EdgeReconstruction reconstruct_edge_functions(const KernelPair& kernels, Complex alpha1);

/// S_m(pi, .) and d_m(.) resynthesized from solved loop kernels.
class LoopReconstruction {
public:
    explicit LoopReconstruction(KernelPair kernels);

    Complex sm(Complex lambda) const;
    Complex dm(Complex lambda) const;
    const KernelPair& kernels() const { return kernels_; }

private:
    KernelPair kernels_;
    Complex numerator_at_zero_;
};

LoopReconstruction reconstruct_loop_functions(const KernelPair& kernels);

// ---------------------------------------------------------------------------
// Branch data recovery.
// ---------------------------------------------------------------------------

/// Limit beta of a subspectrum branch from lambda_{n,slot} - 2n, extrapolated
/// in 1/n by least squares over |n| >= n_min.
double estimate_branch_beta(const Subspectrum& sub, int slot, int n_min = 4);

/// alpha_1 mod 1 (canonicalized into [0, 1)) from a branch limit beta1 and
/// the known boundary means alpha_2 .. alpha_{m-1}, via the cotangent
/// equation at lambda = beta1. Throws BranchSingular when sin(beta1 pi) ~ 0.
double recover_alpha1(double beta1, const std::vector<double>& known_boundary_alphas);

// ---------------------------------------------------------------------------
// Coefficient fits against reconstructed data.
// ---------------------------------------------------------------------------

struct FitOptions {
    int degree = 8;          // Chebyshev degree of fitted p and q
    int max_iterations = 50;
    int grid = 48;           // sample count of the lambda grid
    double pole_floor = 0.18; // |lambda S_1| below this marks a Weyl pole region
    std::vector<double> initial_params; // [p coefficients, q coefficients]; empty = zeros
    IntegratorOptions ode;
};

struct CoefficientFit {
    ChebSeries p;
    ChebSeries q;
    double residual = 0.0;
    int iterations = 0;
};

using CharacteristicFn = std::function<Complex(Complex)>;

/// Gauss-Newton fit of (p_1, q_1) matching the shooting Weyl function to the
/// reconstructed one on a pole-avoiding real grid.
CoefficientFit fit_edge_coefficients(const EdgeReconstruction& target, const FitOptions& opts = {});
/// Same fit against arbitrary target functions S_1(pi, .), S_1'(pi, .).
CoefficientFit fit_edge_weyl(const CharacteristicFn& s1, const CharacteristicFn& s1p,
                             const FitOptions& opts = {});

/// Gauss-Newton fit of (p_m, q_m) matching lambda S_m(pi, .) and d_m on a
/// real grid.
CoefficientFit fit_loop_coefficients(const LoopReconstruction& target, const FitOptions& opts = {});
CoefficientFit fit_loop_targets(const CharacteristicFn& sm, const CharacteristicFn& dm,
                                const FitOptions& opts = {});

// ---------------------------------------------------------------------------
// Loop verification.
// ---------------------------------------------------------------------------

struct LoopVerification {
    double max_nu_gap = 0.0;      // |nu_hat - nu| over the matched zeros
    double min_dm_at_zeros = 0.0; // min |dm_hat(nu_hat)|
    bool omega_consistent = false; // (dm_hat + 2)^2 - 4 stays away from 0 where omega != 0
    bool has_truth = false;
    double sup_gap_s = 0.0;       // vs truth on a real grid
    double sup_gap_dm = 0.0;
    bool omega_matches_truth = false;
};

LoopVerification verify_loop_recovery(const LoopReconstruction& rec, const SignSequence& omega,
                                      const LoopGraphPencil* truth = nullptr,
                                      const SpectralOptions& opts = {});

} // namespace looppencil
