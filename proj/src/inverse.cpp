#include "looppencil/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace looppencil {

namespace {

constexpr double kPi = ChebSeries::kPi;
const Complex kI(0.0, 1.0);

// Sample every edge except `skip` (whose kernel is the unknown); the skipped
// slot stays defaulted and must not be read by the factor assembly.
SolutionSample sample_without_edge(const LoopGraphPencil& pencil, Complex lambda, int skip,
                                   bool with_derivative, const IntegratorOptions& ode) {
    SolutionSample sample;
    sample.lambda = lambda;
    sample.edges.resize(pencil.edge_count());
    for (int j = 0; j < pencil.edge_count(); ++j) {
        if (j == skip) {
            sample.edges[j].has_derivatives = with_derivative;
            continue;
        }
        sample.edges[j] = integrate_edge(pencil.edge(j), lambda, with_derivative, ode);
    }
    return sample;
}

struct ThetaValues {
    Complex a, b, da, db; // decomposition pair at lambda_theta
    Complex g, dg;        // right-hand function and its derivative
};

ThetaValues edge_values(const LoopGraphPencil& known, Complex lambda, Complex alpha1,
                        bool with_derivative, const IntegratorOptions& ode) {
    const SolutionSample sample = sample_without_edge(known, lambda, 0, with_derivative, ode);
    const FactorPair p = edge1_pair(sample);
    ThetaValues v;
    v.a = p.a;
    v.b = p.b;
    v.da = p.da;
    v.db = p.db;
    const Complex arg = (lambda - alpha1) * kPi;
    const Complex s = std::sin(arg), c = std::cos(arg);
    v.g = -p.a * s - lambda * p.b * c;
    if (with_derivative)
        v.dg = -p.da * s - p.a * kPi * c - (p.b + lambda * p.db) * c + lambda * p.b * kPi * s;
    return v;
}

ThetaValues loop_values(const LoopGraphPencil& known, Complex lambda, bool with_derivative,
                        const IntegratorOptions& ode) {
    const SolutionSample sample =
        sample_without_edge(known, lambda, known.edge_count() - 1, with_derivative, ode);
    const FactorPair p = loop_pair(sample);
    ThetaValues v;
    v.a = p.a;
    v.b = p.b;
    v.da = p.da;
    v.db = p.db;
    const Complex arg = lambda * kPi;
    const Complex s = std::sin(arg), c = std::cos(arg);
    v.g = -p.a * s - lambda * p.b * (2.0 * c - 2.0);
    if (with_derivative)
        v.dg = -p.da * s - p.a * kPi * c - (p.b + lambda * p.db) * (2.0 * c - 2.0) +
               lambda * p.b * 2.0 * kPi * s;
    return v;
}

ReconstructionSystem assemble_impl(const LoopGraphPencil& known, const Subspectrum& sub,
                                   InverseTarget target, Complex alpha1,
                                   const AssemblyOptions& opts) {
    const int L = opts.truncation;
    ReconstructionSystem sys;
    sys.target = target;
    sys.truncation = L;
    sys.polynomial_columns = opts.polynomial_columns;
    sys.alpha1 = alpha1;

    const int bc = sys.block_cols();
    const int n_rows = static_cast<int>(sub.entries.size()) + 1;
    sys.matrix = Eigen::MatrixXcd::Zero(n_rows, 2 * bc);
    sys.rhs = Eigen::VectorXcd::Zero(n_rows);
    sys.rows.reserve(n_rows);

    // Anchor row: (f, [1,0]) = int of the first component.
    sys.matrix(0, L) = 2.0 * kPi; // l = 0 column of the first block
    if (opts.polynomial_columns) sys.matrix(0, 2 * L + 2) = 2.0 * kPi * kPi * kPi / 3.0; // t^2 column
    sys.rhs(0) = (target == InverseTarget::boundary_edge)
                     ? std::sin(alpha1 * kPi)
                     : Complex(0.0, 0.0);
    sys.rows.push_back(RowInfo{RowClass::anchor, 0, 0, 0, Complex(0.0, 0.0)});

    // Values per distinct lambda (derivative data only where m_theta = 2).
    std::vector<int> primary(sub.entries.size());
    std::vector<ThetaValues> values(sub.entries.size());
    for (std::size_t i = 0; i < sub.entries.size(); ++i) {
        const auto& e = sub.entries[i];
        primary[i] = static_cast<int>(i);
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(sub.entries[j].lambda - e.lambda) <=
                1e-9 * std::max(1.0, std::abs(e.lambda))) {
                primary[i] = primary[j];
                break;
            }
        }
        if (primary[i] != static_cast<int>(i)) continue;
        values[i] = (target == InverseTarget::boundary_edge)
                        ? edge_values(known, e.lambda, alpha1, e.m_theta > 1, opts.ode)
                        : loop_values(known, e.lambda, e.m_theta > 1, opts.ode);
    }

    int row = 1;
    for (std::size_t i = 0; i < sub.entries.size(); ++i, ++row) {
        const auto& e = sub.entries[i];
        const ThetaValues& v = values[primary[i]];
        const Complex lambda = e.lambda;
        const int j = e.occurrence;

        // Column value and lambda-derivative for every unknown column.
        const auto col = [&](int c) -> std::pair<Complex, Complex> {
            if (c <= 2 * L) {
                const Complex mu = lambda + static_cast<double>(c - L);
                return {band_integral(mu), band_integral_d1(mu)};
            }
            if (c == 2 * L + 1) return {-kI * band_integral_d1(lambda), -kI * band_integral_d2(lambda)};
            return {-band_integral_d2(lambda), -band_integral_d3(lambda)};
        };

        Complex fa, dfa, fb, dfb, rhs;
        std::ostringstream where;
        where << "theta (n=" << e.n << ", k=" << e.k << ", lambda=" << lambda.real() << ")";
        if (e.cls == ThetaClass::theta1) {
            if (std::abs(v.b) < opts.division_floor)
                throw DivisionDegeneracy("Theta1 row with vanishing B at " + where.str());
            fa = v.a / v.b;
            dfa = (v.da * v.b - v.a * v.db) / (v.b * v.b);
            fb = lambda;
            dfb = Complex(1.0, 0.0);
            rhs = (j == 0) ? v.g / v.b : (v.dg * v.b - v.g * v.db) / (v.b * v.b);
        } else {
            if (std::abs(v.a) < opts.division_floor)
                throw DivisionDegeneracy("Theta2 row with vanishing A at " + where.str());
            fa = Complex(1.0, 0.0);
            dfa = Complex(0.0, 0.0);
            fb = lambda * v.b / v.a;
            dfb = (v.b + lambda * v.db) / v.a - lambda * v.b * v.da / (v.a * v.a);
            rhs = (j == 0) ? v.g / v.a : (v.dg * v.a - v.g * v.da) / (v.a * v.a);
        }

        for (int c = 0; c < bc; ++c) {
            const auto [col_v, col_d] = col(c);
            if (j == 0) {
                sys.matrix(row, c) = fa * col_v;
                sys.matrix(row, bc + c) = fb * col_v;
            } else {
                sys.matrix(row, c) = dfa * col_v + fa * col_d;
                sys.matrix(row, bc + c) = dfb * col_v + fb * col_d;
            }
        }
        sys.rhs(row) = rhs;
        sys.rows.push_back(RowInfo{e.cls == ThetaClass::theta1 ? RowClass::theta1 : RowClass::theta2,
                                   e.n, e.k, j, lambda});
    }
    return sys;
}

} // namespace

ReconstructionSystem assemble_system(const LoopGraphPencil& known, const Subspectrum& sub,
                                     Complex alpha1, const AssemblyOptions& opts) {
    if (sub.target != InverseTarget::boundary_edge)
        throw std::invalid_argument("assemble_system: subspectrum was classified for the loop problem");
    return assemble_impl(known, sub, InverseTarget::boundary_edge, alpha1, opts);
}

ReconstructionSystem assemble_loop_system(const LoopGraphPencil& known, const Subspectrum& sub,
                                          const SignSequence& omega, const AssemblyOptions& opts) {
    if (sub.target != InverseTarget::loop)
        throw std::invalid_argument("assemble_loop_system: subspectrum was classified for the edge problem");
    if (!check_condition_C(omega).c_holds)
        throw ConditionCViolated("assemble_loop_system: a sign omega_n vanishes");
    return assemble_impl(known, sub, InverseTarget::loop, Complex(0.0, 0.0), opts);
}

KernelSolution solve_kernels(const ReconstructionSystem& system, const SolveOptions& opts) {
    const int rows = static_cast<int>(system.matrix.rows());
    const int cols = system.cols();
    if (rows < cols)
        throw RankDeficient("solve_kernels: " + std::to_string(rows) + " rows for " +
                            std::to_string(cols) + " unknowns");

    // Row equilibration; the moment row gets extra weight so the solved
    // kernels honor the integral identity tightly.
    Eigen::MatrixXcd a = system.matrix;
    Eigen::VectorXcd b = system.rhs;
    for (int i = 0; i < rows; ++i) {
        const double norm = a.row(i).norm();
        if (norm == 0.0) continue;
        double s = 1.0 / norm;
        if (system.rows[i].cls == RowClass::anchor) s *= opts.anchor_weight;
        a.row(i) *= s;
        b(i) *= s;
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma(0);
    const double sigma_min = sigma(sigma.size() - 1);

    double tau = opts.regularization;
    if (sigma_min < opts.escalate_below) tau = std::max(tau, opts.escalated_value);

    const double rank_floor = std::max(1e-13 * sigma_max, tau > 0.0 ? 0.3 * std::sqrt(tau) : 0.0);
    int rank = 0;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma(i) > rank_floor) ++rank;
    if (rank < cols && sigma_min <= 1e-15 * std::max(1.0, sigma_max))
        throw RankDeficient("solve_kernels: effective rank " + std::to_string(rank) + " below " +
                            std::to_string(cols) + " unknowns");

    Eigen::VectorXcd beta = svd.matrixU().adjoint() * b;
    for (int i = 0; i < sigma.size(); ++i)
        beta(i) *= sigma(i) / (sigma(i) * sigma(i) + tau);
    const Eigen::VectorXcd x = svd.matrixV() * beta;

    KernelSolution out;
    const int L = system.truncation;
    const int bc = system.block_cols();
    out.kernels.first = ExpSeries(L);
    out.kernels.second = ExpSeries(L);
    for (int l = -L; l <= L; ++l) {
        out.kernels.first.at(l) = x(l + L);
        out.kernels.second.at(l) = x(bc + l + L);
    }
    if (system.polynomial_columns) {
        out.kernels.first.t_lin = x(2 * L + 1);
        out.kernels.first.t_quad = x(2 * L + 2);
        out.kernels.second.t_lin = x(bc + 2 * L + 1);
        out.kernels.second.t_quad = x(bc + 2 * L + 2);
    }

    const Eigen::VectorXcd r = a * x - b;
    out.diagnostics.residual_norm = r.norm();
    out.diagnostics.max_row_residual = r.cwiseAbs().maxCoeff();
    out.diagnostics.sigma_min = sigma_min;
    out.diagnostics.sigma_max = sigma_max;
    out.diagnostics.condition = (sigma_min > 0.0) ? sigma_max / sigma_min : 0.0;
    out.diagnostics.regularization_used = tau;
    out.diagnostics.rank = rank;
    return out;
}

// ---------------------------------------------------------------------------
// Reconstructions
// ---------------------------------------------------------------------------

EdgeReconstruction::EdgeReconstruction(KernelPair kernels, Complex alpha1)
    : kernels_(std::move(kernels)), alpha1_(alpha1) {
    numerator_at_zero_ = std::sin(-alpha1_ * kPi) + kernels_.first.transform(Complex(0.0, 0.0));
}

Complex EdgeReconstruction::s1(Complex lambda) const {
    if (std::abs(lambda) < 1e-7) {
        const Complex half = lambda * 0.5;
        return kPi * std::cos((half - alpha1_) * kPi) + kernels_.first.transform_d1(half);
    }
    const Complex num = std::sin((lambda - alpha1_) * kPi) + kernels_.first.transform(lambda);
    return (num - numerator_at_zero_) / lambda;
}

Complex EdgeReconstruction::s1p(Complex lambda) const {
    return std::cos((lambda - alpha1_) * kPi) + kernels_.second.transform(lambda);
}

EdgeReconstruction reconstruct_edge_functions(const KernelPair& kernels, Complex alpha1) {
    return EdgeReconstruction(kernels, alpha1);
}

LoopReconstruction::LoopReconstruction(KernelPair kernels) : kernels_(std::move(kernels)) {
    numerator_at_zero_ = kernels_.first.transform(Complex(0.0, 0.0));
}

Complex LoopReconstruction::sm(Complex lambda) const {
    if (std::abs(lambda) < 1e-7) {
        const Complex half = lambda * 0.5;
        return kPi * std::cos(half * kPi) + kernels_.first.transform_d1(half);
    }
    const Complex num = std::sin(lambda * kPi) + kernels_.first.transform(lambda);
    return (num - numerator_at_zero_) / lambda;
}

Complex LoopReconstruction::dm(Complex lambda) const {
    return 2.0 * std::cos(lambda * kPi) - 2.0 + kernels_.second.transform(lambda);
}

LoopReconstruction reconstruct_loop_functions(const KernelPair& kernels) {
    return LoopReconstruction(kernels);
}

// ---------------------------------------------------------------------------
// Branch data
// ---------------------------------------------------------------------------

double estimate_branch_beta(const Subspectrum& sub, int slot, int n_min) {
    std::vector<double> inv_n, y;
    for (const auto& e : sub.entries) {
        if (e.k != slot || std::abs(e.n) < n_min) continue;
        inv_n.push_back(1.0 / e.n);
        y.push_back(e.lambda.real() - 2.0 * e.n);
    }
    const int pts = static_cast<int>(y.size());
    if (pts < 2) throw NumericalError("estimate_branch_beta: too few branch entries");
    const int terms = std::min(4, std::max(2, pts / 3));
    Eigen::MatrixXd a(pts, terms);
    Eigen::VectorXd rhs(pts);
    for (int i = 0; i < pts; ++i) {
        double pw = 1.0;
        for (int t = 0; t < terms; ++t) {
            a(i, t) = pw;
            pw *= inv_n[i];
        }
        rhs(i) = y[i];
    }
    const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
    return sol(0);
}

double recover_alpha1(double beta1, const std::vector<double>& known_boundary_alphas) {
    const double s = std::sin(beta1 * kPi);
    if (std::abs(s) < 1e-12)
        throw BranchSingular("recover_alpha1: sin(beta1 pi) vanishes at beta1 = " +
                             std::to_string(beta1));
    double r = 2.0 * (1.0 - std::cos(beta1 * kPi)) / s;
    for (double a : known_boundary_alphas) r -= 1.0 / std::tan((beta1 - a) * kPi);
    const double arccot = kPi / 2.0 - std::atan(r); // branch in (0, pi)
    double alpha1 = beta1 - arccot / kPi;
    return alpha1 - std::floor(alpha1);
}

// ---------------------------------------------------------------------------
// Gauss-Newton fits
// ---------------------------------------------------------------------------

namespace {

struct GaussNewtonResult {
    Eigen::VectorXd params;
    double cost = 0.0;
    int iterations = 0;
};

GaussNewtonResult gauss_newton(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                               Eigen::VectorXd x, int max_iterations) {
    Eigen::VectorXd r = f(x);
    double cost = r.squaredNorm();
    double mu = 1e-10;
    int stalled = 0;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        const int n = static_cast<int>(x.size());
        const int m = static_cast<int>(r.size());
        Eigen::MatrixXd jac(m, n);
        for (int c = 0; c < n; ++c) {
            Eigen::VectorXd xp = x;
            const double h = 1e-6;
            xp(c) += h;
            jac.col(c) = (f(xp) - r) / h;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;

        bool accepted = false;
        for (int trial = 0; trial < 8 && !accepted; ++trial) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal().array() += mu * (jtj.diagonal().array().abs() + 1e-12);
            const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
            const Eigen::VectorXd x_new = x + step;
            const Eigen::VectorXd r_new = f(x_new);
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                x = x_new;
                r = r_new;
                const double drop = cost - cost_new;
                cost = cost_new;
                mu = std::max(mu / 4.0, 1e-14);
                accepted = true;
                stalled = 0;
                if (drop < 1e-13 * (1.0 + cost) || step.norm() < 1e-11) {
                    ++iter;
                    return {x, cost, iter};
                }
            } else {
                mu *= 10.0;
            }
        }
        if (!accepted) {
            if (++stalled >= 3 && cost > 1e-20) {
                if (iter < 2)
                    throw FitDiverged("gauss_newton: residual failed to decrease");
                break;
            }
        }
        if (cost < 1e-22) break;
    }
    return {x, cost, iter};
}

std::pair<ChebSeries, ChebSeries> params_to_series(const Eigen::VectorXd& x, int degree) {
    std::vector<Complex> pc(degree + 1), qc(degree + 1);
    for (int i = 0; i <= degree; ++i) {
        pc[i] = Complex(x(i), 0.0);
        qc[i] = Complex(x(degree + 1 + i), 0.0);
    }
    return {ChebSeries(pc), ChebSeries(qc)};
}

} // namespace

namespace {

Eigen::VectorXd fit_start(const FitOptions& opts) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * (opts.degree + 1));
    for (std::size_t i = 0; i < opts.initial_params.size() && i < static_cast<std::size_t>(x0.size());
         ++i)
        x0(i) = opts.initial_params[i];
    return x0;
}

} // namespace

CoefficientFit fit_edge_weyl(const CharacteristicFn& s1, const CharacteristicFn& s1p,
                             const FitOptions& opts) {
    // Pole-avoiding real grid: keep sample points where |lambda S_1| stays
    // away from zero, i.e. clear of the Weyl poles.
    std::vector<double> grid;
    std::vector<Complex> m_hat;
    for (double lam = 0.55; lam < 40.0 && static_cast<int>(grid.size()) < opts.grid; lam += 0.26) {
        const Complex s = s1(Complex(lam, 0.0));
        if (std::abs(lam * s) < opts.pole_floor) continue;
        grid.push_back(lam);
        m_hat.push_back(s1p(Complex(lam, 0.0)) / s);
    }
    if (grid.size() < 16) throw NumericalError("fit_edge_weyl: pole-avoiding grid too small");

    const auto residual = [&](const Eigen::VectorXd& x) {
        auto [p, q] = params_to_series(x, opts.degree);
        const EdgeCoefficients edge(std::move(p), std::move(q));
        Eigen::VectorXd r(2 * static_cast<int>(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const EdgeSolution e = integrate_edge(edge, Complex(grid[i], 0.0), false, opts.ode);
            const Complex diff = e.sp / e.s - m_hat[i];
            r(2 * i) = diff.real();
            r(2 * i + 1) = diff.imag();
        }
        return r;
    };

    const auto result = gauss_newton(residual, fit_start(opts), opts.max_iterations);
    auto [p, q] = params_to_series(result.params, opts.degree);
    return CoefficientFit{std::move(p), std::move(q), std::sqrt(result.cost), result.iterations};
}

CoefficientFit fit_edge_coefficients(const EdgeReconstruction& target, const FitOptions& opts) {
    return fit_edge_weyl([&target](Complex z) { return target.s1(z); },
                         [&target](Complex z) { return target.s1p(z); }, opts);
}

CoefficientFit fit_loop_targets(const CharacteristicFn& sm, const CharacteristicFn& dm_fn,
                                const FitOptions& opts) {
    std::vector<double> grid;
    std::vector<Complex> s_hat, d_hat;
    for (double lam = 0.4; static_cast<int>(grid.size()) < opts.grid / 2; lam += 0.35) {
        grid.push_back(lam);
        s_hat.push_back(sm(Complex(lam, 0.0)) * lam);
        d_hat.push_back(dm_fn(Complex(lam, 0.0)));
    }

    const auto residual = [&](const Eigen::VectorXd& x) {
        auto [p, q] = params_to_series(x, opts.degree);
        const EdgeCoefficients loop(std::move(p), std::move(q));
        Eigen::VectorXd r(4 * static_cast<int>(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const EdgeSolution e = integrate_edge(loop, Complex(grid[i], 0.0), false, opts.ode);
            const Complex ds = grid[i] * e.s - s_hat[i];
            const Complex dd = (e.sp + e.c - 2.0) - d_hat[i];
            r(4 * i) = ds.real();
            r(4 * i + 1) = ds.imag();
            r(4 * i + 2) = dd.real();
            r(4 * i + 3) = dd.imag();
        }
        return r;
    };

    const auto result = gauss_newton(residual, fit_start(opts), opts.max_iterations);
    auto [p, q] = params_to_series(result.params, opts.degree);
    return CoefficientFit{std::move(p), std::move(q), std::sqrt(result.cost), result.iterations};
}

CoefficientFit fit_loop_coefficients(const LoopReconstruction& target, const FitOptions& opts) {
    return fit_loop_targets([&target](Complex z) { return target.sm(z); },
                            [&target](Complex z) { return target.dm(z); }, opts);
}

// ---------------------------------------------------------------------------
// Loop verification
// ---------------------------------------------------------------------------

namespace {

// Newton on the resynthesized S_m with a central-difference derivative.
std::optional<Complex> refine_sm_zero(const LoopReconstruction& rec, Complex z0) {
    Complex z = z0;
    for (int it = 0; it < 40; ++it) {
        const Complex v = rec.sm(z);
        const double h = 1e-6;
        const Complex dv = (rec.sm(z + h) - rec.sm(z - h)) / (2.0 * h);
        if (std::abs(dv) == 0.0) return std::nullopt;
        const Complex step = v / dv;
        z -= step;
        if (std::abs(z - z0) > 0.6) return std::nullopt;
        if (std::abs(step) < 1e-11 * std::max(1.0, std::abs(z))) return z;
    }
    return std::nullopt;
}

} // namespace

LoopVerification verify_loop_recovery(const LoopReconstruction& rec, const SignSequence& omega,
                                      const LoopGraphPencil* truth, const SpectralOptions& opts) {
    LoopVerification out;
    out.omega_consistent = true;
    out.min_dm_at_zeros = 1e300;

    for (const auto& entry : omega.entries) {
        const auto nu_hat = refine_sm_zero(rec, entry.nu);
        if (!nu_hat) {
            out.max_nu_gap = std::max(out.max_nu_gap, 1.0);
            out.omega_consistent = false;
            continue;
        }
        out.max_nu_gap = std::max(out.max_nu_gap, std::abs(*nu_hat - entry.nu));
        const Complex d = rec.dm(*nu_hat);
        out.min_dm_at_zeros = std::min(out.min_dm_at_zeros, std::abs(d));
        // Q^2 = (d_m + 2)^2 - 4 at a zero of S_m via the Wronskian identity;
        // the sign data itself is not recoverable, only its nonvanishing.
        const Complex q_sq = (d + 2.0) * (d + 2.0) - 4.0;
        if (entry.omega != 0 && std::abs(q_sq) <= 1e-6) out.omega_consistent = false;
    }
    if (omega.entries.empty()) out.min_dm_at_zeros = 0.0;

    if (truth != nullptr) {
        out.has_truth = true;
        out.omega_matches_truth = true;
        for (const auto& entry : omega.entries) {
            const EdgeSolution e = integrate_edge(truth->loop(), entry.nu, false, opts.ode);
            const Complex q = e.c - e.sp;
            int w;
            if (std::abs(q) <= 1e-9) {
                w = 0;
            } else {
                const double arg = std::arg(q);
                w = (arg >= 0.0 && arg < kPi) ? 1 : -1;
            }
            if (w != entry.omega) out.omega_matches_truth = false;
        }
        for (double lam = -20.0; lam <= 20.0 + 1e-9; lam += 0.8) {
            const Complex z(lam, 0.0);
            const EdgeSolution e = integrate_edge(truth->loop(), z, false, opts.ode);
            out.sup_gap_s = std::max(out.sup_gap_s, std::abs(rec.sm(z) - e.s));
            out.sup_gap_dm = std::max(out.sup_gap_dm, std::abs(rec.dm(z) - (e.sp + e.c - 2.0)));
        }
    }
    return out;
}

} // namespace looppencil
