#include "looppencil/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace looppencil {

namespace {
constexpr double kPi = ChebSeries::kPi;
const Complex kI(0.0, 1.0);

Complex moment_integral(int power, Complex mu) {
    switch (power) {
        case 0: return band_integral(mu);
        case 1: return -kI * band_integral_d1(mu); // int t e^{i mu t}
        case 2: return -band_integral_d2(mu);      // int t^2 e^{i mu t}
        default: throw std::invalid_argument("moment_integral: unsupported power");
    }
}
} // namespace

Complex basis_inner(const BasisElement& g, const BasisElement& h) {
    Complex acc(0.0, 0.0);
    for (const auto& a : g.terms) {
        for (const auto& b : h.terms) {
            const Complex weight = std::conj(a.w1) * b.w1 + std::conj(a.w2) * b.w2;
            if (weight == Complex(0.0, 0.0)) continue;
            acc += weight * moment_integral(a.power + b.power, b.lambda - std::conj(a.lambda));
        }
    }
    return acc;
}

double basis_norm(const BasisElement& g) { return std::sqrt(std::abs(basis_inner(g, g))); }

BasisElement v_element(Complex lambda, const EdgeSolution& edge1, int order) {
    BasisElement e;
    if (order == 0) {
        e.terms.push_back({edge1.sp, -lambda * edge1.s, 0, lambda});
        return e;
    }
    if (order != 1) throw std::invalid_argument("v_element: unsupported derivative order");
    // d/dlambda of [S1', -lambda S1] e^{i lambda t}.
    e.terms.push_back({edge1.dsp, -(edge1.s + lambda * edge1.ds), 0, lambda});
    e.terms.push_back({kI * edge1.sp, -kI * lambda * edge1.s, 1, lambda});
    return e;
}

BasisElement v0_element(int n, double beta, double alpha1) {
    BasisElement e;
    const double arg = (beta - alpha1) * kPi;
    e.terms.push_back(
        {Complex(std::cos(arg), 0.0), Complex(-std::sin(arg), 0.0), 0, Complex(2.0 * n + beta, 0.0)});
    return e;
}

BasisElement e_element(int n, double beta) {
    BasisElement e;
    e.terms.push_back({Complex(1.0, 0.0), Complex(0.0, 0.0), 0, Complex(4.0 * n + 2.0 * beta, 0.0)});
    return e;
}

BasisProbe build_probe(const Subspectrum& sub, double alpha1,
                       const std::function<EdgeSolution(Complex, bool)>& edge1_solver) {
    BasisProbe probe;
    probe.elements.reserve(sub.entries.size());

    std::map<int, double> closeness_by_n;
    for (const auto& entry : sub.entries) {
        const EdgeSolution edge1 = edge1_solver(entry.lambda, entry.m_theta > 1);
        probe.elements.push_back(v_element(entry.lambda, edge1, entry.occurrence));
        if (entry.occurrence == 0) {
            const BasisElement& v = probe.elements.back();
            const BasisElement v0 = v0_element(entry.n, sub.betas.at(entry.k - 1), alpha1);
            const Complex cross = basis_inner(v0, v);
            const double gap_sq = std::abs(basis_inner(v, v)) + std::abs(basis_inner(v0, v0)) -
                                  2.0 * cross.real();
            closeness_by_n[std::abs(entry.n)] += gap_sq;
        }
    }
    for (const auto& [n, gap] : closeness_by_n) probe.closeness.push_back({n, gap});

    const int count = static_cast<int>(probe.elements.size());
    probe.gram = Eigen::MatrixXcd(count, count);
    std::vector<double> norms(count);
    for (int i = 0; i < count; ++i) norms[i] = basis_norm(probe.elements[i]);
    for (int i = 0; i < count; ++i) {
        for (int j = i; j < count; ++j) {
            const Complex value =
                basis_inner(probe.elements[i], probe.elements[j]) / (norms[i] * norms[j]);
            probe.gram(i, j) = value;
            probe.gram(j, i) = std::conj(value);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(probe.gram, Eigen::EigenvaluesOnly);
    probe.gram_eigenvalues.assign(eig.eigenvalues().data(),
                                  eig.eigenvalues().data() + eig.eigenvalues().size());
    return probe;
}

FrameBounds frame_bounds(const BasisProbe& probe, double floor) {
    FrameBounds out;
    out.m1 = probe.gram_eigenvalues.front();
    out.m2 = probe.gram_eigenvalues.back();
    if (out.m1 <= floor)
        throw SingularGram("frame_bounds: lowest Gram eigenvalue " + std::to_string(out.m1));
    out.condition = out.m2 / out.m1;
    return out;
}

FrameBounds frame_bounds(const std::vector<BasisElement>& elements, double floor) {
    const int count = static_cast<int>(elements.size());
    Eigen::MatrixXcd gram(count, count);
    std::vector<double> norms(count);
    for (int i = 0; i < count; ++i) norms[i] = basis_norm(elements[i]);
    for (int i = 0; i < count; ++i) {
        for (int j = i; j < count; ++j) {
            const Complex value = basis_inner(elements[i], elements[j]) / (norms[i] * norms[j]);
            gram(i, j) = value;
            gram(j, i) = std::conj(value);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
    FrameBounds out;
    out.m1 = eig.eigenvalues()(0);
    out.m2 = eig.eigenvalues()(count - 1);
    if (out.m1 <= floor)
        throw SingularGram("frame_bounds: lowest Gram eigenvalue " + std::to_string(out.m1));
    out.condition = out.m2 / out.m1;
    return out;
}

Eigen::MatrixXcd gram_v0(const std::vector<double>& betas4, double alpha1, int window) {
    std::vector<BasisElement> elements;
    for (int n = -window; n <= window; ++n)
        for (double beta : betas4) elements.push_back(v0_element(n, beta, alpha1));
    const int count = static_cast<int>(elements.size());
    Eigen::MatrixXcd gram(count, count);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) gram(i, j) = basis_inner(elements[i], elements[j]);
    return gram;
}

Eigen::MatrixXcd gram_exponential(const std::vector<double>& betas4, int window) {
    std::vector<BasisElement> elements;
    for (int n = -window; n <= window; ++n)
        for (double beta : betas4) elements.push_back(e_element(n, beta));
    const int count = static_cast<int>(elements.size());
    Eigen::MatrixXcd gram(count, count);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) gram(i, j) = basis_inner(elements[i], elements[j]);
    return gram;
}

SineTypeReport sine_type_check(const std::vector<double>& betas4) {
    if (betas4.size() != 4) throw std::invalid_argument("sine_type_check: need four betas");
    SineTypeReport report;

    // Zero lattice {4n + 2 beta_j}: minimal cyclic gap of the residues mod 4.
    std::vector<double> residues;
    for (double b : betas4) {
        double r = std::fmod(2.0 * b, 4.0);
        if (r < 0.0) r += 4.0;
        residues.push_back(r);
    }
    std::sort(residues.begin(), residues.end());
    report.separation = 1e300;
    for (std::size_t i = 0; i < residues.size(); ++i) {
        const double next = (i + 1 < residues.size()) ? residues[i + 1] : residues[0] + 4.0;
        report.separation = std::min(report.separation, next - residues[i]);
    }
    report.separated = report.separation > 0.0;

    // Generating function with exactly that zero set.
    const auto s_func = [&betas4](Complex z) {
        Complex prod(1.0, 0.0);
        for (double b : betas4) prod *= std::sin((z - 2.0 * b) * kPi / 4.0);
        return prod;
    };
    report.bounded = true;
    for (double im : {2.0, 4.0, 8.0}) {
        StripBound bound;
        bound.im = im;
        bound.lower = 1e300;
        bound.upper = 0.0;
        for (double sign : {1.0, -1.0}) {
            for (double re = 0.0; re < 8.0; re += 0.05) {
                const double mag =
                    std::abs(s_func(Complex(re, sign * im))) * std::exp(-kPi * im);
                bound.lower = std::min(bound.lower, mag);
                bound.upper = std::max(bound.upper, mag);
            }
        }
        report.bounded = report.bounded && bound.lower > 0.0 && std::isfinite(bound.upper);
        report.strips.push_back(bound);
    }
    return report;
}

} // namespace looppencil
