#include "looppencil/characteristic.hpp"

#include <cmath>
#include <stdexcept>

namespace looppencil {

namespace {

constexpr double kPi = ChebSeries::kPi;

// Taylor series of sin(z)/z and its first two derivatives in z = pi*mu,
// used below the cancellation threshold.
Complex sinc_s0(Complex z) {
    const Complex z2 = z * z;
    return 1.0 + z2 * (-1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 * (-1.0 / 5040.0 + z2 / 362880.0)));
}
Complex sinc_s1(Complex z) {
    const Complex z2 = z * z;
    return z * (-1.0 / 3.0 + z2 * (1.0 / 30.0 + z2 * (-1.0 / 840.0 + z2 / 45360.0)));
}
Complex sinc_s2(Complex z) {
    const Complex z2 = z * z;
    return -1.0 / 3.0 + z2 * (1.0 / 10.0 + z2 * (-1.0 / 168.0 + z2 / 6480.0));
}
Complex sinc_s3(Complex z) {
    const Complex z2 = z * z;
    return z * (1.0 / 5.0 + z2 * (-1.0 / 42.0 + z2 / 1080.0));
}

struct ValueDeriv {
    Complex v;
    Complex d;
};

// Product of S_k(pi) over an index list, with the lambda-derivative by the
// product rule when requested.
ValueDeriv s_product(const SolutionSample& sample, const std::vector<int>& idx, bool with_d) {
    ValueDeriv out{Complex(1.0, 0.0), Complex(0.0, 0.0)};
    for (int k : idx) out.v *= sample.edge(k).s;
    if (with_d) {
        for (std::size_t j = 0; j < idx.size(); ++j) {
            Complex term = sample.edge(idx[j]).ds;
            for (std::size_t k = 0; k < idx.size(); ++k)
                if (k != j) term *= sample.edge(idx[k]).s;
            out.d += term;
        }
    }
    return out;
}

std::vector<int> range_excluding(int first, int last, int skip) {
    std::vector<int> idx;
    for (int k = first; k <= last; ++k)
        if (k != skip) idx.push_back(k);
    return idx;
}

bool sample_has_derivatives(const SolutionSample& sample) {
    for (const auto& e : sample.edges)
        if (!e.has_derivatives) return false;
    return !sample.edges.empty();
}

void require_derivatives(const SolutionSample& sample, const char* where) {
    if (!sample_has_derivatives(sample))
        throw std::logic_error(std::string(where) + ": sample lacks lambda-derivatives");
}

} // namespace

Complex band_integral(Complex mu) {
    const Complex z = kPi * mu;
    if (std::abs(z) < 0.15) return 2.0 * kPi * sinc_s0(z);
    return 2.0 * std::sin(z) / mu;
}

Complex band_integral_d1(Complex mu) {
    const Complex z = kPi * mu;
    if (std::abs(z) < 0.15) return 2.0 * kPi * kPi * sinc_s1(z);
    return 2.0 * (kPi * mu * std::cos(z) - std::sin(z)) / (mu * mu);
}

Complex band_integral_d2(Complex mu) {
    const Complex z = kPi * mu;
    if (std::abs(z) < 0.15) return 2.0 * kPi * kPi * kPi * sinc_s2(z);
    return 2.0 * (-kPi * kPi * mu * mu * std::sin(z) - 2.0 * kPi * mu * std::cos(z) + 2.0 * std::sin(z)) /
           (mu * mu * mu);
}

Complex band_integral_d3(Complex mu) {
    const Complex z = kPi * mu;
    if (std::abs(z) < 0.15) return 2.0 * kPi * kPi * kPi * kPi * sinc_s3(z);
    const Complex mu2 = mu * mu;
    return -2.0 * kPi * kPi * kPi * std::cos(z) / mu + 6.0 * kPi * kPi * std::sin(z) / mu2 +
           12.0 * kPi * std::cos(z) / (mu2 * mu) - 12.0 * std::sin(z) / (mu2 * mu2);
}

Complex dm(const SolutionSample& sample) {
    const EdgeSolution& loop = sample.loop();
    return loop.sp + loop.c - 2.0;
}

Complex dm_derivative(const SolutionSample& sample) {
    require_derivatives(sample, "dm_derivative");
    const EdgeSolution& loop = sample.loop();
    return loop.dsp + loop.dc;
}

Complex q_func(const SolutionSample& sample) {
    const EdgeSolution& loop = sample.loop();
    return loop.c - loop.sp;
}

Complex delta(const SolutionSample& sample) {
    const int m = static_cast<int>(sample.edges.size());
    Complex acc(0.0, 0.0);
    for (int j = 0; j <= m - 2; ++j) {
        Complex term = sample.edge(j).sp;
        for (int k = 0; k <= m - 1; ++k)
            if (k != j) term *= sample.edge(k).s;
        acc += term;
    }
    Complex tail = dm(sample);
    for (int k = 0; k <= m - 2; ++k) tail *= sample.edge(k).s;
    return acc + tail;
}

Complex delta_derivative(const SolutionSample& sample) {
    require_derivatives(sample, "delta_derivative");
    const int m = static_cast<int>(sample.edges.size());
    Complex acc(0.0, 0.0);
    for (int j = 0; j <= m - 2; ++j) {
        const auto idx = range_excluding(0, m - 1, j);
        const auto prod = s_product(sample, idx, true);
        acc += sample.edge(j).dsp * prod.v + sample.edge(j).sp * prod.d;
    }
    const auto idx = range_excluding(0, m - 2, -1);
    const auto prod = s_product(sample, idx, true);
    acc += dm_derivative(sample) * prod.v + dm(sample) * prod.d;
    return acc;
}

FactorPair edge1_pair(const SolutionSample& sample) {
    const int m = static_cast<int>(sample.edges.size());
    FactorPair out;
    out.has_derivatives = sample_has_derivatives(sample);

    // B1 = prod_{k>=2} S_k (1-based), i.e. everything except edge 1.
    const auto b_idx = range_excluding(1, m - 1, -1);
    const auto b = s_product(sample, b_idx, out.has_derivatives);
    out.b = b.v;
    out.db = b.d;

    // The sum in A1 runs over the remaining boundary edges only; the loop
    // enters through the d_m term. With the sum taken up to the loop edge the
    // identity Delta = A1 S1 + B1 S1' would fail against the Delta definition.
    for (int j = 1; j <= m - 2; ++j) {
        const auto idx = range_excluding(1, m - 1, j);
        const auto prod = s_product(sample, idx, out.has_derivatives);
        out.a += sample.edge(j).sp * prod.v;
        if (out.has_derivatives) out.da += sample.edge(j).dsp * prod.v + sample.edge(j).sp * prod.d;
    }
    const auto dm_idx = range_excluding(1, m - 2, -1);
    const auto dm_prod = s_product(sample, dm_idx, out.has_derivatives);
    out.a += dm(sample) * dm_prod.v;
    if (out.has_derivatives) out.da += dm_derivative(sample) * dm_prod.v + dm(sample) * dm_prod.d;
    return out;
}

Complex g1(const SolutionSample& sample, Complex alpha1) {
    const FactorPair p = edge1_pair(sample);
    const Complex arg = (sample.lambda - alpha1) * kPi;
    return -p.a * std::sin(arg) - sample.lambda * p.b * std::cos(arg);
}

Complex g1_derivative(const SolutionSample& sample, Complex alpha1) {
    require_derivatives(sample, "g1_derivative");
    const FactorPair p = edge1_pair(sample);
    const Complex arg = (sample.lambda - alpha1) * kPi;
    const Complex s = std::sin(arg), c = std::cos(arg);
    return -p.da * s - p.a * kPi * c - (p.b + sample.lambda * p.db) * c +
           sample.lambda * p.b * kPi * s;
}

FactorPair loop_pair(const SolutionSample& sample) {
    const int m = static_cast<int>(sample.edges.size());
    FactorPair out;
    out.has_derivatives = sample_has_derivatives(sample);

    const auto b_idx = range_excluding(0, m - 2, -1);
    const auto b = s_product(sample, b_idx, out.has_derivatives);
    out.b = b.v;
    out.db = b.d;

    for (int j = 0; j <= m - 2; ++j) {
        const auto idx = range_excluding(0, m - 2, j);
        const auto prod = s_product(sample, idx, out.has_derivatives);
        out.a += sample.edge(j).sp * prod.v;
        if (out.has_derivatives) out.da += sample.edge(j).dsp * prod.v + sample.edge(j).sp * prod.d;
    }
    return out;
}

Complex gm(const SolutionSample& sample) {
    const FactorPair p = loop_pair(sample);
    const Complex arg = sample.lambda * kPi;
    return -p.a * std::sin(arg) - sample.lambda * p.b * (2.0 * std::cos(arg) - 2.0);
}

Complex gm_derivative(const SolutionSample& sample) {
    require_derivatives(sample, "gm_derivative");
    const FactorPair p = loop_pair(sample);
    const Complex arg = sample.lambda * kPi;
    const Complex s = std::sin(arg), c = std::cos(arg);
    return -p.da * s - p.a * kPi * c - (p.b + sample.lambda * p.db) * (2.0 * c - 2.0) +
           sample.lambda * p.b * 2.0 * kPi * s;
}

Complex delta(const LoopGraphPencil& pencil, Complex lambda, const IntegratorOptions& opts) {
    return delta(sample_pencil(pencil, lambda, false, opts));
}

Complex dm(const LoopGraphPencil& pencil, Complex lambda, const IntegratorOptions& opts) {
    return dm(sample_pencil(pencil, lambda, false, opts));
}

Complex q_func(const LoopGraphPencil& pencil, Complex lambda, const IntegratorOptions& opts) {
    return q_func(sample_pencil(pencil, lambda, false, opts));
}

void require_normalized(const LoopGraphPencil& pencil, double tol) {
    const Complex am = pencil.loop().alpha;
    if (std::abs(am) > tol)
        throw NotNormalized("loop mean alpha_m = " + std::to_string(std::abs(am)) +
                            " exceeds " + std::to_string(tol) + "; apply normalize_shift first");
}

// ---------------------------------------------------------------------------
// ExpSeries
// ---------------------------------------------------------------------------

Complex ExpSeries::eval(double t) const {
    Complex acc = t_lin * t + t_quad * t * t;
    for (int l = -truncation; l <= truncation; ++l)
        acc += at(l) * std::exp(Complex(0.0, l * t));
    return acc;
}

Complex ExpSeries::transform(Complex lambda) const {
    Complex acc(0.0, 0.0);
    for (int l = -truncation; l <= truncation; ++l) {
        const Complex c = at(l);
        if (c != Complex(0.0, 0.0)) acc += c * band_integral(lambda + static_cast<double>(l));
    }
    if (t_lin != Complex(0.0, 0.0)) acc += t_lin * Complex(0.0, -1.0) * band_integral_d1(lambda);
    if (t_quad != Complex(0.0, 0.0)) acc -= t_quad * band_integral_d2(lambda);
    return acc;
}

Complex ExpSeries::transform_d1(Complex lambda) const {
    Complex acc(0.0, 0.0);
    for (int l = -truncation; l <= truncation; ++l) {
        const Complex c = at(l);
        if (c != Complex(0.0, 0.0)) acc += c * band_integral_d1(lambda + static_cast<double>(l));
    }
    if (t_lin != Complex(0.0, 0.0)) acc += t_lin * Complex(0.0, -1.0) * band_integral_d2(lambda);
    if (t_quad != Complex(0.0, 0.0)) acc -= t_quad * band_integral_d3(lambda);
    return acc;
}

double ExpSeries::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& c : coef) m = std::max(m, std::abs(c));
    return m;
}

namespace {

// Fit c_l ~ g_t i(-1)^l / l + g_q 2(-1)^l / l^2 over the top-|l| band and move
// that part into the polynomial terms (t and t^2 have exactly those
// exponential coefficients).
void split_polynomial_tail(ExpSeries& series, int band) {
    const int L = series.truncation;
    if (L < 2 * band || band < 2) return;
    // Normal equations for the 2x2 least-squares fit.
    Complex m00(0, 0), m01(0, 0), m11(0, 0), r0(0, 0), r1(0, 0);
    for (int side = -1; side <= 1; side += 2) {
        for (int i = 0; i < band; ++i) {
            const int l = side * (L - i);
            const double sgn = (l % 2 == 0) ? 1.0 : -1.0;
            const Complex phi0 = Complex(0.0, 1.0) * sgn / static_cast<double>(l);
            const Complex phi1 = Complex(2.0 * sgn / (static_cast<double>(l) * l), 0.0);
            const Complex c = series.at(l);
            m00 += std::conj(phi0) * phi0;
            m01 += std::conj(phi0) * phi1;
            m11 += std::conj(phi1) * phi1;
            r0 += std::conj(phi0) * c;
            r1 += std::conj(phi1) * c;
        }
    }
    const Complex det = m00 * m11 - m01 * std::conj(m01);
    if (std::abs(det) < 1e-30) return;
    const Complex g_t = (r0 * m11 - m01 * r1) / det;
    const Complex g_q = (m00 * r1 - std::conj(m01) * r0) / det;
    for (int l = -L; l <= L; ++l) {
        if (l == 0) {
            series.at(0) -= g_q * (kPi * kPi / 3.0);
            continue;
        }
        const double sgn = (l % 2 == 0) ? 1.0 : -1.0;
        series.at(l) -= g_t * Complex(0.0, 1.0) * sgn / static_cast<double>(l) +
                        g_q * 2.0 * sgn / (static_cast<double>(l) * l);
    }
    series.t_lin += g_t;
    series.t_quad += g_q;
}

} // namespace

KernelSet extract_kernels(const LoopGraphPencil& pencil, int truncation,
                          const KernelExtractionOptions& opts) {
    if (truncation < 8)
        throw std::invalid_argument("extract_kernels: truncation must be >= 8");
    const int m = pencil.edge_count();
    const int L = truncation;

    KernelSet set;
    set.truncation = L;
    set.k.assign(m, ExpSeries(L));
    set.n.assign(m, ExpSeries(L));
    set.l.assign(m, ExpSeries(L));
    set.t = ExpSeries(L);

    const auto alphas = pencil.alphas();
    for (int l = -L; l <= L; ++l) {
        const Complex lambda(static_cast<double>(l), 0.0);
        const SolutionSample sample = sample_pencil(pencil, lambda, false, opts.ode);
        for (int j = 0; j < m; ++j) {
            const Complex arg = (lambda - alphas[j]) * kPi;
            const EdgeSolution& e = sample.edge(j);
            // The sample of each representation residual at lambda = l equals
            // 2 pi times the coefficient of exp(-i l t).
            set.k[j].at(-l) = (lambda * e.s - std::sin(arg)) / (2.0 * kPi);
            set.n[j].at(-l) = (e.sp - std::cos(arg)) / (2.0 * kPi);
            set.l[j].at(-l) = (e.c - std::cos(arg)) / (2.0 * kPi);
        }
        const Complex cosl = std::cos(lambda * kPi);
        set.t.at(-l) = (dm(sample) - (2.0 * cosl - 2.0)) / (2.0 * kPi);
    }

    if (opts.fit_polynomial_tail) {
        for (int j = 0; j < m; ++j) {
            split_polynomial_tail(set.k[j], opts.tail_band);
            split_polynomial_tail(set.n[j], opts.tail_band);
            split_polynomial_tail(set.l[j], opts.tail_band);
        }
        split_polynomial_tail(set.t, opts.tail_band);
    }
    return set;
}

} // namespace looppencil
