#include "looppencil/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace looppencil {

ChebSeries::ChebSeries(std::vector<Complex> coef) : coef_(std::move(coef)) {
    if (coef_.empty()) coef_.assign(1, Complex(0.0, 0.0));
    for (const Complex& c : coef_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::invalid_argument("ChebSeries: non-finite coefficient");
    }
}

Complex ChebSeries::eval(double x) const {
    const double u = 2.0 * x / kPi - 1.0;
    // Clenshaw recurrence.
    Complex b1(0.0, 0.0), b2(0.0, 0.0);
    const double two_u = 2.0 * u;
    for (int k = static_cast<int>(coef_.size()) - 1; k >= 1; --k) {
        Complex b0 = coef_[k] + two_u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coef_[0] + u * b1 - b2;
}

Complex ChebSeries::integral() const {
    // int_{-1}^{1} T_k du = 2/(1-k^2) for even k, 0 for odd k; scale by pi/2.
    Complex acc(0.0, 0.0);
    for (std::size_t k = 0; k < coef_.size(); k += 2) {
        const double kk = static_cast<double>(k);
        acc += coef_[k] * (2.0 / (1.0 - kk * kk));
    }
    return acc * (kPi / 2.0);
}

bool ChebSeries::is_zero(double tol) const {
    return std::all_of(coef_.begin(), coef_.end(),
                       [tol](const Complex& c) { return std::abs(c) <= tol; });
}

bool ChebSeries::is_real(double tol) const {
    return std::all_of(coef_.begin(), coef_.end(),
                       [tol](const Complex& c) { return std::abs(c.imag()) <= tol; });
}

double ChebSeries::max_abs_coefficient() const {
    double m = 0.0;
    for (const Complex& c : coef_) m = std::max(m, std::abs(c));
    return m;
}

ChebSeries ChebSeries::plus_constant(Complex c) const {
    std::vector<Complex> out = coef_;
    out[0] += c;
    return ChebSeries(std::move(out));
}

ChebSeries ChebSeries::linear_combination(Complex a, const ChebSeries& x, Complex b, const ChebSeries& y) {
    std::vector<Complex> out(std::max(x.coef_.size(), y.coef_.size()), Complex(0.0, 0.0));
    for (std::size_t k = 0; k < x.coef_.size(); ++k) out[k] += a * x.coef_[k];
    for (std::size_t k = 0; k < y.coef_.size(); ++k) out[k] += b * y.coef_[k];
    return ChebSeries(std::move(out));
}

ChebSeries ChebSeries::from_function(const std::function<Complex(double)>& f, int degree) {
    if (degree < 0) throw std::invalid_argument("ChebSeries::from_function: negative degree");
    const int n = degree + 1;
    // Chebyshev-Gauss nodes u_i = cos(pi (i + 1/2) / n).
    std::vector<Complex> values(n);
    std::vector<double> theta(n);
    for (int i = 0; i < n; ++i) {
        theta[i] = kPi * (i + 0.5) / n;
        const double u = std::cos(theta[i]);
        values[i] = f(kPi * (u + 1.0) / 2.0);
    }
    std::vector<Complex> coef(n);
    for (int k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) acc += values[i] * std::cos(k * theta[i]);
        coef[k] = acc * ((k == 0 ? 1.0 : 2.0) / n);
    }
    return ChebSeries(std::move(coef));
}

ChebSeries ChebSeries::from_samples(const std::vector<Complex>& samples, int degree) {
    if (samples.empty()) throw std::invalid_argument("ChebSeries::from_samples: empty sample list");
    const int n = static_cast<int>(samples.size());
    const int deg = std::min(degree, n - 1);
    Eigen::MatrixXd v(n, deg + 1);
    for (int i = 0; i < n; ++i) {
        const double u = (n == 1) ? -1.0 : 2.0 * i / (n - 1) - 1.0;
        double t0 = 1.0, t1 = u;
        for (int k = 0; k <= deg; ++k) {
            if (k == 0) {
                v(i, k) = 1.0;
            } else if (k == 1) {
                v(i, k) = u;
            } else {
                const double t2 = 2.0 * u * t1 - t0;
                t0 = t1;
                t1 = t2;
                v(i, k) = t2;
            }
        }
    }
    Eigen::VectorXcd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = samples[i];
    const Eigen::MatrixXcd vc = v.cast<Complex>();
    Eigen::VectorXcd sol = vc.colPivHouseholderQr().solve(rhs);
    std::vector<Complex> coef(deg + 1);
    for (int k = 0; k <= deg; ++k) coef[k] = sol(k);
    return ChebSeries(std::move(coef));
}

GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n from the Chebyshev initial guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(ChebSeries::kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    std::sort(rule.nodes.begin(), rule.nodes.end());
    // Recompute weights in sorted order (weights are symmetric; resort keeps pairs aligned).
    for (int i = 0; i < n; ++i) {
        const double x = rule.nodes[i];
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double pp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

} // namespace looppencil
