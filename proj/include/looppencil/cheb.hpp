#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace looppencil {

using Complex = std::complex<double>;

/// Truncated Chebyshev series on the fixed interval [0, pi].
///
/// Coefficient functions of an edge are stored in this form; evaluation maps
/// x in [0, pi] to u = 2x/pi - 1 and runs Clenshaw's recurrence. Coefficients
/// may be complex.
class ChebSeries {
public:
    ChebSeries() : coef_(1, Complex(0.0, 0.0)) {}
    explicit ChebSeries(std::vector<Complex> coef);

    /// Interpolate f at degree+1 Chebyshev-Gauss nodes mapped to [0, pi].
    static ChebSeries from_function(const std::function<Complex(double)>& f, int degree);

    /// Least-squares fit of equally spaced samples on [0, pi] (endpoints included).
    static ChebSeries from_samples(const std::vector<Complex>& samples, int degree);

    Complex eval(double x) const;
    Complex operator()(double x) const { return eval(x); }

    /// Exact integral over [0, pi] from the coefficients.
    Complex integral() const;
    /// Mean value over [0, pi].
    Complex mean() const { return integral() / kPi; }

    int degree() const { return static_cast<int>(coef_.size()) - 1; }
    const std::vector<Complex>& coefficients() const { return coef_; }

    bool is_zero(double tol = 0.0) const;
    bool is_real(double tol = 1e-12) const;
    double max_abs_coefficient() const;

    /// Series of this + c (shifts the T_0 coefficient).
    ChebSeries plus_constant(Complex c) const;
    /// Series of a*this + b*other, padding to the longer length.
    static ChebSeries linear_combination(Complex a, const ChebSeries& x, Complex b, const ChebSeries& y);

    static constexpr double kPi = 3.14159265358979323846;

private:
    std::vector<Complex> coef_; // coef_[k] multiplies T_k(2x/pi - 1)
};

/// Gauss-Legendre nodes/weights on [-1, 1]; exact for polynomials of degree 2n-1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

} // namespace looppencil
