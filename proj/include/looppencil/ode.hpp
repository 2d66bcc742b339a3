#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

#include "looppencil/errors.hpp"

namespace looppencil {

struct IntegratorOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    long max_steps = 400000;
    double min_step_fraction = 1e-13; // of the interval length
};

namespace detail {

// Fehlberg 7(8) embedded pair, 13 stages. Classic coefficients; the 8th-order
// solution is propagated and the (7)-(8) difference drives step control.
struct RKF78Tableau {
    static constexpr int stages = 13;
    static constexpr double c[stages] = {
        0.0,       2.0 / 27.0, 1.0 / 9.0, 1.0 / 6.0, 5.0 / 12.0, 0.5,
        5.0 / 6.0, 1.0 / 6.0,  2.0 / 3.0, 1.0 / 3.0, 1.0,        0.0,
        1.0};
    static constexpr double a[stages][stages] = {
        {},
        {2.0 / 27.0},
        {1.0 / 36.0, 1.0 / 12.0},
        {1.0 / 24.0, 0.0, 1.0 / 8.0},
        {5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0},
        {1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0},
        {-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0},
        {31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0},
        {2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0},
        {-91.0 / 108.0, 0.0, 0.0, 23.0 / 108.0, -976.0 / 135.0, 311.0 / 54.0, -19.0 / 60.0,
         17.0 / 6.0, -1.0 / 12.0},
        {2383.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -301.0 / 82.0,
         2133.0 / 4100.0, 45.0 / 82.0, 45.0 / 164.0, 18.0 / 41.0},
        {3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0, 3.0 / 41.0,
         6.0 / 41.0, 0.0},
        {-1777.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -289.0 / 82.0,
         2193.0 / 4100.0, 51.0 / 82.0, 33.0 / 164.0, 12.0 / 41.0, 0.0, 1.0}};
    // 8th-order weights (stage 0 and 10 drop out, stages 11/12 enter).
    static constexpr double b8[stages] = {
        0.0, 0.0, 0.0, 0.0, 0.0, 34.0 / 105.0, 9.0 / 35.0, 9.0 / 35.0,
        9.0 / 280.0, 9.0 / 280.0, 0.0, 41.0 / 840.0, 41.0 / 840.0};
};

} // namespace detail

/// Adaptive RKF7(8) on a fixed-size complex first-order system.
/// Rhs signature: void(double x, const std::array<Complex,N>& y, std::array<Complex,N>& dy).
template <std::size_t N, typename Rhs>
std::array<std::complex<double>, N> integrate_rkf78(Rhs&& rhs, double x0, double x1,
                                                    std::array<std::complex<double>, N> y,
                                                    const IntegratorOptions& opts = {}) {
    using State = std::array<std::complex<double>, N>;
    using Tab = detail::RKF78Tableau;
    const double span = x1 - x0;
    if (span == 0.0) return y;

    double x = x0;
    double h = span / 16.0;
    const double h_min = std::abs(span) * opts.min_step_fraction;
    long steps = 0;

    std::array<State, Tab::stages> k;
    State y_stage, dy;

    while (x < x1) {
        if (++steps > opts.max_steps)
            throw StepFailure("integrate_rkf78: step budget exhausted at x=" + std::to_string(x));
        if (x + h > x1) h = x1 - x;

        rhs(x, y, k[0]);
        for (int s = 1; s < Tab::stages; ++s) {
            for (std::size_t i = 0; i < N; ++i) {
                std::complex<double> acc(0.0, 0.0);
                for (int j = 0; j < s; ++j) {
                    if (Tab::a[s][j] != 0.0) acc += Tab::a[s][j] * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            rhs(x + Tab::c[s] * h, y_stage, k[s]);
        }

        State y_new;
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            std::complex<double> acc(0.0, 0.0);
            for (int s = 0; s < Tab::stages; ++s) {
                if (Tab::b8[s] != 0.0) acc += Tab::b8[s] * k[s][i];
            }
            y_new[i] = y[i] + h * acc;
            const std::complex<double> e =
                h * (41.0 / 840.0) * (k[0][i] + k[10][i] - k[11][i] - k[12][i]);
            const double scale =
                opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err = std::max(err, std::abs(e) / scale);
        }

        if (err <= 1.0) {
            x += h;
            y = y_new;
            const double factor = (err == 0.0) ? 4.0 : std::min(4.0, 0.9 * std::pow(err, -0.125));
            h *= std::max(0.3, factor);
        } else {
            h *= std::max(0.1, 0.9 * std::pow(err, -0.125));
            if (h < h_min)
                throw StepFailure("integrate_rkf78: step size underflow at x=" + std::to_string(x));
        }
    }
    return y;
}

} // namespace looppencil
