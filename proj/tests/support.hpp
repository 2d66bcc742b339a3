#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "looppencil/pencil.hpp"

namespace looppencil::testing {

inline constexpr double kPi = ChebSeries::kPi;

inline EdgeCoefficients make_edge(const std::function<Complex(double)>& p,
                                  const std::function<Complex(double)>& q, int degree = 14) {
    return EdgeCoefficients(ChebSeries::from_function(p, degree),
                            ChebSeries::from_function(q, degree));
}

inline EdgeCoefficients constant_edge(double p, double q) {
    return EdgeCoefficients(ChebSeries({Complex(p, 0.0)}), ChebSeries({Complex(q, 0.0)}));
}

inline LoopGraphPencil zero_pencil(int m) {
    std::vector<EdgeCoefficients> edges(m, constant_edge(0.0, 0.0));
    return LoopGraphPencil(std::move(edges));
}

// Smooth m = 3 pencil satisfying (A); the loop potential is asymmetric about
// pi/2 so the sign data omega_n does not vanish (conditions (C)/(D)).
inline LoopGraphPencil reference_m3() {
    std::vector<EdgeCoefficients> edges;
    edges.push_back(make_edge([](double t) { return 0.35 + 0.08 * std::cos(t); },
                              [](double t) { return 0.10 * std::sin(t); }));
    edges.push_back(make_edge([](double t) { return 0.62 - 0.07 * std::cos(2.0 * t); },
                              [](double t) { return 0.05 + 0.08 * std::cos(t); }));
    edges.push_back(make_edge([](double t) { return 0.18 * std::cos(t); },
                              [](double t) { return 0.12 * std::sin(2.0 * t) + 0.06 * std::cos(t); }));
    return LoopGraphPencil(std::move(edges));
}

// m = 2 with a smooth boundary edge and an asymmetric loop.
inline LoopGraphPencil reference_m2() {
    std::vector<EdgeCoefficients> edges;
    edges.push_back(make_edge([](double t) { return 0.4 + 0.1 * std::cos(t); },
                              [](double t) { return 0.1 * std::sin(t); }));
    edges.push_back(make_edge([](double t) { return 0.15 * std::cos(t); },
                              [](double t) { return 0.1 * std::sin(2.0 * t); }));
    return LoopGraphPencil(std::move(edges));
}

// Constant boundary edges tuned so lambda = 3 is an eigenvalue at which
// S_2(pi, .) (and necessarily S_1) vanish: omega^2 = lambda^2 - 2 p lambda
// equals 4 on edge 1 and 1 on edge 2 at lambda = 3.
inline LoopGraphPencil theta2_pencil() {
    std::vector<EdgeCoefficients> edges;
    edges.push_back(constant_edge(5.0 / 6.0, 0.0));
    edges.push_back(constant_edge(4.0 / 3.0, 0.0));
    edges.push_back(make_edge([](double t) { return 0.18 * std::cos(t); },
                              [](double t) { return 0.1 * std::sin(2.0 * t); }));
    return LoopGraphPencil(std::move(edges));
}

// Random smooth pencil with well-separated alpha residues; real-valued unless
// complex_parts is set.
inline LoopGraphPencil random_pencil(std::mt19937& rng, int m, bool complex_parts = false,
                                     double scale = 0.25) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<EdgeCoefficients> edges;
    for (int j = 0; j < m; ++j) {
        const int deg = 5;
        std::vector<Complex> pc(deg + 1), qc(deg + 1);
        for (int k = 0; k <= deg; ++k) {
            const double decay = std::pow(0.5, k);
            pc[k] = Complex(scale * decay * unit(rng),
                            complex_parts ? 0.3 * scale * decay * unit(rng) : 0.0);
            qc[k] = Complex(scale * decay * unit(rng),
                            complex_parts ? 0.3 * scale * decay * unit(rng) : 0.0);
        }
        ChebSeries p(pc), q(qc);
        // Pin the mean of p: spaced residues for the boundary edges, zero for
        // the loop.
        const Complex target = (j + 1 == m)
                                   ? Complex(0.0, 0.0)
                                   : Complex((j + 1) / static_cast<double>(m + 1), 0.0);
        p = p.plus_constant(target - p.mean());
        edges.emplace_back(std::move(p), std::move(q));
    }
    return LoopGraphPencil(std::move(edges));
}

inline std::vector<Complex> random_lambdas(std::mt19937& rng, int count, double re_max = 20.0,
                                           double im_max = 2.0) {
    std::uniform_real_distribution<double> re(-re_max, re_max);
    std::uniform_real_distribution<double> im(-im_max, im_max);
    std::vector<Complex> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.emplace_back(re(rng), im(rng));
    return out;
}

} // namespace looppencil::testing
