#pragma once

#include <vector>

#include "looppencil/ode.hpp"
#include "looppencil/pencil.hpp"

namespace looppencil {

/// Values of the fundamental solutions of one edge at x = pi.
/// S solves the pencil equation with S(0)=0, S'(0)=1; C with C(0)=1, C'(0)=0.
/// The d-prefixed members are lambda-derivatives from the variational system
/// (populated only when requested).
struct EdgeSolution {
    Complex s{0.0, 0.0}, sp{0.0, 0.0}, c{0.0, 0.0}, cp{0.0, 0.0};
    Complex ds{0.0, 0.0}, dsp{0.0, 0.0}, dc{0.0, 0.0}, dcp{0.0, 0.0};
    bool has_derivatives = false;
};

/// Per-edge end values of a pencil at one spectral point.
struct SolutionSample {
    Complex lambda{0.0, 0.0};
    std::vector<EdgeSolution> edges;

    const EdgeSolution& edge(int j) const { return edges.at(j); } // 0-based
    const EdgeSolution& loop() const { return edges.back(); }
};

/// Integrate -y'' + (q + 2 lambda p) y = lambda^2 y across [0, pi] for both
/// fundamental solutions; optionally also the variational system
/// z'' = (q + 2 lambda p - lambda^2) z + 2(p - lambda) y for the lambda-derivatives.
EdgeSolution integrate_edge(const EdgeCoefficients& edge, Complex lambda,
                            bool with_lambda_derivative = false,
                            const IntegratorOptions& opts = {});

SolutionSample sample_pencil(const LoopGraphPencil& pencil, Complex lambda,
                             bool with_lambda_derivative = false,
                             const IntegratorOptions& opts = {});

/// |C S' - C' S - 1|, the deviation from the Wronskian identity; an
/// integration quality gauge.
double wronskian_defect(const EdgeSolution& edge);
/// Maximum defect over the edges of a sample.
double wronskian_defect(const SolutionSample& sample);

} // namespace looppencil
