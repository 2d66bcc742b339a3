#include "looppencil/shooting.hpp"

#include <algorithm>
#include <cmath>

namespace looppencil {

namespace {

// State layout without derivatives: (S, S', C, C').
// With derivatives: (S, S', C, C', dS, dS', dC, dC').
template <std::size_t N>
std::array<Complex, N> run(const EdgeCoefficients& edge, Complex lambda,
                           const IntegratorOptions& opts) {
    const Complex lambda_sq = lambda * lambda;
    auto rhs = [&](double x, const std::array<Complex, N>& y, std::array<Complex, N>& dy) {
        const Complex p = edge.p.eval(x);
        const Complex q = edge.q.eval(x);
        const Complex w = q + 2.0 * lambda * p - lambda_sq;
        dy[0] = y[1];
        dy[1] = w * y[0];
        dy[2] = y[3];
        dy[3] = w * y[2];
        if constexpr (N == 8) {
            const Complex g = 2.0 * (p - lambda);
            dy[4] = y[5];
            dy[5] = w * y[4] + g * y[0];
            dy[6] = y[7];
            dy[7] = w * y[6] + g * y[2];
        }
    };
    std::array<Complex, N> y{};
    y[1] = Complex(1.0, 0.0); // S'(0) = 1
    y[2] = Complex(1.0, 0.0); // C(0) = 1
    return integrate_rkf78<N>(rhs, 0.0, ChebSeries::kPi, y, opts);
}

} // namespace

EdgeSolution integrate_edge(const EdgeCoefficients& edge, Complex lambda,
                            bool with_lambda_derivative, const IntegratorOptions& opts) {
    EdgeSolution out;
    try {
        if (with_lambda_derivative) {
            const auto y = run<8>(edge, lambda, opts);
            out = EdgeSolution{y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7], true};
        } else {
            const auto y = run<4>(edge, lambda, opts);
            out.s = y[0];
            out.sp = y[1];
            out.c = y[2];
            out.cp = y[3];
        }
    } catch (const StepFailure& e) {
        throw StepFailure(std::string(e.what()) + " (lambda=" + std::to_string(lambda.real()) +
                          (lambda.imag() < 0 ? "-" : "+") + std::to_string(std::abs(lambda.imag())) +
                          "i)");
    }
    return out;
}

SolutionSample sample_pencil(const LoopGraphPencil& pencil, Complex lambda,
                             bool with_lambda_derivative, const IntegratorOptions& opts) {
    SolutionSample sample;
    sample.lambda = lambda;
    sample.edges.reserve(pencil.edges.size());
    for (int j = 0; j < pencil.edge_count(); ++j) {
        try {
            sample.edges.push_back(integrate_edge(pencil.edge(j), lambda, with_lambda_derivative, opts));
        } catch (const StepFailure& e) {
            throw StepFailure(std::string(e.what()) + " (edge " + std::to_string(j + 1) + ")");
        }
    }
    return sample;
}

double wronskian_defect(const EdgeSolution& edge) {
    return std::abs(edge.c * edge.sp - edge.cp * edge.s - Complex(1.0, 0.0));
}

double wronskian_defect(const SolutionSample& sample) {
    double worst = 0.0;
    for (const auto& e : sample.edges) worst = std::max(worst, wronskian_defect(e));
    return worst;
}

} // namespace looppencil
