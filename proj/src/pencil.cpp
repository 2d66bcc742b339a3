#include "looppencil/pencil.hpp"

#include <cmath>
#include <stdexcept>

namespace looppencil {

LoopGraphPencil::LoopGraphPencil(std::vector<EdgeCoefficients> e) : edges(std::move(e)) {
    if (edges.size() < 2)
        throw std::invalid_argument("LoopGraphPencil: need at least two edges (one boundary edge plus the loop)");
}

std::vector<Complex> LoopGraphPencil::alphas() const {
    std::vector<Complex> a;
    a.reserve(edges.size());
    for (const auto& e : edges) a.push_back(e.alpha);
    return a;
}

Complex compute_alpha(const EdgeCoefficients& edge) {
    const int n = std::max(8, edge.p.degree() / 2 + 1);
    const GaussRule rule = gauss_legendre(n);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = ChebSeries::kPi * (rule.nodes[i] + 1.0) / 2.0;
        acc += rule.weights[i] * edge.p.eval(x);
    }
    // Jacobian pi/2 of the map [-1,1] -> [0,pi], then divide by pi for the mean.
    return acc * (ChebSeries::kPi / 2.0) / ChebSeries::kPi;
}

std::pair<LoopGraphPencil, Complex> normalize_shift(const LoopGraphPencil& pencil) {
    const Complex shift = -pencil.loop().alpha;
    if (std::abs(shift) == 0.0) return {pencil, Complex(0.0, 0.0)};
    std::vector<EdgeCoefficients> out;
    out.reserve(pencil.edges.size());
    for (const auto& e : pencil.edges) {
        ChebSeries p_new = e.p.plus_constant(shift);
        ChebSeries q_new = ChebSeries::linear_combination(Complex(1.0, 0.0), e.q, -2.0 * shift, e.p)
                               .plus_constant(-shift * shift);
        out.emplace_back(std::move(p_new), std::move(q_new));
    }
    return {LoopGraphPencil(std::move(out)), shift};
}

namespace {
// Distance of re(a - b) to the nearest integer; the mod-1 congruence metric.
double mod1_distance(Complex a, Complex b) {
    const double d = a.real() - b.real();
    return std::abs(d - std::round(d));
}
} // namespace

AssumptionReport check_assumption_A(const LoopGraphPencil& pencil, const AssumptionOptions& opts) {
    AssumptionReport report;
    const auto alphas = pencil.alphas();
    const int m = pencil.edge_count();

    report.a_i = true;
    for (int j = 0; j < m; ++j) {
        if (std::abs(alphas[j].imag()) > opts.real_tolerance) {
            report.a_i = false;
            report.violating_edges.push_back(j);
        }
    }

    report.a_ii = true;
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
            if (mod1_distance(alphas[j], alphas[k]) <= opts.mod1_tolerance) {
                report.a_ii = false;
                report.congruent_pairs.emplace_back(j, k);
            }
        }
    }

    report.a_iii = std::abs(alphas[m - 1]) <= opts.loop_tolerance;
    if (!report.a_iii) report.violating_edges.push_back(m - 1);

    report.a_holds = report.a_i && report.a_ii && report.a_iii;
    return report;
}

} // namespace looppencil
