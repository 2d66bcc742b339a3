#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "looppencil/spectral.hpp"

namespace looppencil {

/// One term w * t^power * exp(i lambda t) of a two-component function on
/// [-pi, pi]; elements are short sums of such terms, so every inner product
/// in H = L2 (+) L2 reduces to the closed-form E integrals.
struct BasisTerm {
    Complex w1{0.0, 0.0}, w2{0.0, 0.0};
    int power = 0; // 0 or 1
    Complex lambda{0.0, 0.0};
};

struct BasisElement {
    std::vector<BasisTerm> terms;
};

Complex basis_inner(const BasisElement& g, const BasisElement& h);
double basis_norm(const BasisElement& g);

/// v(t, lambda) = [S1'(pi, lambda), -lambda S1(pi, lambda)] exp(i lambda t)
/// evaluated at lambda_theta (derivative element for occurrence 1).
BasisElement v_element(Complex lambda, const EdgeSolution& edge1, int order);

/// v0_{nk}(t) = [cos((beta_k - alpha1) pi), -sin((beta_k - alpha1) pi)] exp(i (2n + beta_k) t).
BasisElement v0_element(int n, double beta, double alpha1);

/// e_{nj}(t) = exp(i (4n + 2 beta_j) t), embedded as a first-component element.
BasisElement e_element(int n, double beta);

struct ClosenessSample {
    int n = 0;
    double gap_sq = 0.0; // sum_k || v_{nk0} - v0_{nk} ||^2
};

struct BasisProbe {
    std::vector<BasisElement> elements;  // v_{theta j} in subspectrum order
    Eigen::MatrixXcd gram;               // Gram of the normalized elements
    std::vector<ClosenessSample> closeness;
    std::vector<double> gram_eigenvalues; // ascending
};

struct FrameBounds {
    double m1 = 0.0; // smallest Gram eigenvalue
    double m2 = 0.0; // largest
    double condition = 0.0;
};

/// Assemble the probe elements of a subspectrum from edge-1 end values
/// supplied by `edge1_solver` (truth shooting or a reconstruction), together
/// with the quadratic-closeness samples against the reference system.
BasisProbe build_probe(const Subspectrum& sub, double alpha1,
                       const std::function<EdgeSolution(Complex, bool)>& edge1_solver);

/// Extreme eigenvalues of the normalized Gram matrix. Throws SingularGram
/// when the lower bound collapses (numerical completeness failure).
FrameBounds frame_bounds(const BasisProbe& probe, double floor = 1e-12);
FrameBounds frame_bounds(const std::vector<BasisElement>& elements, double floor = 1e-12);

/// Gram matrices of the reference systems over |n| <= window.
Eigen::MatrixXcd gram_v0(const std::vector<double>& betas4, double alpha1, int window);
Eigen::MatrixXcd gram_exponential(const std::vector<double>& betas4, int window);

struct StripBound {
    double im = 0.0;
    double lower = 0.0; // min |S(lambda)| exp(-pi |Im lambda|) on the line
    double upper = 0.0;
};

struct SineTypeReport {
    double separation = 0.0; // inf gap of the zero lattice {4n + 2 beta_j}
    bool separated = false;
    std::vector<StripBound> strips;
    bool bounded = false; // all strip bounds positive and finite
};

/// Sine-type test for the generating function of the zero set {4n + 2 beta_j}:
/// lattice separation plus two-sided bounds of |S(lambda)| e^{-pi |Im lambda|}
/// on horizontal lines.
SineTypeReport sine_type_check(const std::vector<double>& betas4);

} // namespace looppencil
