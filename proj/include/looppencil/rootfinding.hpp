#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "looppencil/cheb.hpp"

namespace looppencil {

struct Rect {
    double re_lo = 0.0, re_hi = 0.0;
    double im_lo = 0.0, im_hi = 0.0;

    double width() const { return re_hi - re_lo; }
    double height() const { return im_hi - im_lo; }
    Complex center() const { return Complex(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)); }
    bool contains(Complex z, double slack = 0.0) const {
        return z.real() >= re_lo - slack && z.real() <= re_hi + slack &&
               z.imag() >= im_lo - slack && z.imag() <= im_hi + slack;
    }
};

struct LocatedRoot {
    Complex lambda{0.0, 0.0};
    int multiplicity = 1;
    double residual = 0.0; // |f| at the reported point
};

struct RootFindOptions {
    double resolution = 1e-6;        // cell size at which subdivision stops
    int max_multiplicity = 2;        // clusters above this are rejected
    double samples_per_unit = 16.0;  // initial boundary sampling density
    int max_refine_depth = 40;       // phase-refinement halvings per boundary pair
    double boundary_floor = 1e-8;    // min |f| on a boundary, relative to scale
    int newton_max_iter = 48;
    double newton_step_tol = 5e-13;
};

/// Analytic function handle: `value` is required, `value_and_derivative` is
/// used by the Newton polish when present.
struct AnalyticFunction {
    std::function<Complex(Complex)> value;
    std::function<std::pair<Complex, Complex>(Complex)> value_and_derivative;
};

/// Winding number of f around the rectangle boundary by adaptive phase
/// marching; the zero-on-boundary floor is taken relative to the median |f|
/// of the boundary itself. Throws NumericalError if |f| dips below the floor
/// (caller should nudge the rectangle).
int winding_number(const AnalyticFunction& f, const Rect& rect, const RootFindOptions& opts);

/// Median |f| over a coarse boundary sampling.
double boundary_scale(const AnalyticFunction& f, const Rect& rect);

/// All zeros of f inside the rectangle, with multiplicities, found by
/// recursive argument-principle subdivision with Newton refinement. The
/// rectangle is nudged outward automatically if a zero sits on its boundary.
std::vector<LocatedRoot> locate_roots(const AnalyticFunction& f, Rect rect,
                                      const RootFindOptions& opts = {});

/// Subdivision with a winding count already established by the caller; the
/// rectangle is taken as-is (no nudging), so adjacent cells sharing clean cut
/// lines partition their zeros exactly.
void locate_roots_in(const AnalyticFunction& f, const Rect& rect, int count,
                     const RootFindOptions& opts, std::vector<LocatedRoot>& out);

/// Newton iteration for a root of multiplicity `mult` from z0; empty when it
/// fails to converge or leaves `bounds`.
std::optional<LocatedRoot> newton_polish(const AnalyticFunction& f, Complex z0, int mult,
                                         const Rect& bounds, const RootFindOptions& opts = {});

} // namespace looppencil
