#include "looppencil/rootfinding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "looppencil/errors.hpp"

namespace looppencil {

namespace {

constexpr double kTwoPi = 2.0 * ChebSeries::kPi;

struct BoundaryPoint {
    double t; // arc parameter within one segment, in [0, 1]
    Complex z;
    Complex f;
};

// Phase marching along one straight segment. Inserts midpoints until adjacent
// phase differences are below pi/2, so the total argument increment is
// unambiguous. `floor_abs` guards against zeros on the segment.
double segment_phase_change(const AnalyticFunction& f, Complex z0, Complex z1,
                            const RootFindOptions& opts, double floor_abs,
                            std::deque<BoundaryPoint> pts) {
    for (const auto& p : pts) {
        if (std::abs(p.f) < floor_abs)
            throw NumericalError("winding_number: |f| below boundary floor");
    }
    double total = 0.0;
    std::size_t i = 0;
    std::vector<int> depth(pts.size(), 0);
    while (i + 1 < pts.size()) {
        const Complex ratio = pts[i + 1].f / pts[i].f;
        const double dphi = std::arg(ratio);
        if (std::abs(dphi) <= 0.5 * ChebSeries::kPi) {
            total += dphi;
            ++i;
            continue;
        }
        if (depth[i] >= opts.max_refine_depth)
            throw NumericalError("winding_number: phase refinement depth exhausted");
        const double tm = 0.5 * (pts[i].t + pts[i + 1].t);
        const Complex zm = z0 + tm * (z1 - z0);
        const Complex vm = f.value(zm);
        if (std::abs(vm) < floor_abs)
            throw NumericalError("winding_number: |f| below boundary floor");
        pts.insert(pts.begin() + static_cast<long>(i) + 1, {tm, zm, vm});
        depth.insert(depth.begin() + static_cast<long>(i) + 1, depth[i] + 1);
        depth[i] += 1;
    }
    return total;
}

std::array<std::pair<Complex, Complex>, 4> rect_segments(const Rect& r) {
    const Complex a(r.re_lo, r.im_lo), b(r.re_hi, r.im_lo), c(r.re_hi, r.im_hi), d(r.re_lo, r.im_hi);
    return {std::make_pair(a, b), std::make_pair(b, c), std::make_pair(c, d), std::make_pair(d, a)};
}

} // namespace

double boundary_scale(const AnalyticFunction& f, const Rect& rect) {
    std::vector<double> mags;
    for (const auto& [z0, z1] : rect_segments(rect)) {
        for (int i = 0; i < 8; ++i) {
            const double t = (i + 0.5) / 8.0;
            mags.push_back(std::abs(f.value(z0 + t * (z1 - z0))));
        }
    }
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    return std::max(mags[mags.size() / 2], 1e-300);
}

int winding_number(const AnalyticFunction& f, const Rect& rect, const RootFindOptions& opts) {
    // Initial sampling of the whole boundary; the zero-on-boundary floor is
    // relative to the median so deep cells around multiple zeros, where |f|
    // is legitimately tiny, are handled at their own scale.
    std::array<std::deque<BoundaryPoint>, 4> segments;
    std::vector<double> mags;
    const auto segs = rect_segments(rect);
    for (int s = 0; s < 4; ++s) {
        const auto& [z0, z1] = segs[s];
        const double len = std::abs(z1 - z0);
        const int n = std::max(4, static_cast<int>(std::ceil(len * opts.samples_per_unit)));
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            const Complex z = z0 + t * (z1 - z0);
            const Complex v = f.value(z);
            segments[s].push_back({t, z, v});
            mags.push_back(std::abs(v));
        }
    }
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    const double floor_abs =
        std::max(mags[mags.size() / 2], 1e-300) * opts.boundary_floor;

    double total = 0.0;
    for (int s = 0; s < 4; ++s)
        total += segment_phase_change(f, segs[s].first, segs[s].second, opts, floor_abs,
                                      std::move(segments[s]));
    return static_cast<int>(std::lround(total / kTwoPi));
}

std::optional<LocatedRoot> newton_polish(const AnalyticFunction& f, Complex z0, int mult,
                                         const Rect& bounds, const RootFindOptions& opts) {
    if (!f.value_and_derivative) return std::nullopt;
    Complex z = z0;
    for (int it = 0; it < opts.newton_max_iter; ++it) {
        const auto [v, dv] = f.value_and_derivative(z);
        if (std::abs(dv) == 0.0) return std::nullopt;
        const Complex step = static_cast<double>(mult) * v / dv;
        z -= step;
        if (!bounds.contains(z, 0.5 * std::max(bounds.width(), bounds.height())))
            return std::nullopt;
        if (std::abs(step) <= opts.newton_step_tol * std::max(1.0, std::abs(z))) {
            LocatedRoot root;
            root.lambda = z;
            root.multiplicity = mult;
            root.residual = std::abs(f.value(z));
            return root;
        }
    }
    return std::nullopt;
}

namespace {

// Winding number with automatic outward nudging when a zero sits on (or too
// close to) the rectangle boundary.
int counted_winding(const AnalyticFunction& f, Rect& rect, const RootFindOptions& opts) {
    const double step = 0.17 * std::max(rect.width(), rect.height());
    for (int attempt = 0;; ++attempt) {
        try {
            return winding_number(f, rect, opts);
        } catch (const NumericalError&) {
            if (attempt >= 5) throw;
            rect.re_lo -= step * (0.31 + 0.11 * attempt);
            rect.re_hi += step * (0.27 + 0.13 * attempt);
            rect.im_lo -= step * (0.29 + 0.12 * attempt);
            rect.im_hi += step * (0.33 + 0.10 * attempt);
        }
    }
}

// Accept a Newton-refined root of the given multiplicity only when a small
// verification contour around it confirms the count. The probe radius stays
// well above the evaluation noise floor of |f|.
bool confirmed_cluster(const AnalyticFunction& f, Complex z, int mult,
                       const RootFindOptions& opts, std::vector<LocatedRoot>& out,
                       double residual) {
    const double radius = std::max(64.0 * opts.resolution, 1e-4);
    const Rect probe{z.real() - radius, z.real() + radius, z.imag() - radius, z.imag() + radius};
    int local;
    try {
        local = winding_number(f, probe, opts);
    } catch (const NumericalError&) {
        return false;
    }
    if (local != mult) return false;
    LocatedRoot root;
    root.lambda = z;
    root.multiplicity = mult;
    root.residual = residual;
    out.push_back(root);
    return true;
}

void locate_recursive(const AnalyticFunction& f, const Rect& rect, int count,
                      const RootFindOptions& opts, std::vector<LocatedRoot>& out) {
    if (count == 0) return;
    const double size = std::max(rect.width(), rect.height());

    if (count == 1) {
        auto root = newton_polish(f, rect.center(), 1, rect, opts);
        if (root && rect.contains(root->lambda, 1e-9 + 0.02 * size)) {
            out.push_back(*root);
            return;
        }
    }

    if (count == 2) {
        // Either a double zero or two nearly coincident simple zeros; the
        // multiplicity-weighted Newton step converges for both interpretations
        // to within the cluster scale. Trying it before any subdivision also
        // keeps cut lines away from even-order zeros, which the phase marching
        // cannot detect when they sit exactly on a boundary.
        auto root = newton_polish(f, rect.center(), 2, rect, opts);
        if (root && rect.contains(root->lambda, 1e-9 + 0.02 * size) &&
            confirmed_cluster(f, root->lambda, 2, opts, out, root->residual))
            return;
    }

    if (size <= opts.resolution) {
        if (count > opts.max_multiplicity)
            throw MultiplicityTooHigh("root cluster of order " + std::to_string(count) +
                                      " at resolution " + std::to_string(opts.resolution));
        LocatedRoot root;
        root.lambda = rect.center();
        root.multiplicity = count;
        root.residual = std::abs(f.value(root.lambda));
        out.push_back(root);
        return;
    }

    // Split along the longer side. Offsets avoid the midpoint so that cells
    // symmetric about the real axis never cut along it (real double zeros are
    // invisible to the phase marching when they lie exactly on a cut).
    const bool split_re = rect.width() >= rect.height();
    const double lo = split_re ? rect.re_lo : rect.im_lo;
    const double hi = split_re ? rect.re_hi : rect.im_hi;
    static constexpr double kOffsets[] = {0.44, 0.56, 0.38, 0.62, 0.41, 0.59, 0.47, 0.53, 0.5};

    for (double offset : kOffsets) {
        const double cut = lo + offset * (hi - lo);
        // Coarse dip detector along the candidate cut.
        double cut_min = 1e300, cut_max = 0.0;
        for (int i = 0; i <= 8; ++i) {
            const double s = split_re ? rect.im_lo + i * rect.height() / 8.0
                                      : rect.re_lo + i * rect.width() / 8.0;
            const Complex z = split_re ? Complex(cut, s) : Complex(s, cut);
            const double mag = std::abs(f.value(z));
            cut_min = std::min(cut_min, mag);
            cut_max = std::max(cut_max, mag);
        }
        if (cut_min < 1e-4 * cut_max) continue;

        Rect left = rect, right = rect;
        if (split_re) {
            left.re_hi = cut;
            right.re_lo = cut;
        } else {
            left.im_hi = cut;
            right.im_lo = cut;
        }
        int cl, cr;
        try {
            cl = winding_number(f, left, opts);
            cr = winding_number(f, right, opts);
        } catch (const NumericalError&) {
            continue; // a zero slipped close to this cut; try the next offset
        }
        if (cl + cr != count) continue; // inconsistent counts: cut too close to a zero
        locate_recursive(f, left, cl, opts, out);
        locate_recursive(f, right, cr, opts, out);
        return;
    }

    // Every cut failed: the zeros form a cluster tighter than the cell. Try a
    // multiplicity-weighted Newton collapse, then report the cluster if the
    // cell is already near the resolution scale.
    if (count <= opts.max_multiplicity) {
        auto root = newton_polish(f, rect.center(), count, rect, opts);
        if (root && rect.contains(root->lambda, 1e-9 + 0.02 * size) &&
            confirmed_cluster(f, root->lambda, count, opts, out, root->residual))
            return;
    }
    if (size <= 1e3 * opts.resolution) {
        if (count > opts.max_multiplicity)
            throw MultiplicityTooHigh("unseparable cluster of order " + std::to_string(count) +
                                      " within " + std::to_string(size));
        LocatedRoot root;
        root.lambda = rect.center();
        root.multiplicity = count;
        root.residual = std::abs(f.value(root.lambda));
        out.push_back(root);
        return;
    }
    throw NumericalError("locate_roots: could not find a clean subdivision cut");
}

} // namespace

void locate_roots_in(const AnalyticFunction& f, const Rect& rect, int count,
                     const RootFindOptions& opts, std::vector<LocatedRoot>& out) {
    locate_recursive(f, rect, count, opts, out);
}

std::vector<LocatedRoot> locate_roots(const AnalyticFunction& f, Rect rect,
                                      const RootFindOptions& opts) {
    const int count = counted_winding(f, rect, opts);
    std::vector<LocatedRoot> out;
    locate_recursive(f, rect, count, opts, out);
    std::sort(out.begin(), out.end(), [](const LocatedRoot& a, const LocatedRoot& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return out;
}

} // namespace looppencil
