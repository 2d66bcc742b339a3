#include "looppencil/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace looppencil {

namespace {

constexpr double kPi = ChebSeries::kPi;

AnalyticFunction delta_function(const LoopGraphPencil& pencil, const IntegratorOptions& ode) {
    AnalyticFunction f;
    f.value = [&pencil, ode](Complex z) { return delta(sample_pencil(pencil, z, false, ode)); };
    f.value_and_derivative = [&pencil, ode](Complex z) {
        const SolutionSample s = sample_pencil(pencil, z, true, ode);
        return std::make_pair(delta(s), delta_derivative(s));
    };
    return f;
}

AnalyticFunction loop_s_function(const LoopGraphPencil& pencil, const IntegratorOptions& ode) {
    AnalyticFunction f;
    f.value = [&pencil, ode](Complex z) { return integrate_edge(pencil.loop(), z, false, ode).s; };
    f.value_and_derivative = [&pencil, ode](Complex z) {
        const EdgeSolution e = integrate_edge(pencil.loop(), z, true, ode);
        return std::make_pair(e.s, e.ds);
    };
    return f;
}

double median_abs(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

} // namespace

// ---------------------------------------------------------------------------
// d(lambda) and the beta lattice
// ---------------------------------------------------------------------------

Complex d_function(const std::vector<double>& alphas, Complex lambda) {
    const int m1 = static_cast<int>(alphas.size()); // m - 1 boundary edges
    Complex sum(0.0, 0.0);
    for (int j = 0; j < m1; ++j) {
        Complex term = std::cos((lambda - alphas[j]) * kPi);
        for (int k = 0; k < m1; ++k)
            if (k != j) term *= std::sin((lambda - alphas[k]) * kPi);
        sum += term;
    }
    sum *= std::sin(lambda * kPi);
    Complex prod(1.0, 0.0);
    for (int k = 0; k < m1; ++k) prod *= std::sin((lambda - alphas[k]) * kPi);
    return sum + 2.0 * (std::cos(lambda * kPi) - 1.0) * prod;
}

BetaSet solve_betas(const std::vector<double>& alphas, double mod1_tolerance) {
    if (alphas.empty()) throw std::invalid_argument("solve_betas: need at least one boundary alpha");
    std::vector<double> r;
    r.reserve(alphas.size());
    for (double a : alphas) r.push_back(a - std::floor(a));
    std::sort(r.begin(), r.end());
    const int m1 = static_cast<int>(r.size());
    // Residues must stay away from each other and from the loop residue 0.
    if (r.front() <= mod1_tolerance || r.back() >= 1.0 - mod1_tolerance)
        throw DegenerateAlphas("solve_betas: a boundary alpha is congruent to the loop alpha (0 mod 1)");
    for (int j = 0; j + 1 < m1; ++j)
        if (r[j + 1] - r[j] <= mod1_tolerance)
            throw DegenerateAlphas("solve_betas: two boundary alphas collide mod 1");

    const auto f = [&r](double x) {
        double acc = -2.0 * std::tan(x * kPi / 2.0);
        for (double a : r) acc += 1.0 / std::tan((x - a) * kPi);
        return acc;
    };

    // Monotonicity intervals of the cotangent equation, in ascending order.
    std::vector<std::pair<double, double>> intervals;
    intervals.emplace_back(-1.0, r[0] - 1.0);
    for (int j = 0; j + 1 < m1; ++j) intervals.emplace_back(r[j] - 1.0, r[j + 1] - 1.0);
    intervals.emplace_back(r[m1 - 1] - 1.0, r[0]);
    for (int j = 0; j + 1 < m1; ++j) intervals.emplace_back(r[j], r[j + 1]);
    intervals.emplace_back(r[m1 - 1], 1.0);

    BetaSet out;
    out.source_alphas = r;
    for (const auto& [a, b] : intervals) {
        double lo = a + 1e-9 * (b - a);
        double hi = b - 1e-9 * (b - a);
        double flo = f(lo), fhi = f(hi);
        // f decreases from +inf to -inf across each interval.
        if (!(flo > 0.0 && fhi < 0.0)) {
            lo = a + 1e-12 * (b - a);
            hi = b - 1e-12 * (b - a);
            flo = f(lo);
            fhi = f(hi);
            if (!(flo > 0.0 && fhi < 0.0))
                throw NumericalError("solve_betas: unexpected signs on a bisection interval");
        }
        for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) > 0.0 ? lo : hi) = mid;
        }
        out.values.push_back(0.5 * (lo + hi));
    }
    out.values.push_back(0.0); // beta_{2m}
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum localization
// ---------------------------------------------------------------------------

int Spectrum::total_multiplicity() const {
    int acc = 0;
    for (const auto& e : entries) acc += e.multiplicity;
    return acc;
}

namespace {

RootFindOptions make_rootfind_options(const SpectralOptions& opts) {
    RootFindOptions rf = opts.rootfind;
    rf.resolution = opts.cell_resolution;
    return rf;
}

void append_roots(Spectrum& spectrum, const std::vector<LocatedRoot>& roots) {
    for (const auto& r : roots) {
        EigenvalueEntry e;
        e.lambda = r.lambda;
        e.multiplicity = r.multiplicity;
        e.residual = r.residual;
        spectrum.entries.push_back(e);
    }
}

// Vertical cut at base+offset such that |Delta| keeps a healthy margin along
// the cut; keeps strip boundaries off eigenvalues.
double clean_cut(const AnalyticFunction& f, double base, double im_height) {
    static constexpr double kOffsets[] = {0.0,   0.07,  -0.07, 0.13, -0.13, 0.21,
                                          -0.21, 0.29,  -0.29, 0.37, -0.37};
    for (double off : kOffsets) {
        const double x = base + off;
        std::vector<double> mags;
        double lo = 1e300;
        for (int i = 0; i <= 8; ++i) {
            const double y = -im_height + 2.0 * im_height * i / 8.0;
            const double a = std::abs(f.value(Complex(x, y)));
            mags.push_back(a);
            lo = std::min(lo, a);
        }
        if (lo > 1e-3 * median_abs(mags) && lo > 1e-250) return x;
    }
    throw NumericalError("clean_cut: no eigenvalue-free vertical line near " + std::to_string(base));
}

int strip_winding(const AnalyticFunction& f, Rect& rect, const RootFindOptions& rf) {
    for (double grow : {1.0, 1.25, 1.6}) {
        Rect attempt = rect;
        attempt.im_lo *= grow;
        attempt.im_hi *= grow;
        try {
            const int w = winding_number(f, attempt, rf);
            rect = attempt;
            return w;
        } catch (const NumericalError&) {
            if (grow == 1.6) throw;
        }
    }
    return 0; // unreachable
}

} // namespace

Spectrum locate_eigenvalues(const LoopGraphPencil& pencil, Rect window, const SpectralOptions& opts) {
    const AnalyticFunction f = delta_function(pencil, opts.ode);
    const RootFindOptions rf = make_rootfind_options(opts);
    Spectrum spectrum;
    if (window.height() == 0.0) {
        window.im_lo = -opts.im_height;
        window.im_hi = opts.im_height;
    }

    if (window.width() <= 4.0) {
        append_roots(spectrum, locate_roots(f, window, rf));
        return spectrum;
    }

    // Wide windows are processed in strips of width ~2 between eigenvalue-free
    // vertical cuts; shared cuts guarantee each zero is counted exactly once.
    std::vector<double> cuts;
    cuts.push_back(window.re_lo);
    double x = std::ceil((window.re_lo + 1.0) / 2.0) * 2.0 - 1.0; // odd integers
    for (; x < window.re_hi - 0.5; x += 2.0) {
        if (x <= window.re_lo + 0.5) continue;
        cuts.push_back(clean_cut(f, x, window.im_hi));
    }
    cuts.push_back(window.re_hi);

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rect strip{cuts[i], cuts[i + 1], window.im_lo, window.im_hi};
        const int count = winding_number(f, strip, rf);
        std::vector<LocatedRoot> roots;
        locate_roots_in(f, strip, count, rf, roots);
        append_roots(spectrum, roots);
    }
    std::sort(spectrum.entries.begin(), spectrum.entries.end(),
              [](const EigenvalueEntry& a, const EigenvalueEntry& b) {
                  if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
                  return a.lambda.imag() < b.lambda.imag();
              });
    return spectrum;
}

Spectrum locate_spectrum(const LoopGraphPencil& pencil, const BetaSet& betas, int n_max,
                         const SpectralOptions& opts) {
    const AnalyticFunction f = delta_function(pencil, opts.ode);
    const RootFindOptions rf = make_rootfind_options(opts);
    const double h = opts.im_height;

    std::vector<double> cuts;
    cuts.reserve(2 * n_max + 2);
    for (int n = -n_max; n <= n_max + 1; ++n) cuts.push_back(clean_cut(f, 2.0 * n - 1.0, h));

    Spectrum spectrum;
    for (int n = -n_max; n <= n_max; ++n) {
        Rect strip{cuts[n + n_max], cuts[n + n_max + 1], -h, h};
        const int count = strip_winding(f, strip, rf);
        if (count == 0) continue;

        // Newton from the lattice seeds 2n + beta_k.
        std::vector<LocatedRoot> found;
        for (double beta : betas.values) {
            const Complex seed(2.0 * n + beta, 0.0);
            auto root = newton_polish(f, seed, 1, strip, rf);
            if (!root || !strip.contains(root->lambda, 1e-9)) continue;
            if (root->lambda.real() >= strip.re_hi || root->lambda.real() < strip.re_lo) continue;
            bool duplicate = false;
            for (auto& existing : found) {
                if (std::abs(existing.lambda - root->lambda) < 50.0 * rf.resolution) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) found.push_back(*root);
        }

        int total = 0;
        for (const auto& r : found) total += r.multiplicity;

        if (total == count) {
            append_roots(spectrum, found);
            continue;
        }
        // Multiple seeds may have merged onto a multiple zero, or a complex
        // pair is hiding off the axis: re-localize the whole strip.
        std::vector<LocatedRoot> roots;
        locate_roots_in(f, strip, count, rf, roots);
        append_roots(spectrum, roots);
    }

    std::sort(spectrum.entries.begin(), spectrum.entries.end(),
              [](const EigenvalueEntry& a, const EigenvalueEntry& b) {
                  if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
                  return a.lambda.imag() < b.lambda.imag();
              });
    return spectrum;
}

// ---------------------------------------------------------------------------
// Numbering
// ---------------------------------------------------------------------------

void number_eigenvalues(Spectrum& spectrum, const BetaSet& betas, int n_lo, int n_hi,
                        double assignment_tie) {
    const int two_m = static_cast<int>(betas.values.size());
    const int m = two_m / 2;

    struct Target {
        double value;
        int n, k;
    };
    std::vector<Target> targets;
    for (int n = n_lo; n <= n_hi; ++n) {
        for (int k = 1; k <= two_m; ++k) {
            if (n == 0 && k >= m + 2) continue; // branches m+2..2m skip n = 0
            targets.push_back({2.0 * n + betas.values[k - 1], n, k});
        }
    }
    std::sort(targets.begin(), targets.end(), [](const Target& a, const Target& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.k < b.k;
    });

    struct Instance {
        Complex lambda;
        int multiplicity;
        double residual;
    };
    std::vector<Instance> instances;
    for (const auto& e : spectrum.entries)
        for (int i = 0; i < e.multiplicity; ++i) instances.push_back({e.lambda, e.multiplicity, e.residual});
    std::sort(instances.begin(), instances.end(), [](const Instance& a, const Instance& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });

    if (instances.size() != targets.size()) {
        std::ostringstream msg;
        msg << "number_eigenvalues: found " << instances.size() << " eigenvalue instances but the "
            << "lattice window n in [" << n_lo << ", " << n_hi << "] has " << targets.size()
            << " slots; adjust the window or the contour height";
        throw NumericalError(msg.str());
    }

    std::vector<EigenvalueEntry> numbered;
    numbered.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        EigenvalueEntry e;
        e.lambda = instances[i].lambda;
        e.multiplicity = instances[i].multiplicity;
        e.residual = instances[i].residual;
        e.n = targets[i].n;
        e.k = targets[i].k;
        numbered.push_back(e);
        if (i + 1 < instances.size()) {
            const double gap = std::abs(instances[i + 1].lambda - instances[i].lambda);
            const double target_gap = targets[i + 1].value - targets[i].value;
            if (gap <= assignment_tie && target_gap > assignment_tie &&
                std::abs(instances[i].lambda - instances[i + 1].lambda) > 0.0) {
                std::ostringstream msg;
                msg << "assignment tie at lambda ~ " << instances[i].lambda.real()
                    << ": two roots within " << assignment_tie << "; first ordering taken";
                spectrum.diagnostics.push_back(msg.str());
            }
        }
    }
    spectrum.entries = std::move(numbered);
}

// ---------------------------------------------------------------------------
// Subspectrum
// ---------------------------------------------------------------------------

Subspectrum build_subspectrum(const Spectrum& spectrum, const BetaSet& betas,
                              const LoopGraphPencil& pencil, int window_n, InverseTarget target,
                              const SpectralOptions& opts) {
    const int m = pencil.edge_count();
    const int two_m = 2 * m;
    if (static_cast<int>(betas.values.size()) != two_m)
        throw std::invalid_argument("build_subspectrum: beta set does not match the pencil");

    // Branch slots: four asymptotically separated branches. Slot 1 carries the
    // excluded n = 0 value; for m = 2 the natural choice is branch 2m, which
    // has no n = 0 member in the index set anyway.
    std::vector<int> slots;
    if (m == 2)
        slots = {4, 1, 2, 3};
    else
        slots = {1, 2, 3, 4};

    std::map<std::pair<int, int>, const EigenvalueEntry*> by_index;
    for (const auto& e : spectrum.entries) {
        if (e.k == 0) throw std::invalid_argument("build_subspectrum: spectrum is not numbered");
        by_index[{e.n, e.k}] = &e;
    }

    Subspectrum sub;
    sub.window_n = window_n;
    sub.target = target;
    for (int s : slots) sub.betas.push_back(betas.values[s - 1]);

    for (int slot = 1; slot <= 4; ++slot) {
        const int branch = slots[slot - 1];
        for (int n = -window_n; n <= window_n; ++n) {
            if (slot == 1 && n == 0) continue; // the excluded value
            const auto it = by_index.find({n, branch});
            if (it == by_index.end()) {
                std::ostringstream msg;
                msg << "build_subspectrum: spectrum lacks entry (n=" << n << ", k=" << branch << ")";
                throw NumericalError(msg.str());
            }
            SubspectrumEntry e;
            e.n = n;
            e.k = slot;
            e.lambda = it->second->lambda;
            e.multiplicity = it->second->multiplicity;
            sub.entries.push_back(e);
        }
    }

    // Group coincident values to get m_theta and the derivative-order index.
    std::vector<int> order(sub.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Complex la = sub.entries[a].lambda, lb = sub.entries[b].lambda;
        if (la.real() != lb.real()) return la.real() < lb.real();
        return la.imag() < lb.imag();
    });
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t jmax = i + 1;
        const Complex base = sub.entries[order[i]].lambda;
        while (jmax < order.size() &&
               std::abs(sub.entries[order[jmax]].lambda - base) <=
                   1e-9 * std::max(1.0, std::abs(base)))
            ++jmax;
        const int group = static_cast<int>(jmax - i);
        if (group > 2)
            throw MultiplicityTooHigh("build_subspectrum: m_theta = " + std::to_string(group) +
                                      " exceeds the supported derivative order");
        for (std::size_t j = i; j < jmax; ++j) {
            sub.entries[order[j]].m_theta = group;
            sub.entries[order[j]].occurrence = static_cast<int>(j - i);
            if (group > sub.entries[order[j]].multiplicity)
                throw NumericalError("build_subspectrum: subspectrum multiplicity exceeds the "
                                     "eigenvalue multiplicity");
        }
        i = jmax;
    }

    // Theta classification against the a-priori-known edges.
    for (auto& e : sub.entries) {
        const ThetaClassification cls = classify_entry(pencil, e.lambda, target, opts);
        e.cls = cls.cls;
        e.j_theta = cls.j_theta;
    }
    return sub;
}

ThetaClassification classify_entry(const LoopGraphPencil& pencil, Complex lambda,
                                   InverseTarget target, const SpectralOptions& opts) {
    const int m = pencil.edge_count();
    const int j_lo = (target == InverseTarget::boundary_edge) ? 1 : 0;         // 0-based
    const int j_hi = (target == InverseTarget::boundary_edge) ? m - 1 : m - 2; // inclusive
    const SolutionSample sample = sample_pencil(pencil, lambda, false, opts.ode);
    const double threshold = opts.zero_threshold / std::max(1.0, std::abs(lambda));
    std::vector<int> vanishing;
    for (int j = j_lo; j <= j_hi; ++j)
        if (std::abs(sample.edge(j).s) <= threshold) vanishing.push_back(j);

    if (vanishing.empty()) return ThetaClassification{ThetaClass::theta1, -1};

    std::ostringstream where;
    where << "lambda = " << lambda.real();
    if (lambda.imag() != 0.0) where << (lambda.imag() < 0 ? " - " : " + ")
                                    << std::abs(lambda.imag()) << "i";
    if (vanishing.size() > 1) {
        std::ostringstream msg;
        msg << "simultaneous zeros of S_j(pi, .) at " << where.str() << " for edges";
        for (int j : vanishing) msg << " " << (j + 1);
        if (target == InverseTarget::boundary_edge) throw AssumptionBViolated(msg.str());
        throw AssumptionDViolated(msg.str());
    }
    const int j0 = vanishing.front();
    if (target == InverseTarget::boundary_edge && j0 == m - 1 &&
        std::abs(dm(sample)) <= opts.zero_threshold) {
        throw AssumptionBViolated("loop factor and d_m vanish together at " + where.str());
    }
    return ThetaClassification{ThetaClass::theta2, j0 + 1};
}

// ---------------------------------------------------------------------------
// Loop sign data
// ---------------------------------------------------------------------------

SignSequence omega_sequence(const LoopGraphPencil& pencil, double re_max,
                            const SpectralOptions& opts) {
    require_normalized(pencil);
    const AnalyticFunction f = loop_s_function(pencil, opts.ode);
    const RootFindOptions rf = make_rootfind_options(opts);

    Rect window{-re_max, re_max, -opts.im_height, opts.im_height};
    // Zeros of S_m sit near the integers; half-integer edges are safe cuts.
    window.re_lo = -re_max - 0.5;
    window.re_hi = re_max + 0.5;

    Rect counted = window;
    int count = 0;
    {
        Rect attempt = counted;
        count = winding_number(f, attempt, rf);
        counted = attempt;
    }

    std::vector<LocatedRoot> roots;
    const bool real_loop = pencil.loop().p.is_real() && pencil.loop().q.is_real();
    if (real_loop) {
        // Real-axis scan with bisection; S_m(pi, .) is real on the real line.
        const auto fr = [&f](double x) { return f.value(Complex(x, 0.0)).real(); };
        const double step = 0.2;
        double prev_x = window.re_lo;
        double prev_v = fr(prev_x);
        for (double x = window.re_lo + step; x <= window.re_hi + 1e-12; x += step) {
            const double v = fr(x);
            if (prev_v == 0.0 || (prev_v < 0.0) != (v < 0.0)) {
                double lo = prev_x, hi = x, flo = prev_v;
                for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = fr(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                LocatedRoot r;
                r.lambda = Complex(0.5 * (lo + hi), 0.0);
                r.multiplicity = 1;
                r.residual = std::abs(f.value(r.lambda));
                roots.push_back(r);
            }
            prev_x = x;
            prev_v = v;
        }
    }
    if (static_cast<int>(roots.size()) != count) {
        // Undercount (complex or tangent zeros): full localization.
        roots.clear();
        locate_roots_in(f, counted, count, rf, roots);
    }

    SignSequence seq;
    for (const auto& r : roots) {
        SignEntry e;
        e.nu = r.lambda;
        e.n = static_cast<int>(std::lround(r.lambda.real()));
        e.s_residual = r.residual;
        const SolutionSample sample = sample_pencil(pencil, r.lambda, false, opts.ode);
        e.q_value = q_func(sample);
        if (std::abs(e.q_value) <= 1e-9) {
            e.omega = 0;
        } else {
            const double arg = std::arg(e.q_value);
            e.omega = (arg >= 0.0 && arg < kPi) ? 1 : -1;
        }
        for (int i = 0; i < r.multiplicity; ++i) seq.entries.push_back(e);
    }
    std::sort(seq.entries.begin(), seq.entries.end(),
              [](const SignEntry& a, const SignEntry& b) { return a.nu.real() < b.nu.real(); });
    return seq;
}

AssumptionReport check_condition_C(const SignSequence& seq, double q_floor) {
    AssumptionReport report;
    report.c_holds = true;
    for (const auto& e : seq.entries) {
        if (e.omega == 0 || std::abs(e.q_value) <= q_floor) {
            report.c_holds = false;
            report.vanishing_omegas.push_back(e.n);
        }
    }
    return report;
}

bool verify_lemma_om(const LoopGraphPencil& pencil, const SignSequence& seq, double floor,
                     const SpectralOptions& opts) {
    const bool c_holds = check_condition_C(seq).c_holds;
    double lowest = 1e300;
    for (const auto& e : seq.entries) {
        const EdgeSolution loop = integrate_edge(pencil.loop(), e.nu, false, opts.ode);
        lowest = std::min(lowest, std::abs(loop.sp + loop.c - 2.0));
    }
    const bool ok = seq.entries.empty() || lowest > floor;
    if (c_holds && !ok)
        throw LemmaViolated("common zero of S_m(pi, .) and d_m despite condition (C): min |d_m(nu)| = " +
                            std::to_string(lowest));
    return ok;
}

} // namespace looppencil
