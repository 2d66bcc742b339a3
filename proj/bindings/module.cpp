// Python bindings for the core operations: pencil setup, shooting, the
// characteristic function, beta lattices, spectrum localization, kernel
// extraction, and the two inverse-problem pipelines.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "looppencil/basis.hpp"
#include "looppencil/inverse.hpp"
#include "looppencil/io.hpp"

namespace py = pybind11;
using namespace looppencil;

namespace {

LoopGraphPencil make_pencil(const std::vector<std::pair<std::vector<Complex>, std::vector<Complex>>>& edges) {
    std::vector<EdgeCoefficients> out;
    for (const auto& [p, q] : edges)
        out.emplace_back(ChebSeries(p.empty() ? std::vector<Complex>{Complex(0, 0)} : p),
                         ChebSeries(q.empty() ? std::vector<Complex>{Complex(0, 0)} : q));
    return LoopGraphPencil(std::move(out));
}

py::dict edge_solution_dict(const EdgeSolution& e) {
    py::dict d;
    d["s"] = e.s;
    d["sp"] = e.sp;
    d["c"] = e.c;
    d["cp"] = e.cp;
    if (e.has_derivatives) {
        d["ds"] = e.ds;
        d["dsp"] = e.dsp;
        d["dc"] = e.dc;
        d["dcp"] = e.dcp;
    }
    return d;
}

py::dict spectrum_dicts(const Spectrum& spectrum) {
    py::list entries;
    for (const auto& e : spectrum.entries) {
        py::dict d;
        d["n"] = e.n;
        d["k"] = e.k;
        d["lambda"] = e.lambda;
        d["multiplicity"] = e.multiplicity;
        d["residual"] = e.residual;
        entries.append(d);
    }
    py::dict out;
    out["entries"] = entries;
    out["diagnostics"] = spectrum.diagnostics;
    return out;
}

py::dict series_dict(const ExpSeries& s) {
    py::dict d;
    d["truncation"] = s.truncation;
    d["coef"] = s.coef;
    d["t_lin"] = s.t_lin;
    d["t_quad"] = s.t_quad;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quadratic Sturm-Liouville pencils on a star graph with a loop: forward "
              "spectra and partial inverse problems.";
    m.attr("__version__") = toolkit_version();

    py::class_<LoopGraphPencil>(m, "Pencil")
        .def(py::init(&make_pencil), py::arg("edges"),
             "edges: list of (p_cheb, q_cheb) complex Chebyshev coefficient lists on [0, pi]; "
             "the last edge is the loop")
        .def_property_readonly("m", &LoopGraphPencil::edge_count)
        .def("alphas", &LoopGraphPencil::alphas)
        .def("assumption_a",
             [](const LoopGraphPencil& p) {
                 const AssumptionReport r = check_assumption_A(p);
                 py::dict d;
                 d["A_holds"] = r.a_holds;
                 d["A_i"] = r.a_i;
                 d["A_ii"] = r.a_ii;
                 d["A_iii"] = r.a_iii;
                 d["congruent_pairs"] = r.congruent_pairs;
                 return d;
             })
        .def("normalized", [](const LoopGraphPencil& p) {
            auto [shifted, shift] = normalize_shift(p);
            return py::make_tuple(shifted, shift);
        });

    m.def(
        "integrate_edge",
        [](const LoopGraphPencil& pencil, int j, Complex lambda, bool with_derivative) {
            return edge_solution_dict(integrate_edge(pencil.edge(j), lambda, with_derivative));
        },
        py::arg("pencil"), py::arg("edge"), py::arg("lam"), py::arg("with_derivative") = false,
        "End values of the fundamental solutions of edge j (0-based) at x = pi");

    m.def(
        "delta", [](const LoopGraphPencil& p, Complex lambda) { return delta(p, lambda); },
        py::arg("pencil"), py::arg("lam"), "Characteristic function");
    m.def(
        "dm", [](const LoopGraphPencil& p, Complex lambda) { return dm(p, lambda); },
        py::arg("pencil"), py::arg("lam"));
    m.def(
        "q_func", [](const LoopGraphPencil& p, Complex lambda) { return q_func(p, lambda); },
        py::arg("pencil"), py::arg("lam"));

    m.def(
        "solve_betas",
        [](const std::vector<double>& alphas) {
            const BetaSet betas = solve_betas(alphas);
            return betas.values;
        },
        py::arg("alphas"), "Lattice offsets beta_k from the boundary-edge means");
    m.def("d_function", &d_function, py::arg("alphas"), py::arg("lam"));

    m.def(
        "locate_eigenvalues",
        [](const LoopGraphPencil& pencil, double re_lo, double re_hi, double im_height) {
            SpectralOptions opts;
            opts.im_height = im_height;
            return spectrum_dicts(
                locate_eigenvalues(pencil, Rect{re_lo, re_hi, -im_height, im_height}, opts));
        },
        py::arg("pencil"), py::arg("re_lo"), py::arg("re_hi"), py::arg("im_height") = 2.0,
        "Zeros of the characteristic function in a rectangle, with multiplicities");

    m.def(
        "forward_spectrum",
        [](const LoopGraphPencil& pencil, int n_window) {
            std::vector<double> alphas;
            for (int j = 0; j + 1 < pencil.edge_count(); ++j)
                alphas.push_back(pencil.edge(j).alpha.real());
            const BetaSet betas = solve_betas(alphas);
            Spectrum spectrum = locate_spectrum(pencil, betas, n_window + 1);
            number_eigenvalues(spectrum, betas, -(n_window + 1), n_window + 1);
            Spectrum trimmed;
            for (const auto& e : spectrum.entries)
                if (std::abs(e.n) <= n_window) trimmed.entries.push_back(e);
            py::dict out = spectrum_dicts(trimmed);
            out["betas"] = betas.values;
            return out;
        },
        py::arg("pencil"), py::arg("n_window"),
        "Numbered spectrum over the lattice windows |n| <= n_window");

    m.def(
        "omega_sequence",
        [](const LoopGraphPencil& pencil, double re_max) {
            const SignSequence seq = omega_sequence(pencil, re_max);
            py::list entries;
            for (const auto& e : seq.entries) {
                py::dict d;
                d["n"] = e.n;
                d["nu"] = e.nu;
                d["omega"] = e.omega;
                d["q"] = e.q_value;
                entries.append(d);
            }
            return entries;
        },
        py::arg("pencil"), py::arg("re_max"),
        "Zeros nu_n of S_m(pi, .) with the sign data omega_n");

    m.def(
        "extract_kernels",
        [](const LoopGraphPencil& pencil, int truncation) {
            const KernelSet set = extract_kernels(pencil, truncation);
            py::list edges;
            for (std::size_t j = 0; j < set.k.size(); ++j) {
                py::dict d;
                d["K"] = series_dict(set.k[j]);
                d["N"] = series_dict(set.n[j]);
                d["L"] = series_dict(set.l[j]);
                edges.append(d);
            }
            py::dict out;
            out["edges"] = edges;
            out["T"] = series_dict(set.t);
            return out;
        },
        py::arg("pencil"), py::arg("truncation") = 32,
        "Transformation-operator kernels from integer-point samples");

    m.def(
        "invert_edge",
        [](const LoopGraphPencil& truth, int n_window, int truncation) {
            std::vector<double> alphas;
            for (int j = 0; j + 1 < truth.edge_count(); ++j)
                alphas.push_back(truth.edge(j).alpha.real());
            const BetaSet betas = solve_betas(alphas);
            Spectrum spectrum = locate_spectrum(truth, betas, n_window + 1);
            number_eigenvalues(spectrum, betas, -(n_window + 1), n_window + 1);
            const Subspectrum sub =
                build_subspectrum(spectrum, betas, truth, n_window, InverseTarget::boundary_edge);

            double best_beta = 0.0, best_margin = -1.0;
            for (int slot = 1; slot <= 4; ++slot) {
                const double est = estimate_branch_beta(sub, slot, std::max(3, n_window / 3));
                if (std::abs(std::sin(est * ChebSeries::kPi)) > best_margin) {
                    best_margin = std::abs(std::sin(est * ChebSeries::kPi));
                    best_beta = est;
                }
            }
            std::vector<double> others(alphas.begin() + 1, alphas.end());
            const double alpha1 = recover_alpha1(best_beta, others);

            AssemblyOptions opts;
            opts.truncation = truncation;
            const auto system = assemble_system(truth, sub, Complex(alpha1, 0.0), opts);
            const auto solution = solve_kernels(system);
            const auto rec = reconstruct_edge_functions(solution.kernels, Complex(alpha1, 0.0));

            double sup_gap = 0.0;
            for (int i = 0; i < 30; ++i) {
                const double x = 0.41 + i * 0.37;
                const EdgeSolution e = integrate_edge(truth.edge(0), Complex(x, 0.0));
                sup_gap = std::max(sup_gap, std::abs(rec.s1(Complex(x, 0.0)) - e.s));
            }
            py::dict out;
            out["alpha1"] = alpha1;
            out["sup_gap_s1"] = sup_gap;
            out["residual_norm"] = solution.diagnostics.residual_norm;
            out["condition"] = solution.diagnostics.condition;
            out["kernels"] = py::make_tuple(series_dict(solution.kernels.first),
                                            series_dict(solution.kernels.second));
            return out;
        },
        py::arg("pencil"), py::arg("n_window") = 8, py::arg("truncation") = 12,
        "Boundary-edge inverse round trip against the truth pencil");

    m.def("sine_type_check", [](const std::vector<double>& betas) {
        const SineTypeReport r = sine_type_check(betas);
        py::dict d;
        d["separation"] = r.separation;
        d["separated"] = r.separated;
        d["bounded"] = r.bounded;
        return d;
    });
}
