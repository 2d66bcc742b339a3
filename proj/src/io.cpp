#include "looppencil/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace looppencil {

const char* toolkit_version() { return "0.1.0"; }

namespace {

constexpr double kPi = ChebSeries::kPi;

[[noreturn]] void config_fail(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) config_fail("unknown key '" + key + "' in " + where);
    }
}

Complex parse_complex(const Json& j, const std::string& where) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    config_fail("expected a number or [re, im] pair in " + where);
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

ChebSeries parse_function(const Json& j, const std::string& where) {
    if (!j.is_object()) config_fail(where + " must be an object");
    check_keys(j, {"cheb", "samples", "degree"}, where);
    if (j.contains("cheb") && j.contains("samples"))
        config_fail(where + ": give either 'cheb' or 'samples', not both");
    if (j.contains("cheb")) {
        std::vector<Complex> coef;
        for (const auto& c : j["cheb"]) coef.push_back(parse_complex(c, where + ".cheb"));
        if (coef.empty()) coef.push_back(Complex(0.0, 0.0));
        return ChebSeries(coef);
    }
    if (j.contains("samples")) {
        std::vector<Complex> samples;
        for (const auto& c : j["samples"]) samples.push_back(parse_complex(c, where + ".samples"));
        int degree = 32;
        if (j.contains("degree")) degree = j["degree"].get<int>();
        if (degree < 0 || degree > 256) config_fail(where + ".degree out of range [0, 256]");
        return ChebSeries::from_samples(samples, degree);
    }
    config_fail(where + ": need 'cheb' or 'samples'");
}

template <typename T>
void read_number(const Json& j, const char* key, T& value, double lo, double hi) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) config_fail(std::string("solver.") + key + " must be a number");
    const double v = j[key].get<double>();
    if (v < lo || v > hi) {
        std::ostringstream msg;
        msg << "solver." << key << " = " << v << " outside [" << lo << ", " << hi << "]";
        config_fail(msg.str());
    }
    value = static_cast<T>(v);
}

} // namespace

RunConfig parse_config(const Json& j) {
    if (!j.is_object()) config_fail("top level must be an object");
    check_keys(j, {"m", "edges", "solver"}, "top level");
    if (!j.contains("m") || !j["m"].is_number_integer()) config_fail("'m' (edge count) is required");
    const int m = j["m"].get<int>();
    if (m < 2) config_fail("m must be >= 2");
    if (!j.contains("edges") || !j["edges"].is_array()) config_fail("'edges' array is required");
    if (static_cast<int>(j["edges"].size()) != m)
        config_fail("'edges' must list exactly m = " + std::to_string(m) + " entries");

    RunConfig config;
    for (int i = 0; i < m; ++i) {
        const Json& e = j["edges"][i];
        const std::string where = "edges[" + std::to_string(i) + "]";
        if (e.is_null()) {
            config.edges.push_back(std::nullopt);
            continue;
        }
        if (!e.is_object()) config_fail(where + " must be an object or null");
        check_keys(e, {"p", "q"}, where);
        ChebSeries p = e.contains("p") ? parse_function(e["p"], where + ".p") : ChebSeries();
        ChebSeries q = e.contains("q") ? parse_function(e["q"], where + ".q") : ChebSeries();
        config.edges.emplace_back(EdgeCoefficients(std::move(p), std::move(q)));
    }

    if (j.contains("solver")) {
        const Json& s = j["solver"];
        if (!s.is_object()) config_fail("'solver' must be an object");
        check_keys(s,
                   {"ode_rtol", "ode_atol", "window_n", "truncation", "im_height",
                    "cell_resolution", "regularization", "zero_threshold", "mod1_tolerance",
                    "fit_degree", "fit_grid", "seed", "polynomial_tail", "window_re"},
                   "solver");
        SolverConfig& sc = config.solver;
        read_number(s, "ode_rtol", sc.ode_rtol, 1e-14, 1e-6);
        read_number(s, "ode_atol", sc.ode_atol, 0.0, 1e-6);
        read_number(s, "window_n", sc.window_n, 1, 200);
        read_number(s, "truncation", sc.truncation, 8, 256);
        read_number(s, "im_height", sc.im_height, 0.1, 20.0);
        read_number(s, "cell_resolution", sc.cell_resolution, 1e-10, 1e-2);
        read_number(s, "regularization", sc.regularization, 0.0, 1.0);
        read_number(s, "zero_threshold", sc.zero_threshold, 1e-14, 1e-2);
        read_number(s, "mod1_tolerance", sc.mod1_tolerance, 1e-14, 0.4);
        read_number(s, "fit_degree", sc.fit_degree, 0, 64);
        read_number(s, "fit_grid", sc.fit_grid, 8, 512);
        read_number(s, "seed", sc.seed, 0, 4294967295.0);
        if (s.contains("polynomial_tail")) {
            if (!s["polynomial_tail"].is_boolean()) config_fail("solver.polynomial_tail must be a boolean");
            sc.polynomial_tail = s["polynomial_tail"].get<bool>();
        }
        if (s.contains("window_re")) {
            const Json& w = s["window_re"];
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
                config_fail("solver.window_re must be [lo, hi]");
            sc.window_re_lo = w[0].get<double>();
            sc.window_re_hi = w[1].get<double>();
            if (*sc.window_re_lo >= *sc.window_re_hi) config_fail("solver.window_re must be increasing");
        }
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ConfigError("config: JSON parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

namespace {

Json cheb_to_json(const ChebSeries& series) {
    Json coef = Json::array();
    for (const Complex& c : series.coefficients()) coef.push_back(complex_to_json(c));
    return Json{{"cheb", coef}};
}

} // namespace

Json config_to_json(const RunConfig& config) {
    Json edges = Json::array();
    for (const auto& e : config.edges) {
        if (!e) {
            edges.push_back(nullptr);
            continue;
        }
        edges.push_back(Json{{"p", cheb_to_json(e->p)}, {"q", cheb_to_json(e->q)}});
    }
    const SolverConfig& s = config.solver;
    Json solver{{"ode_rtol", s.ode_rtol},
                {"ode_atol", s.ode_atol},
                {"window_n", s.window_n},
                {"truncation", s.truncation},
                {"im_height", s.im_height},
                {"cell_resolution", s.cell_resolution},
                {"regularization", s.regularization},
                {"zero_threshold", s.zero_threshold},
                {"mod1_tolerance", s.mod1_tolerance},
                {"fit_degree", s.fit_degree},
                {"fit_grid", s.fit_grid},
                {"seed", s.seed},
                {"polynomial_tail", s.polynomial_tail}};
    if (s.window_re_lo) solver["window_re"] = Json::array({*s.window_re_lo, *s.window_re_hi});
    return Json{{"m", config.edge_count()}, {"edges", edges}, {"solver", solver}};
}

std::string config_hash(const RunConfig& config) {
    const std::string dump = config_to_json(config).dump();
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

LoopGraphPencil full_pencil(const RunConfig& config) {
    std::vector<EdgeCoefficients> edges;
    for (int i = 0; i < config.edge_count(); ++i) {
        if (!config.edges[i])
            throw ConfigError("config: edge " + std::to_string(i + 1) +
                              " is required for this command but missing");
        edges.push_back(*config.edges[i]);
    }
    return LoopGraphPencil(std::move(edges));
}

LoopGraphPencil pencil_with_placeholder(const RunConfig& config, int slot) {
    std::vector<EdgeCoefficients> edges;
    for (int i = 0; i < config.edge_count(); ++i) {
        if (i == slot) {
            edges.emplace_back(ChebSeries(), ChebSeries());
            continue;
        }
        if (!config.edges[i])
            throw ConfigError("config: edge " + std::to_string(i + 1) +
                              " is required for this command but missing");
        edges.push_back(*config.edges[i]);
    }
    return LoopGraphPencil(std::move(edges));
}

IntegratorOptions to_integrator_options(const SolverConfig& solver) {
    IntegratorOptions opts;
    opts.rtol = solver.ode_rtol;
    opts.atol = solver.ode_atol;
    return opts;
}

SpectralOptions to_spectral_options(const SolverConfig& solver) {
    SpectralOptions opts;
    opts.im_height = solver.im_height;
    opts.cell_resolution = solver.cell_resolution;
    opts.zero_threshold = solver.zero_threshold;
    opts.ode = to_integrator_options(solver);
    return opts;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const Spectrum& spectrum) {
    Json entries = Json::array();
    for (const auto& e : spectrum.entries) {
        entries.push_back(Json{{"n", e.n},
                               {"k", e.k},
                               {"lambda", complex_to_json(e.lambda)},
                               {"multiplicity", e.multiplicity},
                               {"residual", e.residual}});
    }
    return Json{{"entries", entries}, {"diagnostics", spectrum.diagnostics}};
}

Spectrum spectrum_from_json(const Json& j) {
    Spectrum s;
    for (const auto& e : j.at("entries")) {
        EigenvalueEntry entry;
        entry.n = e.at("n").get<int>();
        entry.k = e.at("k").get<int>();
        entry.lambda = parse_complex(e.at("lambda"), "spectrum entry");
        entry.multiplicity = e.at("multiplicity").get<int>();
        entry.residual = e.at("residual").get<double>();
        s.entries.push_back(entry);
    }
    if (j.contains("diagnostics")) s.diagnostics = j["diagnostics"].get<std::vector<std::string>>();
    return s;
}

Json to_json(const BetaSet& betas) {
    return Json{{"values", betas.values}, {"source_alphas", betas.source_alphas}};
}

BetaSet betas_from_json(const Json& j) {
    BetaSet b;
    b.values = j.at("values").get<std::vector<double>>();
    b.source_alphas = j.at("source_alphas").get<std::vector<double>>();
    return b;
}

Json to_json(const Subspectrum& sub) {
    Json entries = Json::array();
    for (const auto& e : sub.entries) {
        entries.push_back(Json{{"n", e.n},
                               {"k", e.k},
                               {"lambda", complex_to_json(e.lambda)},
                               {"multiplicity", e.multiplicity},
                               {"m_theta", e.m_theta},
                               {"occurrence", e.occurrence},
                               {"class", e.cls == ThetaClass::theta1 ? "theta1" : "theta2"},
                               {"j_theta", e.j_theta}});
    }
    return Json{{"target", sub.target == InverseTarget::boundary_edge ? "edge" : "loop"},
                {"window_n", sub.window_n},
                {"betas", sub.betas},
                {"entries", entries}};
}

Subspectrum subspectrum_from_json(const Json& j) {
    Subspectrum sub;
    sub.target = j.at("target").get<std::string>() == "edge" ? InverseTarget::boundary_edge
                                                             : InverseTarget::loop;
    sub.window_n = j.at("window_n").get<int>();
    sub.betas = j.at("betas").get<std::vector<double>>();
    for (const auto& e : j.at("entries")) {
        SubspectrumEntry entry;
        entry.n = e.at("n").get<int>();
        entry.k = e.at("k").get<int>();
        entry.lambda = parse_complex(e.at("lambda"), "subspectrum entry");
        entry.multiplicity = e.at("multiplicity").get<int>();
        entry.m_theta = e.at("m_theta").get<int>();
        entry.occurrence = e.at("occurrence").get<int>();
        entry.cls = e.at("class").get<std::string>() == "theta1" ? ThetaClass::theta1
                                                                 : ThetaClass::theta2;
        entry.j_theta = e.at("j_theta").get<int>();
        sub.entries.push_back(entry);
    }
    return sub;
}

Json to_json(const SignSequence& seq) {
    Json entries = Json::array();
    for (const auto& e : seq.entries) {
        entries.push_back(Json{{"n", e.n},
                               {"nu", complex_to_json(e.nu)},
                               {"omega", e.omega},
                               {"q", complex_to_json(e.q_value)},
                               {"s_residual", e.s_residual}});
    }
    return Json{{"entries", entries}};
}

SignSequence sign_sequence_from_json(const Json& j) {
    SignSequence seq;
    for (const auto& e : j.at("entries")) {
        SignEntry entry;
        entry.n = e.at("n").get<int>();
        entry.nu = parse_complex(e.at("nu"), "omega entry");
        entry.omega = e.at("omega").get<int>();
        if (e.contains("q")) entry.q_value = parse_complex(e["q"], "omega entry q");
        if (e.contains("s_residual")) entry.s_residual = e["s_residual"].get<double>();
        seq.entries.push_back(entry);
    }
    return seq;
}

Json to_json(const ExpSeries& series) {
    Json coef = Json::array();
    for (const Complex& c : series.coef) coef.push_back(complex_to_json(c));
    return Json{{"truncation", series.truncation},
                {"coef", coef},
                {"t_lin", complex_to_json(series.t_lin)},
                {"t_quad", complex_to_json(series.t_quad)}};
}

ExpSeries exp_series_from_json(const Json& j) {
    ExpSeries series(j.at("truncation").get<int>());
    const Json& coef = j.at("coef");
    if (static_cast<int>(coef.size()) != 2 * series.truncation + 1)
        throw ConfigError("exp series: coefficient count does not match truncation");
    for (int i = 0; i < static_cast<int>(coef.size()); ++i)
        series.coef[i] = parse_complex(coef[i], "exp series");
    series.t_lin = parse_complex(j.at("t_lin"), "exp series t_lin");
    series.t_quad = parse_complex(j.at("t_quad"), "exp series t_quad");
    return series;
}

Json to_json(const KernelPair& pair) {
    return Json{{"first", to_json(pair.first)}, {"second", to_json(pair.second)}};
}

KernelPair kernel_pair_from_json(const Json& j) {
    KernelPair pair;
    pair.first = exp_series_from_json(j.at("first"));
    pair.second = exp_series_from_json(j.at("second"));
    return pair;
}

Json to_json(const KernelSet& set) {
    Json edges = Json::array();
    for (std::size_t j = 0; j < set.k.size(); ++j) {
        edges.push_back(Json{{"K", to_json(set.k[j])},
                             {"N", to_json(set.n[j])},
                             {"L", to_json(set.l[j])}});
    }
    return Json{{"truncation", set.truncation}, {"edges", edges}, {"T", to_json(set.t)}};
}

Json to_json(const AssumptionReport& report) {
    Json pairs = Json::array();
    for (const auto& [a, b] : report.congruent_pairs) pairs.push_back(Json::array({a + 1, b + 1}));
    return Json{{"A_holds", report.a_holds},
                {"A_i", report.a_i},
                {"A_ii", report.a_ii},
                {"A_iii", report.a_iii},
                {"B_holds", report.b_holds},
                {"C_holds", report.c_holds},
                {"D_holds", report.d_holds},
                {"violating_edges", report.violating_edges},
                {"congruent_pairs", pairs},
                {"violating_thetas", report.violating_thetas},
                {"vanishing_omegas", report.vanishing_omegas}};
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

Json RunContext::stamp(const char* kind) const {
    return Json{{"kind", kind}, {"toolkit_version", toolkit_version()}, {"config_hash", hash}};
}

RunContext make_run_context(const RunConfig& config, const std::filesystem::path& out_dir) {
    RunContext ctx;
    ctx.config = config;
    ctx.hash = config_hash(config);
    ctx.dir = out_dir / ctx.hash.substr(0, 12);
    std::filesystem::create_directories(ctx.dir);
    write_json_file(ctx.dir / "resolved_config.json", config_to_json(config));
    return ctx;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("missing artifact: " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ConfigError("artifact parse error in " + path.string() + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

std::string format_sig17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf);
}

void write_spectrum_csv(const std::filesystem::path& path, const RunContext& ctx,
                        const Spectrum& spectrum) {
    std::ostringstream out;
    out << "# looppencil " << toolkit_version() << " spectrum\n";
    out << "# config " << ctx.hash << "\n";
    out << "n,k,re,im,multiplicity,residual\n";
    for (const auto& e : spectrum.entries) {
        out << e.n << ',' << e.k << ',' << format_sig17(e.lambda.real()) << ','
            << format_sig17(e.lambda.imag()) << ',' << e.multiplicity << ','
            << format_sig17(e.residual) << '\n';
    }
    write_text_file(path, out.str());
}

void write_spectrum_svg(const std::filesystem::path& path, const Spectrum& spectrum,
                        const BetaSet* betas) {
    double re_lo = -1.0, re_hi = 1.0, im_max = 0.5;
    for (const auto& e : spectrum.entries) {
        re_lo = std::min(re_lo, e.lambda.real());
        re_hi = std::max(re_hi, e.lambda.real());
        im_max = std::max(im_max, std::abs(e.lambda.imag()));
    }
    re_lo -= 1.0;
    re_hi += 1.0;
    const double w = 960.0, h = 260.0, margin = 40.0;
    const double sx = (w - 2 * margin) / (re_hi - re_lo);
    const double sy = (h / 2 - margin) / im_max;
    const auto px = [&](double re) { return margin + (re - re_lo) * sx; };
    const auto py = [&](double im) { return h / 2 - im * sy; };

    std::ostringstream out;
    char buf[128];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 260\">\n";
    out << "<rect width=\"960\" height=\"260\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#888\"/>\n",
                  px(re_lo), py(0.0), px(re_hi), py(0.0));
    out << buf;
    for (double tick = std::ceil(re_lo / 2.0) * 2.0; tick <= re_hi; tick += 2.0) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>\n",
                      px(tick), py(0.0) - 4, px(tick), py(0.0) + 4);
        out << buf;
    }
    if (betas != nullptr) {
        const int n_lo = static_cast<int>(std::floor(re_lo / 2.0));
        const int n_hi = static_cast<int>(std::ceil(re_hi / 2.0));
        for (int n = n_lo; n <= n_hi; ++n) {
            for (double beta : betas->values) {
                const double re = 2.0 * n + beta;
                if (re < re_lo || re > re_hi) continue;
                const double x = px(re), y = py(0.0);
                std::snprintf(buf, sizeof(buf),
                              "<path d=\"M %.2f %.2f L %.2f %.2f M %.2f %.2f L %.2f %.2f\" "
                              "stroke=\"#d62728\" stroke-width=\"1\"/>\n",
                              x - 3, y - 3, x + 3, y + 3, x - 3, y + 3, x + 3, y - 3);
                out << buf;
            }
        }
    }
    for (const auto& e : spectrum.entries) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f77b4\" "
                      "fill-opacity=\"0.75\"/>\n",
                      px(e.lambda.real()), py(e.lambda.imag()));
        out << buf;
    }
    out << "</svg>\n";
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Pipeline commands
// ---------------------------------------------------------------------------

namespace {

std::vector<double> boundary_alphas_real(const LoopGraphPencil& pencil) {
    std::vector<double> a;
    for (int j = 0; j + 1 < pencil.edge_count(); ++j) a.push_back(pencil.edge(j).alpha.real());
    return a;
}

} // namespace

Json cmd_forward(const RunContext& ctx) {
    const LoopGraphPencil pencil = full_pencil(ctx.config);
    const SolverConfig& solver = ctx.config.solver;
    const SpectralOptions opts = to_spectral_options(solver);
    const AssumptionOptions aopts{1e-10, solver.mod1_tolerance, 1e-10};
    const AssumptionReport a_report = check_assumption_A(pencil, aopts);

    Json summary = ctx.stamp("forward");
    summary["assumption_A"] = to_json(a_report);

    std::optional<BetaSet> betas;
    if (a_report.a_holds) {
        betas = solve_betas(boundary_alphas_real(pencil), solver.mod1_tolerance);
        write_json_file(ctx.dir / "betas.json", Json{{"stamp", ctx.stamp("betas")},
                                                     {"betas", to_json(*betas)}});
    }

    Spectrum spectrum;
    bool numbered = false;
    if (solver.window_re_lo) {
        Rect window{*solver.window_re_lo, *solver.window_re_hi, -solver.im_height,
                    solver.im_height};
        spectrum = locate_eigenvalues(pencil, window, opts);
    } else {
        if (!betas)
            throw AssumptionError(
                "forward: assumption (A) fails, so the lattice window is undefined; "
                "give solver.window_re for a raw localization");
        const int m_window = solver.window_n + 1;
        spectrum = locate_spectrum(pencil, *betas, m_window, opts);
        number_eigenvalues(spectrum, *betas, -m_window, m_window, opts.assignment_tie);
        // Trim to the requested coverage.
        Spectrum trimmed;
        trimmed.diagnostics = spectrum.diagnostics;
        for (const auto& e : spectrum.entries)
            if (std::abs(e.n) <= solver.window_n) trimmed.entries.push_back(e);
        spectrum = std::move(trimmed);
        numbered = true;
    }
    summary["numbered"] = numbered;
    summary["eigenvalue_count"] = spectrum.entries.size();

    double worst_residual = 0.0;
    for (const auto& e : spectrum.entries) worst_residual = std::max(worst_residual, e.residual);
    summary["max_delta_residual"] = worst_residual;

    write_json_file(ctx.dir / "spectrum.json",
                    Json{{"stamp", ctx.stamp("spectrum")}, {"spectrum", to_json(spectrum)}});
    write_spectrum_csv(ctx.dir / "spectrum.csv", ctx, spectrum);
    write_spectrum_svg(ctx.dir / "spectrum.svg", spectrum, betas ? &*betas : nullptr);

    // Loop sign data, available once the pencil is normalized.
    if (std::abs(pencil.loop().alpha) <= 1e-10) {
        const SignSequence seq = omega_sequence(pencil, solver.window_n + 0.49, opts);
        const AssumptionReport c_report = check_condition_C(seq);
        write_json_file(ctx.dir / "omega.json", Json{{"stamp", ctx.stamp("omega")},
                                                     {"omega", to_json(seq)},
                                                     {"condition_C", c_report.c_holds}});
        summary["condition_C"] = c_report.c_holds;
        summary["nu_count"] = seq.entries.size();
    }

    write_json_file(ctx.dir / "forward_summary.json", summary);
    return summary;
}

Json cmd_betas(const RunContext& ctx) {
    const LoopGraphPencil pencil = full_pencil(ctx.config);
    const BetaSet betas = solve_betas(boundary_alphas_real(pencil), ctx.config.solver.mod1_tolerance);
    Json out = ctx.stamp("betas");
    out["betas"] = to_json(betas);
    Json residuals = Json::array();
    for (double beta : betas.values)
        residuals.push_back(std::abs(d_function(betas.source_alphas, Complex(beta, 0.0))));
    out["d_residuals"] = residuals;
    write_json_file(ctx.dir / "betas.json", out);
    return out;
}

Json cmd_subspectrum(const RunContext& ctx, InverseTarget target) {
    const LoopGraphPencil pencil = full_pencil(ctx.config);
    const SpectralOptions opts = to_spectral_options(ctx.config.solver);
    const Spectrum spectrum =
        spectrum_from_json(read_json_file(ctx.dir / "spectrum.json").at("spectrum"));
    const BetaSet betas = betas_from_json(read_json_file(ctx.dir / "betas.json").at("betas"));
    const Subspectrum sub =
        build_subspectrum(spectrum, betas, pencil, ctx.config.solver.window_n, target, opts);
    const char* name = (target == InverseTarget::boundary_edge) ? "subspectrum_edge.json"
                                                                : "subspectrum_loop.json";
    Json out = ctx.stamp("subspectrum");
    out["subspectrum"] = to_json(sub);
    int theta2 = 0;
    for (const auto& e : sub.entries)
        if (e.cls == ThetaClass::theta2) ++theta2;
    out["theta2_count"] = theta2;
    out["entry_count"] = sub.entries.size();
    write_json_file(ctx.dir / name, out);
    return out;
}

Json cmd_invert_edge(const RunContext& ctx) {
    const SolverConfig& solver = ctx.config.solver;
    const Subspectrum sub =
        subspectrum_from_json(read_json_file(ctx.dir / "subspectrum_edge.json").at("subspectrum"));
    const LoopGraphPencil known = pencil_with_placeholder(ctx.config, 0);

    // Branch limits and the recovered alpha_1 (mod 1).
    Json beta_estimates = Json::array();
    int best_slot = 1;
    double best_margin = -1.0;
    std::vector<double> est(5, 0.0);
    for (int slot = 1; slot <= 4; ++slot) {
        est[slot] = estimate_branch_beta(sub, slot, std::max(4, sub.window_n / 3));
        beta_estimates.push_back(est[slot]);
        const double margin = std::abs(std::sin(est[slot] * kPi));
        if (margin > best_margin) {
            best_margin = margin;
            best_slot = slot;
        }
    }
    std::vector<double> other_alphas;
    for (int j = 1; j + 1 < known.edge_count(); ++j) other_alphas.push_back(known.edge(j).alpha.real());
    const double alpha1 = recover_alpha1(est[best_slot], other_alphas);

    AssemblyOptions aopts;
    aopts.truncation = solver.truncation;
    aopts.polynomial_columns = solver.polynomial_tail;
    aopts.ode = to_integrator_options(solver);
    const ReconstructionSystem system = assemble_system(known, sub, Complex(alpha1, 0.0), aopts);

    SolveOptions sopts;
    sopts.regularization = solver.regularization;
    const KernelSolution solution = solve_kernels(system, sopts);
    const EdgeReconstruction rec = reconstruct_edge_functions(solution.kernels, Complex(alpha1, 0.0));

    FitOptions fopts;
    fopts.degree = solver.fit_degree;
    fopts.grid = solver.fit_grid;
    fopts.ode = to_integrator_options(solver);
    const CoefficientFit fit = fit_edge_coefficients(rec, fopts);

    Json diag = ctx.stamp("invert-edge");
    diag["alpha1_recovered"] = alpha1;
    diag["alpha1_slot"] = best_slot;
    diag["beta_estimates"] = beta_estimates;
    diag["solve"] = Json{{"residual_norm", solution.diagnostics.residual_norm},
                         {"max_row_residual", solution.diagnostics.max_row_residual},
                         {"sigma_min", solution.diagnostics.sigma_min},
                         {"sigma_max", solution.diagnostics.sigma_max},
                         {"condition", solution.diagnostics.condition},
                         {"regularization_used", solution.diagnostics.regularization_used},
                         {"rank", solution.diagnostics.rank}};
    diag["fit_residual"] = fit.residual;
    diag["fit_iterations"] = fit.iterations;
    diag["moment_residual"] =
        std::abs(solution.kernels.first.integral() - std::sin(alpha1 * kPi));

    // Reconstruction samples, with truth columns when edge 1 is known.
    const bool has_truth = ctx.config.edges[0].has_value();
    std::ostringstream csv;
    csv << "# looppencil " << toolkit_version() << " edge reconstruction\n";
    csv << "# config " << ctx.hash << "\n";
    csv << "lambda,s1_re,s1_im,s1p_re,s1p_im";
    if (has_truth) csv << ",s1_true,s1p_true,s1_gap,s1p_gap";
    csv << "\n";
    double sup_gap_s = 0.0, sup_gap_sp = 0.0, fit_gap_p = 0.0, fit_gap_q = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double lam = 0.275 + i * 0.325;
        const Complex s = rec.s1(Complex(lam, 0.0));
        const Complex sp = rec.s1p(Complex(lam, 0.0));
        csv << format_sig17(lam) << ',' << format_sig17(s.real()) << ',' << format_sig17(s.imag())
            << ',' << format_sig17(sp.real()) << ',' << format_sig17(sp.imag());
        if (has_truth) {
            const EdgeSolution e =
                integrate_edge(*ctx.config.edges[0], Complex(lam, 0.0), false, aopts.ode);
            sup_gap_s = std::max(sup_gap_s, std::abs(s - e.s));
            sup_gap_sp = std::max(sup_gap_sp, std::abs(sp - e.sp));
            csv << ',' << format_sig17(e.s.real()) << ',' << format_sig17(e.sp.real()) << ','
                << format_sig17(std::abs(s - e.s)) << ',' << format_sig17(std::abs(sp - e.sp));
        }
        csv << "\n";
    }
    write_text_file(ctx.dir / "edge_reconstruction.csv", csv.str());

    if (has_truth) {
        for (int i = 0; i <= 40; ++i) {
            const double x = kPi * i / 40.0;
            fit_gap_p = std::max(fit_gap_p,
                                 std::abs(fit.p.eval(x) - ctx.config.edges[0]->p.eval(x)));
            fit_gap_q = std::max(fit_gap_q,
                                 std::abs(fit.q.eval(x) - ctx.config.edges[0]->q.eval(x)));
        }
        diag["truth"] = Json{{"sup_gap_s1", sup_gap_s},
                             {"sup_gap_s1p", sup_gap_sp},
                             {"fit_gap_p_max", fit_gap_p},
                             {"fit_gap_q_max", fit_gap_q}};
    }

    write_json_file(ctx.dir / "edge_kernels.json",
                    Json{{"stamp", ctx.stamp("edge-kernels")},
                         {"components", Json::array({"K1", "N1"})},
                         {"kernels", to_json(solution.kernels)}});
    write_json_file(ctx.dir / "edge_fit.json", Json{{"stamp", ctx.stamp("edge-fit")},
                                                    {"p", cheb_to_json(fit.p)},
                                                    {"q", cheb_to_json(fit.q)},
                                                    {"residual", fit.residual},
                                                    {"iterations", fit.iterations}});
    write_json_file(ctx.dir / "edge_diagnostics.json", diag);
    return diag;
}

Json cmd_invert_loop(const RunContext& ctx) {
    const SolverConfig& solver = ctx.config.solver;
    const Subspectrum sub =
        subspectrum_from_json(read_json_file(ctx.dir / "subspectrum_loop.json").at("subspectrum"));
    const SignSequence omega =
        sign_sequence_from_json(read_json_file(ctx.dir / "omega.json").at("omega"));
    const LoopGraphPencil known = pencil_with_placeholder(ctx.config, ctx.config.edge_count() - 1);

    AssemblyOptions aopts;
    aopts.truncation = solver.truncation;
    aopts.polynomial_columns = solver.polynomial_tail;
    aopts.ode = to_integrator_options(solver);
    const ReconstructionSystem system = assemble_loop_system(known, sub, omega, aopts);

    SolveOptions sopts;
    sopts.regularization = solver.regularization;
    const KernelSolution solution = solve_kernels(system, sopts);
    const LoopReconstruction rec = reconstruct_loop_functions(solution.kernels);

    const bool has_truth = ctx.config.edges.back().has_value();
    std::optional<LoopGraphPencil> truth;
    if (has_truth) truth = full_pencil(ctx.config);
    const LoopVerification verification = verify_loop_recovery(
        rec, omega, truth ? &*truth : nullptr, to_spectral_options(solver));

    FitOptions fopts;
    fopts.degree = solver.fit_degree;
    fopts.grid = solver.fit_grid;
    fopts.ode = to_integrator_options(solver);
    const CoefficientFit fit = fit_loop_coefficients(rec, fopts);

    Json diag = ctx.stamp("invert-loop");
    diag["solve"] = Json{{"residual_norm", solution.diagnostics.residual_norm},
                         {"max_row_residual", solution.diagnostics.max_row_residual},
                         {"sigma_min", solution.diagnostics.sigma_min},
                         {"sigma_max", solution.diagnostics.sigma_max},
                         {"condition", solution.diagnostics.condition},
                         {"regularization_used", solution.diagnostics.regularization_used},
                         {"rank", solution.diagnostics.rank}};
    diag["moment_residual"] = std::abs(solution.kernels.first.integral());
    diag["fit_residual"] = fit.residual;
    diag["fit_iterations"] = fit.iterations;

    Json ver{{"max_nu_gap", verification.max_nu_gap},
             {"min_dm_at_zeros", verification.min_dm_at_zeros},
             {"omega_consistent", verification.omega_consistent},
             {"has_truth", verification.has_truth}};
    if (verification.has_truth) {
        ver["sup_gap_s"] = verification.sup_gap_s;
        ver["sup_gap_dm"] = verification.sup_gap_dm;
        ver["omega_matches_truth"] = verification.omega_matches_truth;
        double fit_gap_p = 0.0, fit_gap_q = 0.0;
        for (int i = 0; i <= 40; ++i) {
            const double x = kPi * i / 40.0;
            fit_gap_p =
                std::max(fit_gap_p, std::abs(fit.p.eval(x) - ctx.config.edges.back()->p.eval(x)));
            fit_gap_q =
                std::max(fit_gap_q, std::abs(fit.q.eval(x) - ctx.config.edges.back()->q.eval(x)));
        }
        ver["fit_gap_p_max"] = fit_gap_p;
        ver["fit_gap_q_max"] = fit_gap_q;
    }
    diag["verification"] = ver;

    std::ostringstream csv;
    csv << "# looppencil " << toolkit_version() << " loop reconstruction\n";
    csv << "# config " << ctx.hash << "\n";
    csv << "lambda,sm_re,sm_im,dm_re,dm_im\n";
    for (int i = 0; i < 50; ++i) {
        const double lam = -16.0 + i * 0.653;
        const Complex s = rec.sm(Complex(lam, 0.0));
        const Complex d = rec.dm(Complex(lam, 0.0));
        csv << format_sig17(lam) << ',' << format_sig17(s.real()) << ',' << format_sig17(s.imag())
            << ',' << format_sig17(d.real()) << ',' << format_sig17(d.imag()) << "\n";
    }
    write_text_file(ctx.dir / "loop_reconstruction.csv", csv.str());

    write_json_file(ctx.dir / "loop_kernels.json",
                    Json{{"stamp", ctx.stamp("loop-kernels")},
                         {"components", Json::array({"Km", "Tm"})},
                         {"kernels", to_json(solution.kernels)}});
    write_json_file(ctx.dir / "loop_fit.json", Json{{"stamp", ctx.stamp("loop-fit")},
                                                    {"p", cheb_to_json(fit.p)},
                                                    {"q", cheb_to_json(fit.q)},
                                                    {"residual", fit.residual},
                                                    {"iterations", fit.iterations}});
    write_json_file(ctx.dir / "loop_verification.json",
                    Json{{"stamp", ctx.stamp("loop-verification")}, {"verification", ver}});
    write_json_file(ctx.dir / "loop_diagnostics.json", diag);
    return diag;
}

Json cmd_diagnose_basis(const RunContext& ctx) {
    const SolverConfig& solver = ctx.config.solver;
    const Subspectrum sub =
        subspectrum_from_json(read_json_file(ctx.dir / "subspectrum_edge.json").at("subspectrum"));
    const IntegratorOptions ode = to_integrator_options(solver);

    std::function<EdgeSolution(Complex, bool)> edge1_solver;
    double alpha1 = 0.0;
    if (ctx.config.edges[0]) {
        const EdgeCoefficients edge1 = *ctx.config.edges[0];
        alpha1 = edge1.alpha.real();
        edge1_solver = [edge1, ode](Complex lambda, bool with_d) {
            return integrate_edge(edge1, lambda, with_d, ode);
        };
    } else {
        const KernelPair kernels =
            kernel_pair_from_json(read_json_file(ctx.dir / "edge_kernels.json").at("kernels"));
        alpha1 = read_json_file(ctx.dir / "edge_diagnostics.json").at("alpha1_recovered").get<double>();
        const EdgeReconstruction rec = reconstruct_edge_functions(kernels, Complex(alpha1, 0.0));
        edge1_solver = [rec](Complex lambda, bool with_d) {
            EdgeSolution e;
            e.s = rec.s1(lambda);
            e.sp = rec.s1p(lambda);
            if (with_d) {
                const double h = 1e-6;
                e.ds = (rec.s1(lambda + h) - rec.s1(lambda - h)) / (2.0 * h);
                e.dsp = (rec.s1p(lambda + h) - rec.s1p(lambda - h)) / (2.0 * h);
                e.has_derivatives = true;
            }
            return e;
        };
    }

    const BasisProbe probe = build_probe(sub, alpha1, edge1_solver);
    Json summary = ctx.stamp("diagnose-basis");
    try {
        const FrameBounds bounds = frame_bounds(probe);
        summary["frame"] = Json{{"M1", bounds.m1}, {"M2", bounds.m2}, {"condition", bounds.condition}};
    } catch (const SingularGram& e) {
        summary["frame"] = Json{{"error", e.what()}};
        write_json_file(ctx.dir / "basis_summary.json", summary);
        throw;
    }

    // Reference-system identities on a small window.
    const int ref_window = std::min(8, sub.window_n);
    const Eigen::MatrixXcd g0 = gram_v0(sub.betas, alpha1, ref_window);
    const Eigen::MatrixXcd ge = gram_exponential(sub.betas, ref_window);
    summary["v0_e_gram_gap"] = (g0 - ge).cwiseAbs().maxCoeff();
    double diag_gap = 0.0;
    for (int i = 0; i < g0.rows(); ++i)
        diag_gap = std::max(diag_gap, std::abs(g0(i, i) - Complex(2.0 * kPi, 0.0)));
    summary["v0_diagonal_gap"] = diag_gap;

    const SineTypeReport sine = sine_type_check(sub.betas);
    Json strips = Json::array();
    for (const auto& s : sine.strips)
        strips.push_back(Json{{"im", s.im}, {"lower", s.lower}, {"upper", s.upper}});
    const Json sine_json{{"separation", sine.separation},
                         {"separated", sine.separated},
                         {"bounded", sine.bounded},
                         {"strips", strips}};
    summary["sine_type"] = sine_json;
    write_json_file(ctx.dir / "sine_type.json",
                    Json{{"stamp", ctx.stamp("sine-type")}, {"report", sine_json}});

    std::ostringstream gram_csv;
    gram_csv << "# looppencil " << toolkit_version() << " gram spectrum\n";
    gram_csv << "# config " << ctx.hash << "\n";
    gram_csv << "index,eigenvalue\n";
    for (std::size_t i = 0; i < probe.gram_eigenvalues.size(); ++i)
        gram_csv << i << ',' << format_sig17(probe.gram_eigenvalues[i]) << '\n';
    write_text_file(ctx.dir / "gram_spectrum.csv", gram_csv.str());

    std::ostringstream tails;
    tails << "# looppencil " << toolkit_version() << " quadratic closeness\n";
    tails << "# config " << ctx.hash << "\n";
    tails << "n,gap_sq,partial_sum\n";
    double acc = 0.0;
    for (const auto& c : probe.closeness) {
        acc += c.gap_sq;
        tails << c.n << ',' << format_sig17(c.gap_sq) << ',' << format_sig17(acc) << '\n';
    }
    write_text_file(ctx.dir / "closeness_tails.csv", tails.str());

    write_json_file(ctx.dir / "basis_summary.json", summary);
    return summary;
}

Json cmd_verify(const RunContext& ctx) {
    Json report = ctx.stamp("verify");
    report["forward"] = cmd_forward(ctx);
    report["subspectrum_edge"] = cmd_subspectrum(ctx, InverseTarget::boundary_edge);
    report["subspectrum_loop"] = cmd_subspectrum(ctx, InverseTarget::loop);
    report["invert_edge"] = cmd_invert_edge(ctx);
    report["invert_loop"] = cmd_invert_loop(ctx);
    report["diagnose_basis"] = cmd_diagnose_basis(ctx);

    // Truth kernels for reference.
    const LoopGraphPencil pencil = full_pencil(ctx.config);
    KernelExtractionOptions kopts;
    kopts.fit_polynomial_tail = ctx.config.solver.polynomial_tail;
    kopts.ode = to_integrator_options(ctx.config.solver);
    const KernelSet kernels = extract_kernels(pencil, ctx.config.solver.truncation, kopts);
    write_json_file(ctx.dir / "kernels_truth.json",
                    Json{{"stamp", ctx.stamp("kernels-truth")}, {"kernels", to_json(kernels)}});

    bool pass = true;
    const auto& edge = report["invert_edge"];
    if (edge.contains("truth")) {
        pass = pass && edge["truth"]["sup_gap_s1"].get<double>() <= 1e-4;
        pass = pass && edge["truth"]["fit_gap_p_max"].get<double>() <= 1e-3;
        pass = pass && edge["truth"]["fit_gap_q_max"].get<double>() <= 1e-3;
    }
    const auto& loop_ver = report["invert_loop"]["verification"];
    if (loop_ver["has_truth"].get<bool>()) {
        pass = pass && loop_ver["sup_gap_s"].get<double>() <= 1e-4;
        pass = pass && loop_ver["sup_gap_dm"].get<double>() <= 1e-4;
        pass = pass && loop_ver["omega_matches_truth"].get<bool>();
    }
    pass = pass && report["invert_edge"]["moment_residual"].get<double>() <= 1e-8;
    pass = pass && report["invert_loop"]["moment_residual"].get<double>() <= 1e-8;
    report["pass"] = pass;
    write_json_file(ctx.dir / "verify_report.json", report);
    return report;
}

} // namespace looppencil
