#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "looppencil/basis.hpp"
#include "looppencil/inverse.hpp"

namespace looppencil {

using Json = nlohmann::json;

const char* toolkit_version();

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct SolverConfig {
    double ode_rtol = 1e-11;
    double ode_atol = 1e-13;
    int window_n = 24;        // lattice windows |n| <= window_n
    int truncation = 32;      // exponential-series truncation L
    double im_height = 2.0;   // contour half-height
    double cell_resolution = 1e-6;
    double regularization = 0.0;
    double zero_threshold = 1e-8;
    double mod1_tolerance = 1e-8;
    int fit_degree = 8;
    int fit_grid = 48;
    long seed = 1234;
    bool polynomial_tail = true;
    std::optional<double> window_re_lo; // explicit spectral window (forward only)
    std::optional<double> window_re_hi;
};

/// Parsed pencil configuration; an absent edge marks the unknown of a partial
/// inverse problem.
struct RunConfig {
    std::vector<std::optional<EdgeCoefficients>> edges;
    SolverConfig solver;

    int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Strict parser: unknown keys are rejected with their names.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);
Json config_to_json(const RunConfig& config);
/// FNV-1a hash of the canonical serialization, 16 hex digits.
std::string config_hash(const RunConfig& config);

LoopGraphPencil full_pencil(const RunConfig& config);
/// Pencil with a zero placeholder in the missing slot (never evaluated by the
/// inverse assemblies).
LoopGraphPencil pencil_with_placeholder(const RunConfig& config, int slot);

IntegratorOptions to_integrator_options(const SolverConfig& solver);
SpectralOptions to_spectral_options(const SolverConfig& solver);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const Spectrum& spectrum);
Spectrum spectrum_from_json(const Json& j);
Json to_json(const BetaSet& betas);
BetaSet betas_from_json(const Json& j);
Json to_json(const Subspectrum& sub);
Subspectrum subspectrum_from_json(const Json& j);
Json to_json(const SignSequence& seq);
SignSequence sign_sequence_from_json(const Json& j);
Json to_json(const ExpSeries& series);
ExpSeries exp_series_from_json(const Json& j);
Json to_json(const KernelPair& pair);
KernelPair kernel_pair_from_json(const Json& j);
Json to_json(const KernelSet& set);
Json to_json(const AssumptionReport& report);

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

/// Run directory keyed by the config hash; all artifacts embed the hash and
/// the toolkit version.
struct RunContext {
    RunConfig config;
    std::filesystem::path dir;
    std::string hash;

    Json stamp(const char* kind) const;
};

RunContext make_run_context(const RunConfig& config, const std::filesystem::path& out_dir);

void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path); // MissingArtifact when absent
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string format_sig17(double value);

void write_spectrum_csv(const std::filesystem::path& path, const RunContext& ctx,
                        const Spectrum& spectrum);
void write_spectrum_svg(const std::filesystem::path& path, const Spectrum& spectrum,
                        const BetaSet* betas);

// ---------------------------------------------------------------------------
// Pipeline commands (shared by the CLI and the test suites); each writes its
// artifacts under the run directory and returns the machine-readable summary.
// ---------------------------------------------------------------------------

Json cmd_forward(const RunContext& ctx);
Json cmd_betas(const RunContext& ctx);
Json cmd_subspectrum(const RunContext& ctx, InverseTarget target);
Json cmd_invert_edge(const RunContext& ctx);
Json cmd_invert_loop(const RunContext& ctx);
Json cmd_diagnose_basis(const RunContext& ctx);
Json cmd_verify(const RunContext& ctx);

} // namespace looppencil
