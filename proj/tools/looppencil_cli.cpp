// Command-line front end: forward spectra, beta lattices, subspectra, the two
// partial inverse problems, basis diagnostics, and the full round-trip verify.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "looppencil/io.hpp"

namespace {

using namespace looppencil;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "runs";
    long seed = -1;
    int window = -1;
    int truncation = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "pencil configuration JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (runs are keyed by config hash)");
    cmd->add_option("--seed", args.seed, "seed for randomized diagnostics");
    cmd->add_option("--window", args.window, "lattice window |n| <= N");
    cmd->add_option("--truncation", args.truncation, "exponential truncation L");
}

RunContext make_context(const CommonArgs& args) {
    RunConfig config = load_config(args.config_path);
    if (args.seed >= 0) config.solver.seed = args.seed;
    if (args.window >= 0) config.solver.window_n = args.window;
    if (args.truncation >= 0) config.solver.truncation = args.truncation;
    return make_run_context(config, args.out_dir);
}

void print_summary(const Json& summary) { std::cout << summary.dump(2) << std::endl; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadratic pencil toolkit for the star graph with a loop"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string subspectrum_target = "edge";

    auto* forward = app.add_subcommand("forward", "locate and number the spectrum");
    add_common(forward, args);
    auto* betas = app.add_subcommand("betas", "solve the lattice offsets beta_k");
    add_common(betas, args);
    auto* subspectrum =
        app.add_subcommand("subspectrum", "select and classify the four-branch subspectrum");
    add_common(subspectrum, args);
    subspectrum->add_option("--target", subspectrum_target, "edge | loop | both")
        ->check(CLI::IsMember({"edge", "loop", "both"}));
    auto* invert_edge =
        app.add_subcommand("invert-edge", "recover the boundary-edge coefficients");
    add_common(invert_edge, args);
    auto* invert_loop = app.add_subcommand("invert-loop", "recover the loop coefficients");
    add_common(invert_loop, args);
    auto* diagnose = app.add_subcommand("diagnose-basis", "Riesz-basis diagnostics");
    add_common(diagnose, args);
    auto* verify = app.add_subcommand("verify", "full forward + inverse round trip");
    add_common(verify, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunContext ctx = make_context(args);
        if (forward->parsed()) {
            print_summary(cmd_forward(ctx));
        } else if (betas->parsed()) {
            print_summary(cmd_betas(ctx));
        } else if (subspectrum->parsed()) {
            if (subspectrum_target == "edge" || subspectrum_target == "both")
                print_summary(cmd_subspectrum(ctx, InverseTarget::boundary_edge));
            if (subspectrum_target == "loop" || subspectrum_target == "both")
                print_summary(cmd_subspectrum(ctx, InverseTarget::loop));
        } else if (invert_edge->parsed()) {
            print_summary(cmd_invert_edge(ctx));
        } else if (invert_loop->parsed()) {
            print_summary(cmd_invert_loop(ctx));
        } else if (diagnose->parsed()) {
            print_summary(cmd_diagnose_basis(ctx));
        } else if (verify->parsed()) {
            const Json report = cmd_verify(ctx);
            print_summary(report);
            if (!report.value("pass", false)) return 4;
        }
    } catch (const Error& e) {
        Json err{{"error", e.what()}, {"exit_code", static_cast<int>(e.kind())}};
        std::cerr << err.dump(2) << std::endl;
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        Json err{{"error", e.what()}, {"exit_code", 4}};
        std::cerr << err.dump(2) << std::endl;
        return 4;
    }
    return 0;
}
