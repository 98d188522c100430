#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wgreen/errors.hpp"
#include "wgreen/run.hpp"
#include "wgreen/simd/kernels.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string outdir = "out";
    double tol = -1.0;
    int threads = -1;
};

int execute(wgreen::run::RunKind kind, const CommonOpts& opts) {
    using namespace wgreen;
    run::Scenario sc = run::Scenario::load(opts.config);
    sc.kind = kind;
    if (opts.tol > 0.0) sc.tol = opts.tol;
    if (opts.threads >= 0) sc.threads = static_cast<unsigned>(opts.threads);
    const run::RunOutput out = run::run(sc, opts.outdir);
    std::cout << out.summary << "\n";
    for (const std::string& f : out.files) std::cout << "wrote " << f << "\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config, "scenario file")->required();
    cmd->add_option("--out", opts.outdir, "output directory");
    cmd->add_option("--tol", opts.tol, "override quadrature tolerance");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

} // namespace

int main(int argc, char** argv) {
    using wgreen::run::RunKind;

    CLI::App app{"Green's-function field solver for open slab waveguides"};
    app.set_version_flag("--version", std::string("wgreen 1.0 (simd: ") +
                                          std::string(wgreen::simd::isa_name(
                                              wgreen::simd::active_isa())) +
                                          ")");
    app.require_subcommand(1);

    CommonOpts opts;
    std::pair<const char*, RunKind> kinds[] = {
        {"modes", RunKind::modes},         {"green", RunKind::green_probe},
        {"field", RunKind::field},         {"perturb", RunKind::perturb},
        {"picard", RunKind::picard},       {"estimates", RunKind::estimates},
    };
    const char* descriptions[] = {
        "guided-mode table of the profile",
        "probe the Green's function from a point source",
        "synthesize the field of a compact source",
        "zeroth/first-order fields of the perturbed guide",
        "fixed-point solve of the perturbed problem",
        "constants of the existence estimate",
    };
    RunKind selected = RunKind::modes;
    for (std::size_t i = 0; i < 6; ++i) {
        CLI::App* cmd = app.add_subcommand(kinds[i].first, descriptions[i]);
        add_common(cmd, opts);
        const RunKind kind = kinds[i].second;
        cmd->callback([&selected, kind]() { selected = kind; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return execute(selected, opts);
    } catch (const wgreen::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const wgreen::DomainError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const wgreen::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const wgreen::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << " (achieved " << e.achieved << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
