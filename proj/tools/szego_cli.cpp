#include "szego/cli.hpp"

#include <CLI11.hpp>

extern char** environ;

int main(int argc, char** argv) {
    CLI::App app{"Fejer integral limits, polytope exponents, spectral CLTs and FRBM estimation"};
    app.require_subcommand(1);
    szego::cli::GlobalOptions g;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (required by clt and by simulating fits)");
    auto* thr_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    app.add_option("--config", g.config_path, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir, "output directory (default runs/<command>)");
    app.add_option("--set", g.overrides, "override a config key, key=value (repeatable)");
    app.fallthrough();

    std::string command;
    for (const char* name : {"szego", "polytope", "clt", "fit", "diagrams", "kernels"}) {
        app.add_subcommand(name, std::string("run the ") + name + " command")->callback([&command, name] { command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : szego::cli::kInput;
    }
    if (seed_opt->count()) g.seed = seed;
    if (thr_opt->count()) g.threads = threads;
    return szego::cli::run(command, g, environ);
}
