#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "extsrc/pipeline.hpp"

namespace {

extsrc::GridSpec parse_grid(const std::string& text) {
    extsrc::GridSpec g;
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw CLI::ValidationError("--grid expects XMIN:XMAX:STEPS");
    try {
        g.xmin = std::stod(text.substr(0, c1));
        g.xmax = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        g.steps = std::stoi(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError("--grid expects XMIN:XMAX:STEPS");
    }
    if (g.steps < 1 || !(g.xmax > g.xmin))
        throw CLI::ValidationError("--grid: need xmax > xmin and steps >= 1");
    return g;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple orthogonal polynomials, correlation kernels, and "
                 "Riemann-Hilbert matrices for Hermitian ensembles with an "
                 "external source"};
    app.require_subcommand(1);

    extsrc::RunConfig rc;
    std::string grid_text;
    std::vector<std::string> tol_args;

    for (const std::string& name : extsrc::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", rc.config_path, "JSON configuration file")
            ->required();
        sub->add_option("--out", rc.out_dir, "output directory");
        sub->add_option("--seed", rc.seed, "RNG seed (Monte Carlo)");
        sub->add_option("--workers", rc.workers, "parallel workers");
        sub->add_option("--grid", grid_text, "grid as XMIN:XMAX:STEPS");
        sub->add_option("--samples", rc.samples, "Monte Carlo sample count");
        sub->add_option("--tol", tol_args,
                        "tolerance override NAME=VALUE (repeatable)");
    }

    CLI11_PARSE(app, argc, argv);

    rc.subcommand = app.get_subcommands().front()->get_name();
    try {
        if (!grid_text.empty()) rc.grid = parse_grid(grid_text);
        for (const std::string& t : tol_args) {
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw extsrc::config_error("--tol expects NAME=VALUE, got " + t);
            rc.tol[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
        }
        return extsrc::run(rc);
    } catch (const extsrc::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
