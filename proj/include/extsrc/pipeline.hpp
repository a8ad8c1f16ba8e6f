// Batch pipelines behind the CLI: each subcommand loads a JSON configuration,
// runs one slice of the identity checks, and writes CSV/JSON artifacts plus a
// machine-readable summary {check, value, tolerance, pass}. Exit status 0 iff
// every executed check passes.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extsrc/kernel.hpp"

namespace extsrc {

struct CheckResult {
    std::string name;
    double value = 0;
    double tolerance = 0;
    bool pass = false;
};

struct RunConfig {
    std::string subcommand;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    int workers = 4;
    long samples = 100000;
    std::optional<GridSpec> grid;
    std::map<std::string, double> tol;
};

// Valid subcommand names.
const std::vector<std::string>& subcommands();

// Runs the pipeline; returns the process exit status (0 = all checks pass).
// Throws config_error for unusable inputs.
int run(const RunConfig& rc);

} // namespace extsrc
