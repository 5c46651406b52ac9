#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qvi/policy.hpp"
#include "qvi/solver.hpp"

namespace qvi {

/// One run configuration, parsed from a single JSON file.
struct RunConfig {
    std::string problem_name;
    std::map<std::string, double> problem_params;

    Vec grid_lo, grid_hi;
    std::vector<int> grid_nodes;

    std::optional<double> h; // nullopt means "auto"
    double tol_fix = 1e-9;
    int max_iters = 200000;
    InitKind init = InitKind::zeros;
    double init_constant = 0.0;
    std::string init_field_csv;

    std::vector<QviForm> forms;
    std::string outputs = ".";
    int threads = 1;

    struct SimulateBlock {
        Vec x0;
        double horizon = 0.0;
        double h = 0.0;
        std::optional<QviForm> form; // defaults to the first configured form
    };
    std::optional<SimulateBlock> simulate;

    struct VerifyBlock {
        double lemma1_tol = 1e-6;
        double mu = 0.5;
    };
    VerifyBlock verify;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Exit codes: 0 success, 1 usage error, 2 validation failure, 3 divergence.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

} // namespace qvi
