#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbp/coupling.hpp"
#include "fbp/field_io.hpp"
#include "fbp/grids.hpp"

namespace fbp {

/// Every knob of a run. Unset keys keep these defaults.
struct SolverConfig {
    GridConfig grid;
    double beta = 0.5;
    double alpha = 0.7;
    int epsilon = 1;

    // Boundary datum g: constant, ripple (mean + amplitude sin(mode x1)),
    // bump (mean + amplitude cos(mode x1) cos(mode x2)) or file.
    std::string g_preset = "ripple";
    double g_mean = 1.0;
    double g_amplitude = 0.1;
    int g_mode = 1;
    double g_floor = 0.5;
    std::string g_file;  // resolved against the config file's directory

    double tolerance = 1e-6;
    double inner_factor = 0.1;
    int max_outer = 40;
    int max_inner = 40;
    int max_restarts = 4;
    double radius_u = 1.0;
    double radius_s = 0.5;

    EllipticPath elliptic_path = EllipticPath::Variable;
    double elliptic_tolerance = 1e-8;
    int elliptic_max_sweeps = 50;
    double max_oscillation = 0.1;
    TimeScheme time_scheme = TimeScheme::Trapezoidal;
    double max_step_fraction = 0.1;
    int damped_start = 4;
    int hj_substeps = 4;
    double jacobian_bound = 0.5;

    // solve-elliptic
    double elliptic_t = 0.1;
    double c_amplitude = 0.2;
    double h_amplitude = 0.0;
    bool compare_oracle = true;

    // verify-symbols / verify-operators
    std::vector<double> xi_list{4, 8, 16, 32};
    std::vector<double> peak_xi{20, 40, 80};
    std::vector<double> operator_times{0.4, 0.2, 0.1, 0.05};
    int triples = 100;
    int product_trials = 200;

    unsigned seed = 1;
    std::string output_dir = "out";
    FieldEncoding field_format = FieldEncoding::Binary;

    /// Line on which each explicitly set key appeared.
    std::map<std::string, int> key_lines;
};

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// ignored, as is anything after a '#' in a value. Unknown or repeated keys,
/// malformed values and out-of-range settings raise ConfigError carrying the
/// offending line.
SolverConfig parse_config(const std::string& text, const std::string& base_dir = ".");
/// Reads and parses a file; ConfigError if it cannot be read.
SolverConfig load_config(const std::string& path);

/// Sorted `key = value` listing of the effective settings; unset strings are omitted.
std::string canonical_text(const SolverConfig& config);

/// Samples of g on the x grid. Throws ConfigError if g < g_floor somewhere.
Eigen::VectorXd boundary_datum(const SolverConfig& config, const XGrid& x);

CouplingOptions coupling_options(const SolverConfig& config);

}  // namespace fbp
