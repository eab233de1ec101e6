#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "fbp/config.hpp"
#include "fbp/error.hpp"

using namespace fbp;

namespace {

// Line number carried by the ConfigError raised for `text`, or -1 if none.
int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("empty text gives the defaults") {
    const SolverConfig c = parse_config("");
    const SolverConfig d;
    CHECK(c.grid.t0 == d.grid.t0);
    CHECK(c.grid.horizon == d.grid.horizon);
    CHECK(c.beta == d.beta);
    CHECK(c.g_preset == "ripple");
    CHECK(c.key_lines.empty());
}

TEST_CASE("key = value lines with comments") {
    const SolverConfig c = parse_config(
        "# flat front\n"
        "\n"
        "g = constant   # g = 1\n"
        "  T=0.05\n"
        "N = 12\n"
        "dims = 2\n"
        "epsilon = 0\n"
        "elliptic_path = oracle\n"
        "time_scheme = euler\n"
        "field_format = csv\n"
        "xi_list = 1, 2.5,4\n"
        "compare_oracle = no\n"
        "seed = 42\n");
    CHECK(c.g_preset == "constant");
    CHECK(c.grid.horizon == 0.05);
    CHECK(c.grid.steps == 12);
    CHECK(c.grid.n_dim == 2);
    CHECK(c.epsilon == 0);
    CHECK(c.elliptic_path == EllipticPath::Direct);
    CHECK(c.time_scheme == TimeScheme::ImplicitEuler);
    CHECK(c.field_format == FieldEncoding::Csv);
    CHECK(c.xi_list == std::vector<double>{1.0, 2.5, 4.0});
    CHECK_FALSE(c.compare_oracle);
    CHECK(c.seed == 42u);
    CHECK(c.key_lines.at("T") == 4);
    CHECK(c.key_lines.at("seed") == 13);
}

TEST_CASE("errors carry the offending line") {
    CHECK(error_line("T = 0.1\n\nbogus = 3\n") == 3);
    CHECK(error_line("T = 0.1\nT = 0.2\n") == 2);
    CHECK(error_line("N = 1.5\n") == 1);
    CHECK(error_line("\nx_points = 48\n") == 2);
    CHECK(error_line("beta 0.5\n") == 1);
    CHECK(error_line("x_points =\n") == 1);
    CHECK(error_line("# c\nbeta = 1.0\n") == 2);
    CHECK(error_line("beta = 0.9\nalpha = 0.6\n") == 1);
    CHECK(error_line("t0 = 0.1\nT = 0.1\n") == 2);
    CHECK(error_line("epsilon = 2\n") == 1);
    CHECK(error_line("elliptic_path = spectral\n") == 1);
    CHECK(error_line("\n\ng = ripple\ng_amplitude = 0.6\n") == 3);
    CHECK(error_line("g_floor = 0\n") == 1);
    CHECK(error_line("time_scheme = rk4\n") == 1);
    CHECK(error_line("xi_list = 1, x\n") == 1);
    // Defaulted keys have no line.
    CHECK(error_line("g = file\n") == 1);
    CHECK(error_line("t0 = 1.0\n") == 0);
}

TEST_CASE("g floor: g >= g0 > 0 is enforced on the grid") {
    CHECK_NOTHROW(parse_config("g = ripple\ng_amplitude = 0.5\ng_floor = 0.5\n"));
    CHECK_THROWS_AS(parse_config("g = ripple\ng_amplitude = 0.5\ng_floor = 0.51\n"), ConfigError);
    const SolverConfig c = parse_config("g = bump\ndims = 2\nx_points = 8\ng_amplitude = 0.25\n");
    const Eigen::VectorXd g = boundary_datum(c, make_grids(c.grid).x);
    CHECK(g.maxCoeff() == doctest::Approx(1.25));
    CHECK(g.minCoeff() == doctest::Approx(0.75));
}

TEST_CASE("sampled g is read relative to the config file") {
    const auto dir = std::filesystem::temp_directory_path() / "fbp_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream samples(dir / "g.txt");
        for (int i = 0; i < 8; ++i) samples << 1.0 + 0.01 * i << (i % 3 == 2 ? "\n" : ", ");
        std::ofstream cfg(dir / "run.cfg");
        cfg << "x_points = 8\ng = file\ng_file = g.txt\n";
    }
    const SolverConfig c = load_config((dir / "run.cfg").string());
    const Eigen::VectorXd g = boundary_datum(c, make_grids(c.grid).x);
    REQUIRE(g.size() == 8);
    CHECK(g[7] == doctest::Approx(1.07));
    CHECK_THROWS_AS(parse_config("x_points = 16\ng = file\ng_file = " + (dir / "g.txt").string() + "\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_config((dir / "absent.cfg").string()), ConfigError);
}

TEST_CASE("canonical text parses back to itself") {
    const SolverConfig c = parse_config("T = 0.07\nbeta = 0.3\nxi_list = 3, 6\ng = constant\ng_mean = 2\n");
    const std::string text = canonical_text(c);
    CHECK(text.find("T = 0.07\n") != std::string::npos);
    CHECK(canonical_text(parse_config(text)) == text);
}

TEST_CASE("coupling options follow the config") {
    const SolverConfig c = parse_config(
        "epsilon = 0\ntolerance = 1e-7\nmax_outer = 9\ntime_scheme = euler\ndamped_start = 0\nhj_substeps = 8\n");
    const CouplingOptions o = coupling_options(c);
    CHECK(o.epsilon == 0);
    CHECK(o.tolerance == 1e-7);
    CHECK(o.max_outer == 9);
    CHECK(o.step.scheme == TimeScheme::ImplicitEuler);
    CHECK(o.step.damped_start == 0);
    CHECK(o.characteristics.substeps == 8);
}

TEST_CASE("shipped example configs are valid") {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(FBP_EXAMPLE_CONFIGS)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path().string()));
        ++seen;
    }
    CHECK(seen >= 6);
}
