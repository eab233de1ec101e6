#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "fbp/config.hpp"
#include "fbp/coupling.hpp"
#include "fbp/elliptic.hpp"
#include "fbp/error.hpp"
#include "fbp/field_io.hpp"
#include "fbp/hamilton_jacobi.hpp"
#include "fbp/holder.hpp"
#include "fbp/parabolic.hpp"
#include "fbp/symbols.hpp"
#include "fbp/verify.hpp"
#include "manifest.hpp"

namespace fbp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double sup(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

json settings_json(const SolverConfig& config) {
    json out = json::object();
    std::stringstream in(canonical_text(config));
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

json tolerances_json(const SolverConfig& c) {
    return {{"tolerance", c.tolerance},
            {"inner_factor", c.inner_factor},
            {"elliptic_tolerance", c.elliptic_tolerance},
            {"jacobian_bound", c.jacobian_bound},
            {"radius_u", c.radius_u},
            {"radius_s", c.radius_s}};
}

// Coordinate columns of tidy tables: t, then x or x1, x2, then extras.
std::vector<std::string> coordinate_names(const XGrid& x, std::vector<std::string> extra = {}) {
    std::vector<std::string> names{"t"};
    if (x.n_dim() == 1)
        names.push_back("x");
    else
        names.insert(names.end(), {"x1", "x2"});
    names.insert(names.end(), extra.begin(), extra.end());
    return names;
}

std::vector<double> coordinates(const XGrid& x, double t, int i) {
    const Point p = x.point(i);
    std::vector<double> out{t, p[0]};
    if (x.n_dim() == 2) out.push_back(p[1]);
    return out;
}

Eigen::VectorXd coefficient(const SolverConfig& c, const XGrid& x) {
    const double k = 2.0 * M_PI / x.period();
    return x.sample([&](const Point& p) { return 1.0 + c.c_amplitude * std::sin(k * p[0]); });
}

int config_line(const SolverConfig& c, const std::string& key) {
    const auto it = c.key_lines.find(key);
    return it == c.key_lines.end() ? 0 : it->second;
}

using Runner = std::function<int(const SolverConfig&, RunRecorder&, json&)>;

// ---------------------------------------------------------------------------
// solve

json decomposition_json(const CoupledState& st) {
    const double t0 = st.grids.time.t0(), horizon = st.grids.time.horizon();
    DecompositionReport r;
    double first = 4.0 * t0;
    try {
        r = decomposition_report(st, first, horizon);
    } catch (const DomainError&) {
        first = t0;
        r = decomposition_report(st, first, horizon);
    }
    return {{"schema", "fbp-decomposition"},
            {"schema_version", 1},
            {"window", {first, horizon}},
            {"times", r.times},
            {"dirichlet_norm", r.dirichlet_norm},
            {"dirichlet_defect", r.dirichlet_defect},
            {"neumann_norm", r.neumann_norm},
            {"remainder_norm", r.remainder_norm},
            {"slopes",
             {{"dirichlet", r.dirichlet_slope},
              {"dirichlet_defect", r.dirichlet_defect_slope},
              {"neumann", r.neumann_slope},
              {"remainder", r.remainder_slope}}}};
}

int run_solve(const SolverConfig& cfg, RunRecorder& rec, json& body) {
    const Grids grids = make_grids(cfg.grid);
    const Eigen::VectorXd g = boundary_datum(cfg, grids.x);
    const CouplingOptions options = coupling_options(cfg);
    const CoupledState st = solve_fbp(g, grids, options, [&](const IterationRecord& r) {
        rec.log({{"stage", r.stage},
                  {"outer", r.outer},
                  {"inner", r.inner},
                  {"horizon", r.horizon},
                  {"difference", r.difference},
                  {"ratio", r.ratio}});
    });

    const Grids& out_grids = st.grids;
    const FieldEncoding enc = cfg.field_format;
    const std::string ext = extension(enc);
    write_field(rec.output("u" + ext).string(), st.u, out_grids, enc);
    write_field(rec.output("s" + ext).string(), st.s, out_grids, enc);
    write_field(rec.output("u_dirichlet" + ext).string(), st.dirichlet, out_grids, enc);
    write_field(rec.output("u_neumann" + ext).string(), st.neumann, out_grids, enc);
    write_field(rec.output("u_remainder" + ext).string(), st.v, out_grids, enc);

    const json decomposition = decomposition_json(st);
    {
        std::ofstream out(rec.output("decomposition.json"));
        out << decomposition.dump(2) << '\n';
    }

    TidyTable plot(coordinate_names(out_grids.x));
    const int top = out_grids.y.nodes() - 1;
    for (int k = 0; k < st.s.levels(); ++k) {
        const double t = st.s.times[k];
        for (int i = 0; i < out_grids.x.size(); ++i) {
            const std::vector<double> at = coordinates(out_grids.x, t, i);
            plot.add(at, "s", st.s.values[k][i]);
            plot.add(at, "s_dot", st.s.dot_values[k][i]);
            plot.add(at, "s_over_t", st.s.values[k][i] / t);
            plot.add(at, "trace", st.u.slices[k](i, top));
        }
    }
    plot.write(rec.output("plot.csv").string());

    const TransformedResiduals res = residual_transformed_system(st);
    const Spectral spectral(out_grids.x);
    body["iterations"] = {{"outer", st.outer_iterations},
                          {"inner_total", st.inner_iterations},
                          {"restarts", st.restarts}};
    body["results"] = {
        {"converged", st.converged},
        {"horizon", out_grids.time.horizon()},
        {"requested_horizon", cfg.grid.horizon},
        {"outer_contraction", st.outer_contraction},
        {"inner_contraction", st.inner_contraction},
        {"outer_differences", st.outer_differences},
        {"outer_ratios", st.outer_ratios},
        {"rate_at_t0_minus_g", sup(st.s.dot_values.front() - g)},
        {"residuals",
         {{"interior", res.interior_sup},
          {"dirichlet", res.dirichlet_sup},
          {"stefan", res.stefan_sup},
          {"front", res.front_sup}}},
        {"strip_norm_u", strip_norm(st.u, out_grids.x, out_grids.y, cfg.beta)},
        {"front_norm_s", front_norm(st.s, spectral, cfg.beta)},
        {"decomposition_slopes", decomposition["slopes"]}};
    std::cout << "solve: " << (st.converged ? "converged" : "did not converge") << " after "
              << st.outer_iterations << " outer iterations, outer contraction " << st.outer_contraction
              << ", inner contraction " << st.inner_contraction << ", horizon " << out_grids.time.horizon() << "\n";
    return st.converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------------------
// solve-elliptic

int run_elliptic(const SolverConfig& cfg, RunRecorder& rec, json& body) {
    const Grids grids = make_grids(cfg.grid);
    const XGrid& x = grids.x;
    const YGrid& y = grids.y;
    const double t = cfg.elliptic_t;
    const double k = 2.0 * M_PI / x.period();
    if (cfg.elliptic_path == EllipticPath::Constant && cfg.c_amplitude != 0.0)
        throw ConfigError("elliptic_path: the constant path needs c_amplitude = 0", config_line(cfg, "elliptic_path"));
    EllipticProblem p = EllipticProblem::zeros(t, x, y);
    p.c = coefficient(cfg, x);
    p.g = boundary_datum(cfg, x);
    p.h = x.sample([&](const Point& q) { return cfg.h_amplitude * std::cos(k * q[0]); });

    EllipticOptions options;
    options.tolerance = cfg.elliptic_tolerance;
    options.max_sweeps = cfg.elliptic_max_sweeps;
    options.max_oscillation = cfg.max_oscillation;
    const EllipticSolver solver(x, y, p.c, cfg.elliptic_path, options);
    EllipticReport report;
    const Slice u = solver.solve(t, p.f, p.g, p.h, &report);
    for (std::size_t i = 0; i < report.residual_history.size(); ++i)
        rec.log({{"stage", "sweep"}, {"sweep", i + 1}, {"residual", report.residual_history[i]}});
    const EllipticResidual r = elliptic_residual(p, u, x, y);
    rec.log({{"stage", "final"}, {"path", to_string(cfg.elliptic_path)}, {"residual", r.total()}});

    json results = {{"path", to_string(cfg.elliptic_path)},
                    {"t", t},
                    {"patches", report.patches},
                    {"contraction", report.contraction},
                    {"residual",
                     {{"interior", r.interior}, {"bottom", r.bottom}, {"top", r.top}, {"total", r.total()}}},
                    {"sup_u", sup(u)}};
    if (cfg.compare_oracle && cfg.grid.x_points <= 128 && cfg.grid.y_interior <= 64) {
        const Slice oracle = dense_oracle_elliptic(p, x, y);
        results["oracle_relative_error"] = sup(u - oracle) / std::max(sup(oracle), 1e-300);
    }

    StripField field;
    field.times = {t};
    field.slices = {u};
    write_field(rec.output("u" + extension(cfg.field_format)).string(), field, grids, cfg.field_format);
    TidyTable plot(coordinate_names(x, {"y"}));
    for (int j = 0; j < y.nodes(); ++j)
        for (int i = 0; i < x.size(); ++i) {
            std::vector<double> at = coordinates(x, t, i);
            at.push_back(y.node(j));
            plot.add(at, "u", u(i, j));
        }
    plot.write(rec.output("plot.csv").string());

    body["iterations"] = {{"sweeps", report.sweeps}};
    body["results"] = results;
    std::cout << "solve-elliptic: " << to_string(cfg.elliptic_path) << " path, " << report.sweeps
              << " sweeps, residual " << r.total() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// hj-solve

int run_hj(const SolverConfig& cfg, RunRecorder& rec, json& body) {
    const Grids grids = make_grids(cfg.grid);
    const Eigen::VectorXd speed = boundary_datum(cfg, grids.x);
    const VelocityField v = sampled_velocity(grids.x, {grids.time.t0()}, {speed});
    const CharacteristicOptions options = coupling_options(cfg).characteristics;
    const FrontSolution front = hj_solve(v, grids.x, grids.time.levels(), options);

    const SurfaceField& s = front.surface;
    double linear_gap = 0.0;
    for (int k = 0; k < s.levels(); ++k) {
        linear_gap = std::max(linear_gap, sup(s.values[k] - s.times[k] * speed));
        rec.log({{"stage", "level"},
                 {"level", k},
                 {"t", s.times[k]},
                 {"jacobian_defect", front.flow.jacobian_defect[k]},
                 {"s_min", s.values[k].minCoeff()},
                 {"s_max", s.values[k].maxCoeff()}});
    }
    write_field(rec.output("s" + extension(cfg.field_format)).string(), s, grids, cfg.field_format);
    TidyTable plot(coordinate_names(grids.x));
    for (int k = 0; k < s.levels(); ++k)
        for (int i = 0; i < grids.x.size(); ++i) {
            const std::vector<double> at = coordinates(grids.x, s.times[k], i);
            plot.add(at, "s", s.values[k][i]);
            plot.add(at, "s_dot", s.dot_values[k][i]);
            plot.add(at, "grad_s_1", front.gradient[k](i, 0));
            if (grids.x.n_dim() == 2) plot.add(at, "grad_s_2", front.gradient[k](i, 1));
        }
    plot.write(rec.output("plot.csv").string());

    body["iterations"] = {{"levels", s.levels()}, {"rk4_substeps", options.substeps}};
    body["results"] = {{"max_jacobian_defect", front.max_jacobian_defect},
                       {"max_momentum", front.max_momentum},
                       {"sup_s_minus_t_v", linear_gap}};
    std::cout << "hj-solve: " << s.levels() << " levels, max Jacobian defect " << front.max_jacobian_defect << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// verify-symbols

int run_symbols(const SolverConfig& cfg, RunRecorder& rec, json& body) {
    const YGrid y(cfg.grid.y_interior);
    const double h = y.spacing();
    TidyTable table({"xi"});
    double worst_ratio = 0.0;
    bool attained_at_origin = true;
    for (double xi : cfg.xi_list) {
        double e_a = 0.0, e_b = 0.0, a_max = 0.0;
        for (int j = 0; j < y.nodes(); ++j) a_max = std::max(a_max, std::abs(symbol_a(xi, y.node(j))));
        for (int j = 1; j + 1 < y.nodes(); ++j) {
            const double yj = y.node(j);
            const double db = (symbol_b(xi, yj + h) - symbol_b(xi, yj - h)) / (2.0 * h);
            const double d2a = (symbol_a(xi, yj + h) - 2.0 * symbol_a(xi, yj) + symbol_a(xi, yj - h)) / (h * h);
            e_b = std::max(e_b, std::abs(db - symbol_a(xi, 1.0 - yj)));
            e_a = std::max(e_a, std::abs(d2a - xi * xi * symbol_a(xi, yj)));
        }
        const double bound = h * h * (xi * xi / 6.0 + std::pow(xi, 4) / 12.0) + 8e-16 / (h * h);
        worst_ratio = std::max(worst_ratio, std::max(e_a, e_b) / bound);
        attained_at_origin = attained_at_origin && symbol_a(xi, 0.0) == 1.0 && a_max == 1.0;
        table.add({xi}, "defect_b_identity", e_b);
        table.add({xi}, "defect_a_identity", e_a);
        rec.log({{"stage", "identity"}, {"xi", xi}, {"defect_b", e_b}, {"defect_a", e_a}, {"bound", bound}});
    }

    std::vector<double> c_norms, a_norms;
    for (const auto& e : symbol_class_estimate(Symbol::C, 0, cfg.xi_list, 2, y)) c_norms.push_back(e.norm);
    for (const auto& e : symbol_class_estimate(Symbol::A, 1, cfg.xi_list, 0, y, 20001)) a_norms.push_back(e.norm);
    for (std::size_t i = 0; i < cfg.xi_list.size(); ++i) {
        table.add({cfg.xi_list[i]}, "resolvent_norm", c_norms[i]);
        table.add({cfg.xi_list[i]}, "a_xi_derivative_norm", a_norms[i]);
        rec.log({{"stage", "decay"}, {"xi", cfg.xi_list[i]}, {"resolvent_norm", c_norms[i]},
                 {"a_xi_derivative_norm", a_norms[i]}});
    }
    double worst_peak = 1.0;
    json peaks = json::array();
    if (!cfg.peak_xi.empty())
        for (const auto& e : symbol_class_estimate(Symbol::A, 1, cfg.peak_xi, 0, y, 20001)) {
            const double r = e.peak_location * e.xi;
            worst_peak = std::max(worst_peak, std::max(r, 1.0 / r));
            table.add({e.xi}, "peak_location_times_xi", r);
            peaks.push_back({{"xi", e.xi}, {"peak_location", e.peak_location}});
            rec.log({{"stage", "peak"}, {"xi", e.xi}, {"peak_location", e.peak_location}});
        }
    table.write(rec.output("symbols.csv").string());

    body["iterations"] = {{"xi_samples", cfg.xi_list.size()}};
    body["results"] = {{"identity_defect_over_bound", worst_ratio},
                       {"sup_a_attained_at_origin", attained_at_origin},
                       {"resolvent_slope", loglog_slope(cfg.xi_list, c_norms)},
                       {"a_xi_derivative_slope", loglog_slope(cfg.xi_list, a_norms)},
                       {"peaks", peaks},
                       {"worst_peak_factor", worst_peak}};
    std::cout << "verify-symbols: resolvent slope " << body["results"]["resolvent_slope"].get<double>()
              << ", d_xi a slope " << body["results"]["a_xi_derivative_slope"].get<double>() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// verify-operators

int run_operators(const SolverConfig& cfg, RunRecorder& rec, json& body) {
    const Grids grids = make_grids(cfg.grid);
    const XGrid& x = grids.x;
    const YGrid& y = grids.y;
    const Eigen::VectorXd c = coefficient(cfg, x);
    const Eigen::VectorXd g = boundary_datum(cfg, x);
    const double k = 2.0 * M_PI / x.period();
    const Eigen::VectorXd bend = x.sample([k](const Point& p) { return std::cos(2.0 * k * p[0]); });
    auto datum = [&](double t) { return Eigen::VectorXd(g + t * bend); };

    std::vector<double> times = cfg.operator_times;
    std::sort(times.begin(), times.end());
    TidyTable table({"t"});

    double worst_rate = 0.0;
    for (bool modified : {false, true}) {
        const GeneratorFamily family(x, y, c, modified);
        for (double t : times) {
            const double dt = 1e-4 * t;
            const Slice fd_d = (family.dirichlet(t + dt, datum(t + dt)) - family.dirichlet(t - dt, datum(t - dt))) / (2 * dt);
            const Slice fd_n = (family.neumann(t + dt, datum(t + dt)) - family.neumann(t - dt, datum(t - dt))) / (2 * dt);
            const double md = sup(family.dirichlet_rate(t, datum(t), bend) - fd_d) / std::max(sup(fd_d), 1e-300);
            const double mn = sup(family.neumann_rate(t, datum(t), bend) - fd_n) / std::max(sup(fd_n), 1e-300);
            worst_rate = std::max({worst_rate, md, mn});
            const std::string tag = modified ? "_modified" : "";
            table.add({t}, "rate_mismatch_dirichlet" + tag, md);
            table.add({t}, "rate_mismatch_neumann" + tag, mn);
            rec.log({{"stage", "rate"}, {"modified", modified}, {"t", t}, {"dirichlet", md}, {"neumann", mn}});
        }
    }

    const GeneratorFamily family(x, y, c, false);
    const MaxRegReport maxreg = verify_maxreg_hypotheses(family, times, cfg.triples, cfg.seed);
    for (std::size_t i = 0; i < times.size(); ++i) {
        table.add({times[i]}, "inverse_norm", maxreg.inverse_norm[i]);
        rec.log({{"stage", "inverse"}, {"t", times[i]}, {"inverse_norm", maxreg.inverse_norm[i]}});
    }

    const Spectral spectral(x);
    const PartitionOfUnity pou = PartitionOfUnity::for_coefficient(x, c, cfg.max_oscillation);
    std::vector<double> factors;
    for (double t : times) {
        factors.push_back(commutator_factor(t, c, pou, spectral, y, 30, cfg.seed));
        table.add({t}, "commutator_factor", factors.back());
        rec.log({{"stage", "commutator"}, {"t", t}, {"factor", factors.back()}});
    }

    // Product inequalities on random smooth scalar trials, 4x refined grid.
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    struct Trial {
        double a0, a1, a2, w, p;
        double operator()(double t) const { return a0 + a1 * std::sin(w * t) + a2 * std::pow(t, p); }
    };
    std::vector<Trial> fs, gs;
    for (int i = 0; i < cfg.product_trials; ++i) {
        fs.push_back({unit(rng), unit(rng), unit(rng), 1.0 + 4.0 * std::abs(unit(rng)), 0.5 + std::abs(unit(rng))});
        gs.push_back({unit(rng), unit(rng), unit(rng), 1.0 + 4.0 * std::abs(unit(rng)), 0.5 + std::abs(unit(rng))});
    }
    auto sample = [](const std::vector<Trial>& trials, const std::vector<double>& ts) {
        std::vector<TimeSamples> out;
        for (const Trial& tr : trials) {
            TimeSamples s;
            for (double t : ts) s.push_back(Eigen::VectorXd::Constant(1, tr(t)));
            out.push_back(std::move(s));
        }
        return out;
    };
    json products = json::array();
    for (int refine : {1, 4}) {
        const auto ts = TimeGrid(cfg.grid.t0, cfg.grid.horizon, refine * cfg.grid.steps, cfg.grid.grading).levels();
        const ProductRatios pr = product_inequality_check(ts, sample(fs, ts), sample(gs, ts), cfg.alpha, cfg.beta);
        products.push_back({{"levels", ts.size()}, {"max_ratio", pr.max_ratio}, {"counted", pr.counted}});
        rec.log({{"stage", "products"}, {"levels", ts.size()}, {"max_ratio", pr.max_ratio}});
    }
    table.write(rec.output("operators.csv").string());

    body["iterations"] = {{"triples", maxreg.triples}, {"product_trials", cfg.product_trials}};
    body["results"] = {{"rate_formula_max_relative_mismatch", worst_rate},
                       {"inverse_slope", maxreg.inverse_slope},
                       {"inverse_constant", maxreg.inverse_constant},
                       {"difference_ratio_max", maxreg.difference_ratio_max},
                       {"commutator_factors", factors},
                       {"partition_patches", pou.patches()},
                       {"product_ratios", products}};
    std::cout << "verify-operators: inverse slope " << maxreg.inverse_slope << ", rate mismatch " << worst_rate
              << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

int run_configured(const std::string& name, const std::string& config_path, const std::string& output_override,
                   const std::vector<std::string>& args, const Runner& runner) {
    if (!fs::is_regular_file(config_path)) {
        std::cerr << "error: config file not found: " << config_path << "\n";
        return kMissingConfig;
    }
    SolverConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kBadConfig;
    }
    const fs::path out_dir = output_override.empty() ? fs::path(cfg.output_dir) : fs::path(output_override);
    RunRecorder rec(out_dir, name);

    json body;
    body["command_line"] = args;
    body["config"] = {{"path", config_path},
                      {"sha256", sha256_file(config_path)},
                      {"effective_sha256", sha256_hex(canonical_text(cfg))},
                      {"settings", settings_json(cfg)}};
    body["seed"] = cfg.seed;
#ifdef _OPENMP
    body["threads"] = omp_get_max_threads();
#else
    body["threads"] = 1;
#endif
    body["tolerances"] = tolerances_json(cfg);

    int code = kOk;
    try {
        code = runner(cfg, rec, body);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kBadConfig;
    } catch (const FlowGuardError& e) {
        body["error"] = {{"kind", "flow_guard"}, {"message", e.what()}, {"admissible_time", e.admissible_time()}};
        std::cerr << "error: " << e.what() << "\n";
        code = kNotConverged;
    } catch (const ConvergenceError& e) {
        body["error"] = {{"kind", "convergence"}, {"message", e.what()}};
        std::cerr << "error: " << e.what() << "\n";
        code = kNotConverged;
    }
    body["exit_code"] = code;
    const fs::path manifest = rec.write_manifest(body);
    std::cout << "manifest: " << manifest.string() << "\n";
    return code;
}

int run_norms(const std::string& field_path, const std::string& component, double beta, double gamma,
              bool lipschitz, const std::string& out_path) {
    const LoadedField loaded = read_field(field_path);
    std::vector<double> times;
    TimeSamples samples;
    std::string used = component;
    if (loaded.header.kind == FieldKind::Strip) {
        used = "u";
        times = loaded.strip.times;
        for (const Slice& s : loaded.strip.slices) samples.emplace_back(Eigen::Map<const Eigen::VectorXd>(s.data(), s.size()));
    } else {
        if (component != "s" && component != "s_dot")
            throw DomainError("norms: component must be s or s_dot for a surface field");
        times = loaded.surface.times;
        samples = component == "s" ? loaded.surface.values : loaded.surface.dot_values;
    }
    HolderParams params;
    params.beta = beta;
    params.gamma = gamma;
    params.lipschitz = lipschitz;
    const HolderNormReport r = singular_holder_norm(times, samples, params);
    const json out = {{"schema", "fbp-holder-norm"},
                      {"schema_version", 1},
                      {"field", field_path},
                      {"kind", loaded.header.kind == FieldKind::Strip ? "strip" : "surface"},
                      {"component", used},
                      {"levels", times.size()},
                      {"beta", r.beta},
                      {"gamma", r.gamma},
                      {"lipschitz", lipschitz},
                      {"sup_norm", r.sup_norm},
                      {"seminorm", r.seminorm},
                      {"weighted_seminorm", r.weighted_seminorm},
                      {"total", r.total},
                      {"unbounded", r.unbounded}};
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream file(out_path);
        file << out.dump(2) << '\n';
        if (!file) throw DomainError("cannot write " + out_path);
    }
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Solver and verification suite for a one-phase free boundary problem"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0 keeps the runtime default)")
        ->check(CLI::NonNegativeNumber);

    struct Configured {
        std::string name, description;
        Runner runner;
        std::string config, output;
        CLI::App* sub = nullptr;
    };
    std::vector<Configured> configured{
        {"solve", "Coupled free boundary solve", run_solve, {}, {}},
        {"solve-elliptic", "One elliptic model problem", run_elliptic, {}, {}},
        {"hj-solve", "Front propagation with speed g", run_hj, {}, {}},
        {"verify-symbols", "Symbol identities and decay rates", run_symbols, {}, {}},
        {"verify-operators", "Boundary operator rates, inverse bounds, products", run_operators, {}, {}},
    };
    for (Configured& c : configured) {
        c.sub = app.add_subcommand(c.name, c.description);
        c.sub->add_option("--config", c.config, "Configuration file (key = value)")->required();
        c.sub->add_option("--output-dir", c.output, "Overrides output_dir from the config");
    }

    std::string field, component = "s", norms_out;
    double beta = 0.5, gamma = 0.0;
    bool lipschitz = false;
    CLI::App* norms = app.add_subcommand("norms", "Holder norms of a stored field");
    norms->add_option("--field", field, "Field file (binary or CSV)")->required();
    norms->add_option("--beta", beta, "Holder exponent in (0, 1)")->check(CLI::Range(0.0, 1.0));
    norms->add_option("--gamma", gamma, "Weight exponent (0: plain space)");
    norms->add_option("--component", component, "s or s_dot for surface fields");
    norms->add_flag("--lipschitz", lipschitz, "Use exponent 1");
    norms->add_option("--out", norms_out, "Write the report here instead of stdout");

    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    Eigen::setNbThreads(threads > 0 ? threads : 0);

    try {
        if (norms->parsed()) return run_norms(field, component, beta, gamma, lipschitz, norms_out);
        for (const Configured& c : configured)
            if (c.sub->parsed()) return run_configured(c.name, c.config, c.output, args, c.runner);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

}  // namespace fbp::cli
