#include "fbp/config.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "fbp/error.hpp"

namespace fbp {

namespace {

// Raised by value parsers; rethrown as ConfigError with the line attached.
struct BadValue {
    std::string message;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) throw BadValue{"'" + v + "' is not a number"};
    return out;
}

int to_int(const std::string& v) {
    char* end = nullptr;
    const long out = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || out < -(1L << 30) || out > (1L << 30))
        throw BadValue{"'" + v + "' is not an integer"};
    return static_cast<int>(out);
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw BadValue{"'" + v + "' is not a boolean (true/false)"};
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(to_double(trim(item)));
    if (out.empty()) throw BadValue{"empty list"};
    return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fmt(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

template <class Enum, class Parse>
Enum to_enum(const std::string& v, Parse parse) {
    try {
        return parse(v);
    } catch (const DomainError& e) {
        throw BadValue{e.what()};
    }
}

struct Key {
    std::function<void(SolverConfig&, const std::string&)> set;
    std::function<std::string(const SolverConfig&)> get;
};

#define FBP_REAL(name, member)                                                                         \
    {                                                                                                  \
        name, {[](SolverConfig& c, const std::string& v) { c.member = to_double(v); },                 \
               [](const SolverConfig& c) { return fmt(c.member); } }                                   \
    }
#define FBP_INT(name, member)                                                                          \
    {                                                                                                  \
        name, {[](SolverConfig& c, const std::string& v) { c.member = to_int(v); },                    \
               [](const SolverConfig& c) { return std::to_string(c.member); } }                        \
    }
#define FBP_LIST(name, member)                                                                         \
    {                                                                                                  \
        name, {[](SolverConfig& c, const std::string& v) { c.member = to_list(v); },                   \
               [](const SolverConfig& c) { return fmt(c.member); } }                                   \
    }

const std::map<std::string, Key>& keys() {
    static const std::map<std::string, Key> table{
        FBP_INT("dims", grid.n_dim),
        FBP_INT("x_points", grid.x_points),
        FBP_REAL("period", grid.period),
        FBP_INT("y_interior", grid.y_interior),
        FBP_REAL("t0", grid.t0),
        FBP_REAL("T", grid.horizon),
        FBP_INT("N", grid.steps),
        FBP_REAL("q", grid.grading),
        FBP_REAL("beta", beta),
        FBP_REAL("alpha", alpha),
        FBP_INT("epsilon", epsilon),
        {"g", {[](SolverConfig& c, const std::string& v) { c.g_preset = v; },
               [](const SolverConfig& c) { return c.g_preset; }}},
        FBP_REAL("g_mean", g_mean),
        FBP_REAL("g_amplitude", g_amplitude),
        FBP_INT("g_mode", g_mode),
        FBP_REAL("g_floor", g_floor),
        {"g_file", {[](SolverConfig& c, const std::string& v) { c.g_file = v; },
                    [](const SolverConfig& c) { return c.g_file; }}},
        FBP_REAL("tolerance", tolerance),
        FBP_REAL("inner_factor", inner_factor),
        FBP_INT("max_outer", max_outer),
        FBP_INT("max_inner", max_inner),
        FBP_INT("max_restarts", max_restarts),
        FBP_REAL("radius_u", radius_u),
        FBP_REAL("radius_s", radius_s),
        {"elliptic_path",
         {[](SolverConfig& c, const std::string& v) {
              c.elliptic_path = to_enum<EllipticPath>(v, [](const std::string& s) { return parse_elliptic_path(s); });
          },
          [](const SolverConfig& c) { return to_string(c.elliptic_path); }}},
        FBP_REAL("elliptic_tolerance", elliptic_tolerance),
        FBP_INT("elliptic_max_sweeps", elliptic_max_sweeps),
        FBP_REAL("max_oscillation", max_oscillation),
        {"time_scheme",
         {[](SolverConfig& c, const std::string& v) {
              c.time_scheme = to_enum<TimeScheme>(v, [](const std::string& s) { return parse_time_scheme(s); });
          },
          [](const SolverConfig& c) { return to_string(c.time_scheme); }}},
        FBP_REAL("max_step_fraction", max_step_fraction),
        FBP_INT("damped_start", damped_start),
        FBP_INT("hj_substeps", hj_substeps),
        FBP_REAL("jacobian_bound", jacobian_bound),
        FBP_REAL("elliptic_t", elliptic_t),
        FBP_REAL("c_amplitude", c_amplitude),
        FBP_REAL("h_amplitude", h_amplitude),
        {"compare_oracle", {[](SolverConfig& c, const std::string& v) { c.compare_oracle = to_bool(v); },
                            [](const SolverConfig& c) { return std::string(c.compare_oracle ? "true" : "false"); }}},
        FBP_LIST("xi_list", xi_list),
        FBP_LIST("peak_xi", peak_xi),
        FBP_LIST("operator_times", operator_times),
        FBP_INT("triples", triples),
        FBP_INT("product_trials", product_trials),
        {"seed", {[](SolverConfig& c, const std::string& v) {
                      const int s = to_int(v);
                      if (s < 0) throw BadValue{"seed must be non-negative"};
                      c.seed = static_cast<unsigned>(s);
                  },
                  [](const SolverConfig& c) { return std::to_string(c.seed); }}},
        {"output_dir", {[](SolverConfig& c, const std::string& v) { c.output_dir = v; },
                        [](const SolverConfig& c) { return c.output_dir; }}},
        {"field_format",
         {[](SolverConfig& c, const std::string& v) {
              c.field_format = to_enum<FieldEncoding>(v, [](const std::string& s) { return parse_field_encoding(s); });
          },
          [](const SolverConfig& c) { return to_string(c.field_format); }}},
    };
    return table;
}

#undef FBP_REAL
#undef FBP_INT
#undef FBP_LIST

class Validator {
public:
    explicit Validator(const SolverConfig& c) : c_(c) {}

    void check(bool ok, const std::string& key, const std::string& message) const {
        if (ok) return;
        const auto it = c_.key_lines.find(key);
        if (it == c_.key_lines.end()) throw ConfigError(key + ": " + message + " (default value)");
        throw ConfigError(key + ": " + message, it->second);
    }

private:
    const SolverConfig& c_;
};

bool all_positive(const std::vector<double>& v) {
    for (double x : v)
        if (!(x > 0.0)) return false;
    return true;
}

void validate(const SolverConfig& c) {
    const Validator v(c);
    v.check(c.grid.n_dim == 1 || c.grid.n_dim == 2, "dims", "must be 1 or 2");
    v.check(c.grid.x_points >= 4 && (c.grid.x_points & (c.grid.x_points - 1)) == 0, "x_points",
            "must be a power of two, at least 4");
    v.check(c.grid.period > 0.0, "period", "must be positive");
    v.check(c.grid.y_interior >= 2, "y_interior", "must be at least 2");
    v.check(c.grid.t0 > 0.0, "t0", "must be positive");
    v.check(c.grid.t0 < c.grid.horizon, "T", "must exceed t0");
    v.check(c.grid.steps >= 2, "N", "must be at least 2");
    v.check(c.grid.grading >= 1.0, "q", "must be at least 1");
    v.check(c.beta > 0.0 && c.beta < 1.0, "beta", "must lie in (0, 1)");
    v.check(c.alpha > 0.0 && c.alpha < 1.0, "alpha", "must lie in (0, 1)");
    v.check(c.beta <= c.alpha, "beta", "must not exceed alpha");
    v.check(c.epsilon == 0 || c.epsilon == 1, "epsilon", "must be 0 or 1");
    v.check(c.g_preset == "constant" || c.g_preset == "ripple" || c.g_preset == "bump" || c.g_preset == "file", "g",
            "unknown preset '" + c.g_preset + "' (constant, ripple, bump or file)");
    v.check(c.g_preset != "file" || !c.g_file.empty(), "g", "preset 'file' needs g_file");
    v.check(c.g_floor > 0.0, "g_floor", "must be positive");
    v.check(c.tolerance > 0.0, "tolerance", "must be positive");
    v.check(c.inner_factor > 0.0 && c.inner_factor <= 1.0, "inner_factor", "must lie in (0, 1]");
    v.check(c.max_outer >= 1, "max_outer", "must be at least 1");
    v.check(c.max_inner >= 1, "max_inner", "must be at least 1");
    v.check(c.max_restarts >= 0, "max_restarts", "must be non-negative");
    v.check(c.radius_u > 0.0, "radius_u", "must be positive");
    v.check(c.radius_s > 0.0, "radius_s", "must be positive");
    v.check(c.elliptic_tolerance > 0.0, "elliptic_tolerance", "must be positive");
    v.check(c.elliptic_max_sweeps >= 1, "elliptic_max_sweeps", "must be at least 1");
    v.check(c.max_oscillation > 0.0, "max_oscillation", "must be positive");
    v.check(c.max_step_fraction > 0.0, "max_step_fraction", "must be positive");
    v.check(c.damped_start >= 0, "damped_start", "must be non-negative");
    v.check(c.hj_substeps >= 1, "hj_substeps", "must be at least 1");
    v.check(c.jacobian_bound > 0.0 && c.jacobian_bound < 1.0, "jacobian_bound", "must lie in (0, 1)");
    v.check(c.elliptic_t > 0.0, "elliptic_t", "must be positive");
    v.check(c.c_amplitude >= 0.0 && c.c_amplitude < 1.0, "c_amplitude", "must lie in [0, 1)");
    v.check(c.xi_list.size() >= 2 && all_positive(c.xi_list), "xi_list", "needs two or more positive entries");
    v.check(all_positive(c.peak_xi), "peak_xi", "entries must be positive");
    v.check(c.operator_times.size() >= 2 && all_positive(c.operator_times), "operator_times",
            "needs two or more positive entries");
    v.check(c.triples >= 1, "triples", "must be at least 1");
    v.check(c.product_trials >= 1, "product_trials", "must be at least 1");
    v.check(!c.output_dir.empty(), "output_dir", "must not be empty");
}

Eigen::VectorXd read_samples(const std::string& path, int expected) {
    std::ifstream in(path);
    if (!in) throw ConfigError("g_file: cannot open " + path);
    std::vector<double> values;
    for (std::string tok; in >> tok;) {
        for (char& ch : tok)
            if (ch == ',') ch = ' ';
        std::stringstream ss(tok);
        for (std::string part; ss >> part;) {
            try {
                values.push_back(to_double(part));
            } catch (const BadValue& e) {
                throw ConfigError("g_file: " + e.message);
            }
        }
    }
    if (static_cast<int>(values.size()) != expected)
        throw ConfigError("g_file: " + std::to_string(values.size()) + " samples, grid has " +
                          std::to_string(expected) + " points");
    return Eigen::Map<Eigen::VectorXd>(values.data(), expected);
}

}  // namespace

SolverConfig parse_config(const std::string& text, const std::string& base_dir) {
    SolverConfig config;
    std::stringstream in(text);
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = keys().find(key);
        if (it == keys().end()) throw ConfigError("unknown key '" + key + "'", line_no);
        if (config.key_lines.count(key))
            throw ConfigError("key '" + key + "' repeats line " + std::to_string(config.key_lines[key]), line_no);
        if (value.empty()) throw ConfigError("key '" + key + "' has no value", line_no);
        try {
            it->second.set(config, value);
        } catch (const BadValue& e) {
            throw ConfigError(key + ": " + e.message, line_no);
        }
        config.key_lines[key] = line_no;
    }
    if (!config.g_file.empty() && std::filesystem::path(config.g_file).is_relative())
        config.g_file = (std::filesystem::path(base_dir) / config.g_file).lexically_normal().string();
    validate(config);
    try {
        boundary_datum(config, make_grids(config.grid).x);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return config;
}

SolverConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    return parse_config(buffer.str(), parent.empty() ? "." : parent.string());
}

std::string canonical_text(const SolverConfig& config) {
    std::string out;
    for (const auto& [name, key] : keys()) {
        const std::string value = key.get(config);
        if (!value.empty()) out += name + " = " + value + "\n";
    }
    return out;
}

Eigen::VectorXd boundary_datum(const SolverConfig& c, const XGrid& x) {
    const double k = c.g_mode * 2.0 * M_PI / x.period();
    Eigen::VectorXd g;
    if (c.g_preset == "constant")
        g = Eigen::VectorXd::Constant(x.size(), c.g_mean);
    else if (c.g_preset == "ripple")
        g = x.sample([&](const Point& p) { return c.g_mean + c.g_amplitude * std::sin(k * p[0]); });
    else if (c.g_preset == "bump")
        g = x.sample([&](const Point& p) {
            const double second = x.n_dim() == 2 ? std::cos(k * p[1]) : 1.0;
            return c.g_mean + c.g_amplitude * std::cos(k * p[0]) * second;
        });
    else if (c.g_preset == "file")
        g = read_samples(c.g_file, x.size());
    else
        throw ConfigError("g: unknown preset '" + c.g_preset + "'");
    if (g.minCoeff() < c.g_floor) {
        const auto it = c.key_lines.find("g");
        throw ConfigError("g: minimum " + fmt(g.minCoeff()) + " is below g_floor = " + fmt(c.g_floor),
                          it == c.key_lines.end() ? 0 : it->second);
    }
    return g;
}

CouplingOptions coupling_options(const SolverConfig& c) {
    CouplingOptions o;
    o.epsilon = c.epsilon;
    o.beta = c.beta;
    o.tolerance = c.tolerance;
    o.inner_factor = c.inner_factor;
    o.max_outer = c.max_outer;
    o.max_inner = c.max_inner;
    o.max_restarts = c.max_restarts;
    o.radius_u = c.radius_u;
    o.radius_s = c.radius_s;
    o.step.scheme = c.time_scheme;
    o.step.max_step_fraction = c.max_step_fraction;
    o.step.damped_start = c.damped_start;
    o.elliptic_path = c.elliptic_path;
    o.elliptic.tolerance = c.elliptic_tolerance;
    o.elliptic.max_sweeps = c.elliptic_max_sweeps;
    o.elliptic.max_oscillation = c.max_oscillation;
    o.characteristics.substeps = c.hj_substeps;
    o.characteristics.jacobian_bound = c.jacobian_bound;
    return o;
}

}  // namespace fbp
