#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "fbp/grids.hpp"
#include "fbp/strip_system.hpp"

namespace fbp {

/// Discrete generator A(t) = Delta_x + 1/(t^2 c^2) d_yy with u(0) = 0 and
/// u_y(1) = 0, optionally modified to A(t) + (y/t) d_y.
class GeneratorFamily {
public:
    GeneratorFamily(const XGrid& x, const YGrid& y, Eigen::VectorXd c, bool modified = false);

    const XGrid& x() const { return x_; }
    const YGrid& y() const { return y_; }
    const Eigen::VectorXd& c() const { return c_; }
    bool modified() const { return modified_; }

    /// Coefficients of shift - A(t).
    StripCoefficients shifted(double t, double shift) const;
    /// A(t) at interior nodes of a full slice.
    Slice apply(double t, const Slice& u) const;
    /// Solve (shift - A(t)) u = f with u(., 0) = bottom, (1/t) u_y(., 1) = flux.
    /// Factorizations are cached by (t, shift).
    Slice solve(double t, double shift, const Slice& f, const Eigen::VectorXd& bottom,
                const Eigen::VectorXd& flux) const;
    Slice solve(double t, double shift, const Slice& f) const;

    /// Boundary operators of -A(t): R_D(t) g and R_N(t) h.
    Slice dirichlet(double t, const Eigen::VectorXd& g) const;
    Slice neumann(double t, const Eigen::VectorXd& h) const;

    /// d/dt of R_D(t) g(t) and R_N(t) h(t) from the closed-form expressions
    ///   d/dt R_D g = (2/t) (-A)^{-1} L R_D g + R_D g',
    ///   d/dt R_N h = (2/t) (-A)^{-1} L R_N h + (1/t) R_N h + R_N h',
    /// with L = Delta_x, or Delta_x + (y / 2t) d_y for the modified family.
    Slice dirichlet_rate(double t, const Eigen::VectorXd& g, const Eigen::VectorXd& g_rate) const;
    Slice neumann_rate(double t, const Eigen::VectorXd& h, const Eigen::VectorXd& h_rate) const;

    void clear_cache() const;
    std::size_t cached_factorizations() const;

private:
    const StripSystem& system(double t, double shift) const;
    Slice rate_operator(double t, const Slice& w) const;

    XGrid x_;
    YGrid y_;
    Eigen::VectorXd c_;
    bool modified_ = false;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, std::shared_ptr<const StripSystem>> cache_;
};

enum class TimeScheme { ImplicitEuler, Trapezoidal };

TimeScheme parse_time_scheme(const std::string& name);
std::string to_string(TimeScheme scheme);

struct StepOptions {
    TimeScheme scheme = TimeScheme::ImplicitEuler;
    /// Sub-steps satisfy dt <= max_step_fraction * t at their left end.
    double max_step_fraction = 0.1;
    bool allow_substeps = true;
    /// Implicit Euler sub-steps on the first level interval of evolve()
    /// before the chosen scheme takes over (0: none). Damps the stiff modes
    /// the trapezoidal rule leaves undamped.
    int damped_start = 0;
};

/// Forcing evaluated at an arbitrary time; interior columns are used.
using Forcing = std::function<Slice(double)>;
/// Boundary datum and its time derivative.
struct BoundaryData {
    std::function<Eigen::VectorXd(double)> value;
    std::function<Eigen::VectorXd(double)> rate;

    static BoundaryData constant(const Eigen::VectorXd& v);
    static BoundaryData zero(int size);
};

class ParabolicStepper {
public:
    ParabolicStepper(std::shared_ptr<const GeneratorFamily> family, StepOptions options = {});

    const GeneratorFamily& family() const { return *family_; }
    const StepOptions& options() const { return options_; }

    int substeps(double t_from, double t_to) const;
    /// One level step of u' - A(t) u = f with homogeneous boundary rows.
    Slice step(const Slice& u, double t_from, double t_to, const Forcing& f) const;
    /// Implicit Euler with `count` equal sub-steps, ignoring the step limit.
    Slice damped_step(const Slice& u, double t_from, double t_to, const Forcing& f, int count) const;
    /// Steps through all levels; returns one slice per level (first = u0).
    std::vector<Slice> evolve(const Slice& u0, const std::vector<double>& levels, const Forcing& f) const;

private:
    std::shared_ptr<const GeneratorFamily> family_;
    StepOptions options_;
};

/// u = v + R_D g + R_N h with the three parts kept apart.
struct InhomogeneousSolution {
    StripField u;
    StripField dirichlet;
    StripField neumann;
    StripField v;
};

/// Solves u' - A(t) u = f, u(0) = g(t), (1/t) u_y(1) = h(t) by reduction to
/// homogeneous boundary data. v starts from v0 (zero when empty).
InhomogeneousSolution solve_inhomogeneous(const ParabolicStepper& stepper, const std::vector<double>& levels,
                                          const Forcing& f, const BoundaryData& g, const BoundaryData& h,
                                          const Slice* v0 = nullptr);

struct MaxRegReport {
    std::vector<double> times;
    /// Spectral radius of (-A(t))^{-1} by power iteration.
    std::vector<double> inverse_norm;
    /// sup |(-A(t))^{-1} f| / sup |f| over random f.
    std::vector<double> inverse_sup_ratio;
    double inverse_slope = 0.0;
    double inverse_constant = 0.0;
    /// Worst of |[A(t) - A(s)] A(tau)^{-1}| * t / (t - s) over sampled triples.
    double difference_ratio_max = 0.0;
    int triples = 0;
    /// A(t)^{-1} -> 0: ratio at the smallest sampled time.
    double smallest_inverse = 0.0;
};

MaxRegReport verify_maxreg_hypotheses(const GeneratorFamily& family, const std::vector<double>& times,
                                      int triples = 100, unsigned seed = 11);

}  // namespace fbp
