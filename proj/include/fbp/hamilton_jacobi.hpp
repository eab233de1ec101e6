#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fbp/error.hpp"
#include "fbp/grids.hpp"

namespace fbp {

/// Normal speed v(t, x) of the front and its spatial gradient.
struct VelocityField {
    std::function<double(double, const Point&)> value;
    std::function<Point(double, const Point&)> gradient;

    /// Time-independent closed form with analytic gradient.
    static VelocityField steady(std::function<double(const Point&)> v, std::function<Point(const Point&)> grad);
    static VelocityField constant(double v);
};

/// Velocity from samples on the x-grid at the given times: periodic 4-point
/// Lagrange interpolation in x (gradient from spectral derivatives of each
/// level), cubic in t, held constant outside [times.front(), times.back()].
VelocityField sampled_velocity(const XGrid& x, std::vector<double> times, std::vector<Eigen::VectorXd> values);

/// Raised when the flow map stops being a near-identity diffeomorphism.
/// `admissible_time` is the last level at which the guards still held.
class FlowGuardError : public ConvergenceError {
public:
    FlowGuardError(const std::string& what, double admissible_time)
        : ConvergenceError(what), admissible_time_(admissible_time) {}
    double admissible_time() const noexcept { return admissible_time_; }

private:
    double admissible_time_;
};

struct CharacteristicOptions {
    int substeps = 4;         // RK4 steps per level interval
    int initial_steps = 16;   // RK4 steps on [0, t0]
    double jacobian_bound = 0.5;
    double momentum_bound = 10.0;
    int newton_iterations = 50;
    double newton_tol = 1e-10;
};

/// Characteristic states of every seed at every level. Seeds are the x-grid
/// points; matrices are (seeds x n_dim).
struct FlowMap {
    XGrid grid;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> position;
    std::vector<Eigen::MatrixXd> momentum;
    std::vector<Eigen::VectorXd> value;  // z
    std::vector<Eigen::VectorXd> rate;   // r
    std::vector<double> jacobian_defect; // max over seeds of |id - D X|_inf

    int levels() const { return static_cast<int>(times.size()); }
};

/// RK4 for x' = -p v / sqrt(1+|p|^2), p' = sqrt(1+|p|^2) grad v and
/// z' = r - |p|^2 v / sqrt(1+|p|^2), starting from x = seed, p = 0, z = 0 at
/// t = 0. r = sqrt(1+|p|^2) v is evaluated pointwise; no time derivative of
/// v is used. Throws FlowGuardError if a guard trips.
FlowMap integrate_characteristics(const VelocityField& v, const XGrid& x, const std::vector<double>& times,
                                  const CharacteristicOptions& options = {});

/// Seed whose characteristic sits at `query` at level k. Newton iteration
/// on the trigonometric interpolant of the displacement X - seed, started
/// from the fixed-point guess. Throws FlowGuardError on non-convergence.
Point invert_flow_map(const FlowMap& flow, int level, const Point& query, const CharacteristicOptions& options = {});

struct FrontSolution {
    SurfaceField surface;                 // s and its time derivative
    std::vector<Eigen::MatrixXd> gradient; // grad s = p at the inverted seed
    FlowMap flow;
    double max_jacobian_defect = 0.0;
    double max_momentum = 0.0;
};

/// s(t, x) = z(t, X_t^{-1}(x)) on the x-grid, with s_t = sqrt(1+|grad s|^2) v.
FrontSolution reconstruct_front(const FlowMap& flow, const VelocityField& v, const CharacteristicOptions& options = {});

FrontSolution hj_solve(const VelocityField& v, const XGrid& x, const std::vector<double>& times,
                       const CharacteristicOptions& options = {});

}  // namespace fbp
