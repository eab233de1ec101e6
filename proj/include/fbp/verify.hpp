#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fbp/coupling.hpp"
#include "fbp/elliptic.hpp"
#include "fbp/grids.hpp"
#include "fbp/parabolic.hpp"

namespace fbp {

/// Direct solve of the elliptic model problem on all nodes, with the
/// boundary conditions kept as explicit rows. Guarded to at most 128 points
/// per x dimension and 64 interior y nodes. `residual` receives the scaled
/// sup residual of the assembled system.
Slice dense_oracle_elliptic(const EllipticProblem& p, const XGrid& x, const YGrid& y, double* residual = nullptr);

/// Data of the original parabolic problem
///   u' - A(t) u = f,  u(0) = g(t),  (1/t) u_y(1) = h(t),  u(t0) = u0.
struct ParabolicOracleData {
    XGrid x;
    YGrid y;
    Eigen::VectorXd c;
    bool modified = false;
    Forcing f;
    BoundaryData g;
    BoundaryData h;
    Slice u0;
    std::vector<double> levels;
    /// Oracle steps per level.
    int steps_per_level = 100;
    /// Per-level step counts; overrides steps_per_level when not empty.
    std::vector<int> level_steps;
};

/// Method of lines on all nodes with time-dependent boundary rows, advanced
/// by a two-stage L-stable diagonally implicit Runge-Kutta scheme.
StripField dense_oracle_parabolic(const ParabolicOracleData& data);

/// Pointwise residuals of the transformed free boundary system evaluated on
/// discrete (u, s). Time derivatives of u and s are three-point differences
/// over the levels (the stored s' is not used); x derivatives are spectral and
/// y derivatives second-order differences.
struct TransformedResiduals {
    std::vector<double> times;
    /// Interior equation multiplied by s^2, on interior nodes.
    StripField interior;
    /// u(., 0) - g.
    std::vector<Eigen::VectorXd> dirichlet;
    /// Stefan condition at y = 1 divided by t:
    ///   (1+|grad s|^2) u_y / t + (s/t) [(1 + eps u) s' - (grad s|grad u)].
    std::vector<Eigen::VectorXd> stefan;
    /// Front equation s' - sqrt(1+|grad s|^2) u at y = 1.
    std::vector<Eigen::VectorXd> front;
    double interior_sup = 0.0;
    double dirichlet_sup = 0.0;
    double stefan_sup = 0.0;
    double front_sup = 0.0;
};

TransformedResiduals residual_transformed_system(const StripField& u, const SurfaceField& s, const Eigen::VectorXd& g,
                                                 const XGrid& x, const YGrid& y, int epsilon);
TransformedResiduals residual_transformed_system(const CoupledState& state);

}  // namespace fbp
