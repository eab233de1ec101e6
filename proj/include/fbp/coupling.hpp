#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbp/elliptic.hpp"
#include "fbp/fourier.hpp"
#include "fbp/grids.hpp"
#include "fbp/hamilton_jacobi.hpp"
#include "fbp/parabolic.hpp"

namespace fbp {

/// Front data at one level together with its spatial derivatives.
struct FrontLevel {
    double t = 0.0;
    int dim = 1;
    Eigen::VectorXd s;
    Eigen::VectorXd s_dot;
    std::array<Eigen::VectorXd, 2> grad;
    Eigen::VectorXd laplacian;

    /// Derivatives by spectral differentiation of s.
    static FrontLevel from_samples(double t, Eigen::VectorXd s, Eigen::VectorXd s_dot, const Spectral& spectral);
};

/// Perturbation of the model generator caused by a front s, applied to
/// full slices (interior nodes are set; boundary columns are zero):
///   [(1+y^2|grad s|^2)/s^2 - 1/(t^2 g^2)] u_yy + eps y [s'/s - 1/t] u_y
///   - (2y/s) (grad s | d_y grad u) - y (s Lap s - 2|grad s|^2)/s^2 u_y.
/// With eps = 0 the time-derivative term is dropped.
class FrontPerturbation {
public:
    FrontPerturbation(const FrontLevel& front, const Eigen::VectorXd& g, const XGrid& x, const YGrid& y,
                      const Spectral& spectral, int epsilon = 1);

    Slice apply(const Slice& u) const;
    /// Sup over grid points of the y_yy coefficient relative to 1/(t^2 g^2).
    double relative_diffusion_defect() const;

private:
    const XGrid& x_;
    const YGrid& y_;
    const Spectral& spectral_;
    double t_;
    int epsilon_;
    Eigen::VectorXd inv_s_;
    Eigen::MatrixXd diffusion_;  // (points x nodes) coefficient of u_yy
    Eigen::MatrixXd drift_;      // coefficient of u_y
    std::array<Eigen::VectorXd, 2> cross_; // -2 grad s / s, multiplied by y
    double defect_ = 0.0;
};

/// Neumann datum on the moving boundary:
///   (s/t) (grad s|grad u)/(1+|grad s|^2) - (s/t) u (1 + eps u)/sqrt(1+|grad s|^2)
/// with u and grad u the traces at y = 1.
Eigen::VectorXd boundary_flux(const FrontLevel& front, const Eigen::VectorXd& trace,
                              const std::array<Eigen::VectorXd, 2>& trace_grad, int epsilon = 1);

/// Discrete surrogates of the solution-space norms.
/// Strip: max over levels of sup|w| + sup|Lap_h w| + sup|t^-2 D_yy w|, plus
/// the beta-Holder seminorm in time of w.
double strip_norm(const StripField& w, const XGrid& x, const YGrid& y, double beta);
/// Front: max over levels of sup |D^k s| (k <= 3) and sup |D^k s'| (k <= 2),
/// plus the beta-Holder seminorm in time of s'.
double front_norm(const SurfaceField& s, const Spectral& spectral, double beta);

struct CouplingOptions {
    int epsilon = 1;
    double beta = 0.5;
    double tolerance = 1e-6;
    double inner_factor = 0.1;
    int max_outer = 40;
    int max_inner = 40;
    int max_restarts = 4;
    /// Guards: sup |u - g| <= radius_u * max g and sup |s/t - g| <= radius_s * max g.
    double radius_u = 1.0;
    double radius_s = 0.5;
    StepOptions step{TimeScheme::Trapezoidal, 0.1, true, 4};
    EllipticPath elliptic_path = EllipticPath::Variable;
    EllipticOptions elliptic;
    CharacteristicOptions characteristics;
};

/// One line of the iteration log.
struct IterationRecord {
    std::string stage;  // "inner", "outer" or "restart"
    int outer = 0;
    int inner = 0;
    double horizon = 0.0;
    double difference = 0.0;
    double ratio = 0.0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Solution of the inner problem for a fixed front, with the three summands
/// R_D g, R_N H and v kept apart (u = sum).
struct InnerSolution {
    StripField u;
    StripField dirichlet;
    StripField neumann;
    StripField v;
    int iterations = 0;
    std::vector<double> differences;
    std::vector<double> ratios;
    double contraction = 0.0;
    /// Stopping tolerance actually used: the requested one, raised to the
    /// round-off floor of the norm when that is larger.
    double tolerance = 0.0;
};

/// Picard iteration u -> v + R_D g + R_N H(s, u) for a fixed front, using
/// the modified generator A(t) + (y/t) d_y with c = g. With eps = 0 the
/// problem is elliptic at every level and is solved level by level.
InnerSolution phi1(const SurfaceField& s, const Eigen::VectorXd& g, const Grids& grids,
                   const CouplingOptions& options, const StripField* initial = nullptr,
                   const IterationCallback& log = {});

struct CoupledState {
    Grids grids;
    Eigen::VectorXd g;
    int epsilon = 1;
    StripField u;
    SurfaceField s;
    StripField dirichlet;
    StripField neumann;
    StripField v;
    std::vector<IterationRecord> log;
    std::vector<double> outer_differences;
    std::vector<double> outer_ratios;
    double outer_contraction = 0.0;
    /// Contraction estimate of the cold-started inner iteration on s = t g.
    double inner_contraction = 0.0;
    int outer_iterations = 0;
    int inner_iterations = 0;
    int restarts = 0;
    bool converged = false;
};

/// Outer iteration s -> HJ(trace of phi1(s)) from s = t g. On a contraction
/// failure or a tripped guard the horizon is halved and the run restarted.
CoupledState solve_fbp(const Eigen::VectorXd& g, const Grids& grids, const CouplingOptions& options,
                       const IterationCallback& log = {});

struct DecompositionReport {
    std::vector<double> times;
    std::vector<double> dirichlet_norm;  // sup |R_D g|
    std::vector<double> dirichlet_defect; // sup |R_D g - g|
    std::vector<double> neumann_norm;    // sup |R_N H|
    std::vector<double> remainder_norm;  // sup |v|
    double dirichlet_slope = 0.0;
    double dirichlet_defect_slope = 0.0;
    double neumann_slope = 0.0;
    double remainder_slope = 0.0;
};

/// Log-log slopes of the summands over levels in [first_time, last_time].
/// Samples at round-off level are skipped; a slope with fewer than two is NaN.
DecompositionReport decomposition_report(const CoupledState& state, double first_time, double last_time);

/// Contraction estimate of a difference sequence: the largest ratio of
/// consecutive differences while they stay above `floor`.
double contraction_estimate(const std::vector<double>& differences, double floor);

}  // namespace fbp
