#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fbp/fourier.hpp"
#include "fbp/grids.hpp"
#include "fbp/strip_system.hpp"

namespace fbp {

/// Singular elliptic model problem at time t:
///   -Delta_x u - 1/(t^2 c(x)^2) u_yy = f,  u(., 0) = g,  (1/t) u_y(., 1) = h.
struct EllipticProblem {
    double t = 1.0;
    Eigen::VectorXd c;
    Slice f;
    Eigen::VectorXd g;
    Eigen::VectorXd h;

    static EllipticProblem zeros(double t, const XGrid& x, const YGrid& y, double c = 1.0);
};

/// Smooth partition of unity on the periodic box with sum of squares one.
/// Patches are centered on a uniform lattice of spacing r and supported in
/// the open cube of half-side r around their center.
class PartitionOfUnity {
public:
    PartitionOfUnity(const XGrid& x, int patches_per_dim);

    /// Smallest power-of-two lattice whose patches see a relative
    /// oscillation of c at most `max_oscillation`.
    static PartitionOfUnity for_coefficient(const XGrid& x, const Eigen::VectorXd& c,
                                            double max_oscillation = 0.1);

    int patches() const { return static_cast<int>(weights_.size()); }
    int patches_per_dim() const { return per_dim_; }
    double radius() const { return radius_; }
    const Eigen::VectorXd& weight(int k) const { return weights_[k]; }
    const Point& center(int k) const { return centers_[k]; }
    /// Grid index of the center of patch k.
    int center_index(int k) const { return center_index_[k]; }

    /// Max over patches of (max c - min c) / c(center) on the patch support.
    double oscillation(const Eigen::VectorXd& c) const;
    /// Coefficient frozen at each patch center.
    std::vector<double> frozen(const Eigen::VectorXd& c) const;

private:
    XGrid x_;
    int per_dim_ = 1;
    double radius_ = 0.0;
    std::vector<Eigen::VectorXd> weights_;
    std::vector<Point> centers_;
    std::vector<int> center_index_;
};

struct EllipticOptions {
    double tolerance = 1e-8;
    int max_sweeps = 50;
    double max_oscillation = 0.1;
};

struct EllipticReport {
    int sweeps = 0;
    int patches = 1;
    double residual = 0.0;
    double contraction = 0.0;
    std::vector<double> residual_history;
};

/// Residual of the discrete problem in u-units: sup of t^2 c^2 (f - A u),
/// g - u(., 0) and t (h - (1/t) u_y(., 1)), each taken separately.
struct EllipticResidual {
    double interior = 0.0;
    double bottom = 0.0;
    double top = 0.0;
    double total() const { return interior + bottom + top; }
};

/// Discrete -Delta_x u - 1/(t^2 c^2) u_yy at interior nodes.
Slice elliptic_apply(double t, const Eigen::VectorXd& c, const Slice& u, const XGrid& x, const YGrid& y);
EllipticResidual elliptic_residual(const EllipticProblem& p, const Slice& u, const XGrid& x, const YGrid& y);

/// Mode-by-mode solve for constant c (c[0] is used; the vector must be constant).
Slice solve_constant(const EllipticProblem& p, const Spectral& spectral, const YGrid& y);

/// Localized frozen-coefficient approximate inverse corrected by defect
/// iteration until the scaled residual drops below the tolerance. Throws
/// ConvergenceError when the residual stops contracting.
Slice solve_variable(const EllipticProblem& p, const PartitionOfUnity& pou, const Spectral& spectral,
                     const YGrid& y, const EllipticOptions& options = {}, EllipticReport* report = nullptr,
                     const Slice* initial = nullptr);

/// Sparse direct solve of the same discretization.
Slice solve_direct(const EllipticProblem& p, const XGrid& x, const YGrid& y);

/// Estimated spectral radius of the commutator defect
///   F -> sum_k t^2 c_k^2 (-Delta(phi_k w_k) + phi_k Delta w_k),  w_k = S_k(phi_k F / (t^2 c_k^2)),
/// by power iteration from a seeded random start.
double commutator_factor(double t, const Eigen::VectorXd& c, const PartitionOfUnity& pou,
                         const Spectral& spectral, const YGrid& y, int iterations = 30, unsigned seed = 7);

enum class EllipticPath { Constant, Variable, Direct };

EllipticPath parse_elliptic_path(const std::string& name);
std::string to_string(EllipticPath path);

/// Dispatching solver bound to a coefficient.
class EllipticSolver {
public:
    EllipticSolver(const XGrid& x, const YGrid& y, Eigen::VectorXd c, EllipticPath path,
                   EllipticOptions options = {});

    Slice solve(double t, const Slice& f, const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                EllipticReport* report = nullptr) const;

    struct BoundaryParts {
        Slice dirichlet;
        Slice neumann;
    };
    /// R_D(t) g and R_N(t) h returned separately.
    BoundaryParts boundary_parts(double t, const Eigen::VectorXd& g, const Eigen::VectorXd& h) const;

    EllipticPath path() const { return path_; }
    const PartitionOfUnity& partition() const { return pou_; }
    const Eigen::VectorXd& coefficient() const { return c_; }

private:
    XGrid x_;
    YGrid y_;
    Eigen::VectorXd c_;
    EllipticPath path_;
    EllipticOptions options_;
    std::shared_ptr<Spectral> spectral_;
    PartitionOfUnity pou_;
};

}  // namespace fbp
