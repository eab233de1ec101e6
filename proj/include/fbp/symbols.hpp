#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fbp/fourier.hpp"
#include "fbp/grids.hpp"
#include "fbp/strip_system.hpp"

namespace fbp {

/// Dirichlet symbol cosh(xi (1 - y)) / cosh(xi), overflow-safe.
double symbol_a(double xi, double y);
/// Neumann symbol sinh(xi y) / (xi cosh(xi)), with the xi -> 0 limit y.
double symbol_b(double xi, double y);

/// Per-wavenumber symbol samples on the y nodes together with the resolvent
/// of xi^2 + C.
struct SymbolEvaluation {
    double xi_norm = 0.0;
    Eigen::VectorXd a_values;
    Eigen::VectorXd b_values;
    OperatorC op;

    SymbolEvaluation(double xi, const YGrid& y);
    /// (xi^2 + C)^{-1} f with u(0) = 0 and u'(1) = 0; f is a full profile.
    Eigen::VectorXd resolvent(const Eigen::VectorXd& f) const;
};

/// (xi^2 + C)^{-1} f on the y grid; f and the result are full profiles.
Eigen::VectorXd resolvent_c_apply(double xi, const Eigen::VectorXd& f, const YGrid& y);

enum class Symbol { A, B, C };

/// sigma_t a or t sigma_t b applied to an x-grid boundary datum: each Fourier
/// mode k is multiplied by the y-profile of the symbol at argument t c |k|.
Slice dilated_boundary_apply(Symbol which, double t, const Eigen::VectorXd& datum, const Spectral& spectral,
                             const YGrid& y, double c = 1.0);

/// t^2 c^2 sigma_t c applied to a slice (zero boundary data). Uses the exact
/// wavenumber in x and the discrete resolvent in y.
Slice dilated_resolvent_apply(double t, const Slice& f, const Spectral& spectral, const YGrid& y,
                              double c = 1.0);

struct SymbolEstimate {
    double xi = 0.0;
    /// (1 + xi^2)^{(m + alpha)/2} |d^alpha symbol(xi)|.
    double weighted_sup = 0.0;
    /// Unweighted norm of the xi-derivative.
    double norm = 0.0;
    /// y where the derivative peaks (a and b only).
    double peak_location = 0.0;
};

/// Weighted sup of xi-derivatives of order alpha (0..2), sampled on xi_grid.
/// `target` selects the range space: for b, 0 -> C^1 (m = 0) and 1 -> C (m = 1);
/// for c, j in {0, 1, 2} -> C^{2 - j} with m = j. Ignored for a (C, m = 0).
/// Derivatives use central differences with step 1e-3 (1 + xi). The y sampling
/// for a and b uses `samples` uniform points; c uses the discrete resolvent on y.
std::vector<SymbolEstimate> symbol_class_estimate(Symbol which, int alpha, const std::vector<double>& xi_grid,
                                                  int target, const YGrid& y, int samples = 4001);

}  // namespace fbp
