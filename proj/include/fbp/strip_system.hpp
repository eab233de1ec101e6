#pragma once

#include <memory>
#include <mutex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fbp/grids.hpp"

namespace fbp {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Second-order discrete -d^2/dy^2 on the interior y nodes with u(0) = 0 and
/// a one-sided Neumann stencil at y = 1. Row m carries the eliminated top
/// node: u_{m+1} = (4 u_m - u_{m-1} + 2 h nu) / 3.
class OperatorC {
public:
    explicit OperatorC(const YGrid& y);

    int size() const { return y_.interior(); }
    const YGrid& grid() const { return y_; }
    Eigen::MatrixXd dense() const;
    Eigen::VectorXd eigenvalues() const;

    /// Solve (shift I + scale C) u = f on interior nodes, with boundary value
    /// `bottom` at y = 0 and derivative `slope` at y = 1. `f` and the result
    /// are full profiles (m + 2 nodes); f's end entries are ignored.
    template <class Vec>
    Vec solve(double shift, double scale, const Vec& f, typename Vec::Scalar bottom,
              typename Vec::Scalar slope) const;

    /// Top-node reconstruction from the Neumann row.
    template <class Scalar>
    Scalar top_value(Scalar u_m, Scalar u_m1, Scalar slope) const {
        return (4.0 * u_m - u_m1 + 2.0 * y_.spacing() * slope) / 3.0;
    }

private:
    YGrid y_;
};

/// Coefficients of the strip operator
///   P u = shift u - x_diffusion Delta_x u - kappa(x) u_yy - drift y u_y
/// with a second-order periodic difference Laplacian in x.
struct StripCoefficients {
    double shift = 0.0;
    double x_diffusion = 1.0;
    Eigen::VectorXd kappa;
    double drift = 0.0;
};

/// Sparse assembly and cached LU factorization of P on interior unknowns
/// (index ix * m + j - 1). Bottom node is Dirichlet, top node is eliminated
/// through the one-sided Neumann row.
class StripSystem {
public:
    StripSystem(const XGrid& x, const YGrid& y, StripCoefficients coeffs);

    const SparseMatrix& matrix() const { return matrix_; }
    const StripCoefficients& coefficients() const { return coeffs_; }

    /// P applied at the interior nodes of a full slice; boundary columns are 0.
    Slice apply(const Slice& u) const;

    /// Solve P u = f (interior columns of f) with u(., 0) = bottom and
    /// one-sided d/dy u(., 1) = slope. Returns the full slice.
    Slice solve(const Slice& f, const Eigen::VectorXd& bottom, const Eigen::VectorXd& slope) const;

private:
    XGrid x_;
    YGrid y_;
    StripCoefficients coeffs_;
    SparseMatrix matrix_;
    // Factorized on first solve.
    struct Factorization {
        std::once_flag once;
        Eigen::SparseLU<SparseMatrix> lu;
    };
    std::shared_ptr<Factorization> factor_;
};

/// Second-order periodic difference Laplacian in x, column-wise.
Slice difference_laplacian(const Slice& u, const XGrid& x);

/// d/dy: central in the interior, one-sided second order at both ends.
Slice y_derivative(const Slice& u, const YGrid& y);
/// d^2/dy^2: central in the interior, one-sided second order at both ends.
Slice y_second_derivative(const Slice& u, const YGrid& y);
/// One-sided second-order d/dy at y = 1.
Eigen::VectorXd top_derivative(const Slice& u, const YGrid& y);

// ---------------------------------------------------------------------------

template <class Vec>
Vec OperatorC::solve(double shift, double scale, const Vec& f, typename Vec::Scalar bottom,
                     typename Vec::Scalar slope) const {
    using Scalar = typename Vec::Scalar;
    const int m = y_.interior();
    const double h = y_.spacing();
    const double off = -scale / (h * h);
    // Thomas algorithm; row m has (-2/3, 2/3) / h^2 scaled.
    std::vector<double> lower(m, off), diag(m, shift + 2.0 * scale / (h * h)), upper(m, off);
    lower[m - 1] = -2.0 / 3.0 * scale / (h * h);
    diag[m - 1] = shift + 2.0 / 3.0 * scale / (h * h);
    std::vector<Scalar> rhs(m);
    for (int j = 0; j < m; ++j) rhs[j] = f[j + 1];
    rhs[0] -= off * bottom;
    rhs[m - 1] += scale * 2.0 * slope / (3.0 * h);
    for (int j = 1; j < m; ++j) {
        const double w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    Vec u(m + 2);
    u[m] = rhs[m - 1] / diag[m - 1];
    for (int j = m - 2; j >= 0; --j) u[j + 1] = (rhs[j] - upper[j] * u[j + 2]) / diag[j];
    u[0] = bottom;
    u[m + 1] = top_value(u[m], u[m - 1], slope);
    return u;
}

}  // namespace fbp
