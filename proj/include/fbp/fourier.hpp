#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fbp/grids.hpp"

namespace fbp {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Discrete Fourier transforms and spectral calculus on a periodic XGrid.
/// Coefficient layout follows FFTW (row-major in 2D, FFT-ordered slots).
/// All methods are const and safe to call concurrently.
class Spectral {
public:
    explicit Spectral(const XGrid& grid);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    const XGrid& grid() const { return grid_; }

    /// Unnormalized forward transform.
    ComplexVector forward(const Eigen::VectorXd& values) const;
    /// Inverse transform including the 1/size factor; returns the real part.
    Eigen::VectorXd backward(const ComplexVector& coeffs) const;
    ComplexVector backward_complex(const ComplexVector& coeffs) const;

    /// Column-wise transforms of a Slice.
    ComplexMatrix forward_columns(const Eigen::MatrixXd& values) const;
    Eigen::MatrixXd backward_columns(const ComplexMatrix& coeffs) const;

    /// Physical wavenumber of coefficient slot `flat` along `dim`.
    double wavenumber(int flat, int dim) const;
    /// |xi| of coefficient slot `flat`.
    double wavenumber_norm(int flat) const;
    /// Eigenvalue of the second-order periodic difference Laplacian (negated),
    /// sum over dims of (2/h)^2 sin^2(k h / 2).
    double difference_symbol(int flat) const;

    Eigen::VectorXd derivative(const Eigen::VectorXd& values, int dim) const;
    Eigen::VectorXd second_derivative(const Eigen::VectorXd& values, int dim_a, int dim_b) const;
    Eigen::VectorXd laplacian(const Eigen::VectorXd& values) const;
    Eigen::MatrixXd derivative_columns(const Eigen::MatrixXd& values, int dim) const;

    /// Trigonometric interpolant of the samples with coefficients `coeffs`
    /// (from forward()) evaluated at an arbitrary point, plus its gradient.
    double interpolate(const ComplexVector& coeffs, const Point& x) const;
    std::array<double, 2> interpolate_gradient(const ComplexVector& coeffs, const Point& x) const;

private:
    void execute(std::complex<double>* data, bool inverse) const;

    XGrid grid_;
    void* forward_plan_ = nullptr;
    void* backward_plan_ = nullptr;
    std::vector<double> k1d_;
};

}  // namespace fbp
