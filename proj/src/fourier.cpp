#include "fbp/fourier.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace fbp {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {}
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(ptr); }
    fftw_complex* ptr;
};

}  // namespace

Spectral::Spectral(const XGrid& grid) : grid_(grid), k1d_(grid.wavenumbers()) {
    const int n = grid_.points_per_dim();
    FftwBuffer scratch(grid_.size());
    std::lock_guard lock(planner_mutex());
    if (grid_.n_dim() == 1) {
        forward_plan_ = fftw_plan_dft_1d(n, scratch.ptr, scratch.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_plan_ = fftw_plan_dft_1d(n, scratch.ptr, scratch.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
        forward_plan_ = fftw_plan_dft_2d(n, n, scratch.ptr, scratch.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_plan_ = fftw_plan_dft_2d(n, n, scratch.ptr, scratch.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
}

Spectral::~Spectral() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void Spectral::execute(std::complex<double>* data, bool inverse) const {
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(inverse ? backward_plan_ : forward_plan_), d, d);
}

ComplexVector Spectral::forward(const Eigen::VectorXd& values) const {
    const int size = grid_.size();
    FftwBuffer buf(size);
    for (int i = 0; i < size; ++i) buf.data()[i] = values[i];
    execute(buf.data(), false);
    ComplexVector out(size);
    for (int i = 0; i < size; ++i) out[i] = buf.data()[i];
    return out;
}

ComplexVector Spectral::backward_complex(const ComplexVector& coeffs) const {
    const int size = grid_.size();
    FftwBuffer buf(size);
    for (int i = 0; i < size; ++i) buf.data()[i] = coeffs[i];
    execute(buf.data(), true);
    ComplexVector out(size);
    for (int i = 0; i < size; ++i) out[i] = buf.data()[i] / static_cast<double>(size);
    return out;
}

Eigen::VectorXd Spectral::backward(const ComplexVector& coeffs) const {
    return backward_complex(coeffs).real();
}

ComplexMatrix Spectral::forward_columns(const Eigen::MatrixXd& values) const {
    ComplexMatrix out(values.rows(), values.cols());
    for (int j = 0; j < values.cols(); ++j) out.col(j) = forward(values.col(j));
    return out;
}

Eigen::MatrixXd Spectral::backward_columns(const ComplexMatrix& coeffs) const {
    Eigen::MatrixXd out(coeffs.rows(), coeffs.cols());
    for (int j = 0; j < coeffs.cols(); ++j) out.col(j) = backward(coeffs.col(j));
    return out;
}

double Spectral::wavenumber(int flat, int dim) const {
    const MultiIndex idx = grid_.multi_index(flat);
    return k1d_[idx[dim]];
}

double Spectral::wavenumber_norm(int flat) const {
    double sum = 0.0;
    for (int d = 0; d < grid_.n_dim(); ++d) sum += std::pow(wavenumber(flat, d), 2);
    return std::sqrt(sum);
}

double Spectral::difference_symbol(int flat) const {
    const double h = grid_.spacing();
    double sum = 0.0;
    for (int d = 0; d < grid_.n_dim(); ++d)
        sum += std::pow(2.0 / h * std::sin(0.5 * wavenumber(flat, d) * h), 2);
    return sum;
}

// The Nyquist slot is dropped from odd derivatives so real data stays real.
Eigen::VectorXd Spectral::derivative(const Eigen::VectorXd& values, int dim) const {
    ComplexVector c = forward(values);
    const int half = grid_.points_per_dim() / 2;
    for (int i = 0; i < c.size(); ++i) {
        if (grid_.multi_index(i)[dim] == half)
            c[i] = 0.0;
        else
            c[i] *= std::complex<double>(0.0, wavenumber(i, dim));
    }
    return backward(c);
}

Eigen::VectorXd Spectral::second_derivative(const Eigen::VectorXd& values, int dim_a, int dim_b) const {
    if (dim_a != dim_b) return derivative(derivative(values, dim_a), dim_b);
    ComplexVector c = forward(values);
    for (int i = 0; i < c.size(); ++i) c[i] *= -std::pow(wavenumber(i, dim_a), 2);
    return backward(c);
}

Eigen::VectorXd Spectral::laplacian(const Eigen::VectorXd& values) const {
    ComplexVector c = forward(values);
    for (int i = 0; i < c.size(); ++i) c[i] *= -std::pow(wavenumber_norm(i), 2);
    return backward(c);
}

Eigen::MatrixXd Spectral::derivative_columns(const Eigen::MatrixXd& values, int dim) const {
    Eigen::MatrixXd out(values.rows(), values.cols());
    for (int j = 0; j < values.cols(); ++j) out.col(j) = derivative(values.col(j), dim);
    return out;
}

double Spectral::interpolate(const ComplexVector& coeffs, const Point& x) const {
    const int n = grid_.points_per_dim();
    const int half = n / 2;
    double sum = 0.0;
    if (grid_.n_dim() == 1) {
        for (int i = 0; i < n; ++i) {
            // Symmetrize the Nyquist slot: cos instead of a one-sided exponential.
            if (i == half) {
                sum += (coeffs[i] * std::cos(k1d_[i] * x[0])).real();
                continue;
            }
            sum += (coeffs[i] * std::polar(1.0, k1d_[i] * x[0])).real();
        }
        return sum / n;
    }
    std::vector<std::complex<double>> e0(n), e1(n);
    for (int i = 0; i < n; ++i) {
        e0[i] = i == half ? std::complex<double>(std::cos(k1d_[i] * x[0])) : std::polar(1.0, k1d_[i] * x[0]);
        e1[i] = i == half ? std::complex<double>(std::cos(k1d_[i] * x[1])) : std::polar(1.0, k1d_[i] * x[1]);
    }
    for (int a = 0; a < n; ++a) {
        std::complex<double> row = 0.0;
        for (int b = 0; b < n; ++b) row += coeffs[a * n + b] * e1[b];
        sum += (row * e0[a]).real();
    }
    return sum / (static_cast<double>(n) * n);
}

std::array<double, 2> Spectral::interpolate_gradient(const ComplexVector& coeffs, const Point& x) const {
    const int n = grid_.points_per_dim();
    const int half = n / 2;
    const std::complex<double> I(0.0, 1.0);
    std::array<double, 2> grad{0.0, 0.0};
    if (grid_.n_dim() == 1) {
        for (int i = 0; i < n; ++i) {
            if (i == half) continue;
            grad[0] += (coeffs[i] * I * k1d_[i] * std::polar(1.0, k1d_[i] * x[0])).real();
        }
        grad[0] /= n;
        return grad;
    }
    std::vector<std::complex<double>> e0(n), e1(n), d0(n), d1(n);
    for (int i = 0; i < n; ++i) {
        e0[i] = i == half ? std::complex<double>(std::cos(k1d_[i] * x[0])) : std::polar(1.0, k1d_[i] * x[0]);
        e1[i] = i == half ? std::complex<double>(std::cos(k1d_[i] * x[1])) : std::polar(1.0, k1d_[i] * x[1]);
        d0[i] = i == half ? 0.0 : I * k1d_[i] * e0[i];
        d1[i] = i == half ? 0.0 : I * k1d_[i] * e1[i];
    }
    for (int a = 0; a < n; ++a) {
        std::complex<double> row = 0.0, drow = 0.0;
        for (int b = 0; b < n; ++b) {
            row += coeffs[a * n + b] * e1[b];
            drow += coeffs[a * n + b] * d1[b];
        }
        grad[0] += (row * d0[a]).real();
        grad[1] += (drow * e0[a]).real();
    }
    const double norm = static_cast<double>(n) * n;
    grad[0] /= norm;
    grad[1] /= norm;
    return grad;
}

}  // namespace fbp
