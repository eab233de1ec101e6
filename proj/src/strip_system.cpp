#include "fbp/strip_system.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "fbp/error.hpp"

namespace fbp {

OperatorC::OperatorC(const YGrid& y) : y_(y) {}

Eigen::MatrixXd OperatorC::dense() const {
    const int m = y_.interior();
    const double inv_h2 = 1.0 / (y_.spacing() * y_.spacing());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        c(j, j) = 2.0 * inv_h2;
        if (j > 0) c(j, j - 1) = -inv_h2;
        if (j + 1 < m) c(j, j + 1) = -inv_h2;
    }
    c(m - 1, m - 2) = -2.0 / 3.0 * inv_h2;
    c(m - 1, m - 1) = 2.0 / 3.0 * inv_h2;
    return c;
}

Eigen::VectorXd OperatorC::eigenvalues() const {
    // The matrix is diagonally similar to a symmetric one, so the spectrum is real.
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense(), false);
    Eigen::VectorXd ev = es.eigenvalues().real();
    std::sort(ev.data(), ev.data() + ev.size());
    return ev;
}

StripSystem::StripSystem(const XGrid& x, const YGrid& y, StripCoefficients coeffs)
    : x_(x), y_(y), coeffs_(std::move(coeffs)) {
    require(coeffs_.kappa.size() == x.size(), "StripSystem: kappa has wrong size");
    const int m = y.interior();
    const int nx = x.size();
    const double h = y.spacing();
    const double hx2 = x.spacing() * x.spacing();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nx) * m * (3 + 2 * x.n_dim()));
    for (int ix = 0; ix < nx; ++ix) {
        const double kappa = coeffs_.kappa[ix];
        for (int j = 1; j <= m; ++j) {
            const int row = ix * m + j - 1;
            const double yj = y.node(j);
            double center = coeffs_.shift + coeffs_.x_diffusion * 2.0 * x.n_dim() / hx2 + 2.0 * kappa / (h * h);
            double lower = -kappa / (h * h) + coeffs_.drift * yj / (2.0 * h);
            const double upper = -kappa / (h * h) - coeffs_.drift * yj / (2.0 * h);
            for (int d = 0; d < x.n_dim(); ++d)
                for (int off : {-1, 1})
                    triplets.emplace_back(row, x.neighbor(ix, d, off) * m + j - 1, -coeffs_.x_diffusion / hx2);
            if (j == m) {
                center += upper * 4.0 / 3.0;
                lower -= upper / 3.0;
            } else {
                triplets.emplace_back(row, row + 1, upper);
            }
            if (j > 1) triplets.emplace_back(row, row - 1, lower);
            triplets.emplace_back(row, row, center);
        }
    }
    matrix_.resize(nx * m, nx * m);
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
    matrix_.makeCompressed();
    factor_ = std::make_shared<Factorization>();
}

Slice StripSystem::apply(const Slice& u) const {
    const int m = y_.interior();
    const double h = y_.spacing();
    Slice lap = difference_laplacian(u, x_);
    Slice out = Slice::Zero(u.rows(), u.cols());
    for (int ix = 0; ix < u.rows(); ++ix) {
        for (int j = 1; j <= m; ++j) {
            const double uyy = (u(ix, j + 1) - 2.0 * u(ix, j) + u(ix, j - 1)) / (h * h);
            const double uy = (u(ix, j + 1) - u(ix, j - 1)) / (2.0 * h);
            out(ix, j) = coeffs_.shift * u(ix, j) - coeffs_.x_diffusion * lap(ix, j) -
                         coeffs_.kappa[ix] * uyy - coeffs_.drift * y_.node(j) * uy;
        }
    }
    return out;
}

Slice StripSystem::solve(const Slice& f, const Eigen::VectorXd& bottom, const Eigen::VectorXd& slope) const {
    const int m = y_.interior();
    const int nx = x_.size();
    const double h = y_.spacing();
    Eigen::VectorXd rhs(nx * m);
    for (int ix = 0; ix < nx; ++ix) {
        const double kappa = coeffs_.kappa[ix];
        for (int j = 1; j <= m; ++j) rhs[ix * m + j - 1] = f(ix, j);
        const double lower = -kappa / (h * h) + coeffs_.drift * y_.node(1) / (2.0 * h);
        const double upper = -kappa / (h * h) - coeffs_.drift * y_.node(m) / (2.0 * h);
        rhs[ix * m] -= lower * bottom[ix];
        rhs[ix * m + m - 1] -= upper * 2.0 * h * slope[ix] / 3.0;
    }
    std::call_once(factor_->once, [this] { factor_->lu.compute(matrix_); });
    if (factor_->lu.info() != Eigen::Success) throw ConvergenceError("StripSystem: factorization failed");
    Eigen::VectorXd sol = factor_->lu.solve(rhs);
    Slice u(nx, m + 2);
    for (int ix = 0; ix < nx; ++ix) {
        u(ix, 0) = bottom[ix];
        for (int j = 1; j <= m; ++j) u(ix, j) = sol[ix * m + j - 1];
        u(ix, m + 1) = (4.0 * u(ix, m) - u(ix, m - 1) + 2.0 * h * slope[ix]) / 3.0;
    }
    return u;
}

Slice difference_laplacian(const Slice& u, const XGrid& x) {
    const double hx2 = x.spacing() * x.spacing();
    Slice out(u.rows(), u.cols());
    for (int ix = 0; ix < u.rows(); ++ix) {
        out.row(ix) = -2.0 * x.n_dim() * u.row(ix);
        for (int d = 0; d < x.n_dim(); ++d)
            out.row(ix) += u.row(x.neighbor(ix, d, -1)) + u.row(x.neighbor(ix, d, 1));
    }
    return out / hx2;
}

Slice y_derivative(const Slice& u, const YGrid& y) {
    const int last = y.nodes() - 1;
    const double h = y.spacing();
    Slice out(u.rows(), u.cols());
    for (int j = 1; j < last; ++j) out.col(j) = (u.col(j + 1) - u.col(j - 1)) / (2.0 * h);
    out.col(0) = (-3.0 * u.col(0) + 4.0 * u.col(1) - u.col(2)) / (2.0 * h);
    out.col(last) = (3.0 * u.col(last) - 4.0 * u.col(last - 1) + u.col(last - 2)) / (2.0 * h);
    return out;
}

Slice y_second_derivative(const Slice& u, const YGrid& y) {
    const int last = y.nodes() - 1;
    const double h2 = y.spacing() * y.spacing();
    Slice out(u.rows(), u.cols());
    for (int j = 1; j < last; ++j) out.col(j) = (u.col(j + 1) - 2.0 * u.col(j) + u.col(j - 1)) / h2;
    out.col(0) = (2.0 * u.col(0) - 5.0 * u.col(1) + 4.0 * u.col(2) - u.col(3)) / h2;
    out.col(last) = (2.0 * u.col(last) - 5.0 * u.col(last - 1) + 4.0 * u.col(last - 2) - u.col(last - 3)) / h2;
    return out;
}

Eigen::VectorXd top_derivative(const Slice& u, const YGrid& y) {
    const int last = y.nodes() - 1;
    return (3.0 * u.col(last) - 4.0 * u.col(last - 1) + u.col(last - 2)) / (2.0 * y.spacing());
}

}  // namespace fbp
