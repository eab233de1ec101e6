#include "fbp/symbols.hpp"

#include <cmath>

#include "fbp/error.hpp"

namespace fbp {

namespace {

void check_y(double y) {
    require(y >= 0.0 && y <= 1.0, "symbol: y must lie in [0, 1], got " + std::to_string(y));
}

// Full-profile resolvent matrix: interior data -> m + 2 nodes.
Eigen::MatrixXd resolvent_matrix(double xi, const OperatorC& op) {
    const int m = op.size();
    Eigen::MatrixXd r(m + 2, m);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m + 2);
    for (int col = 0; col < m; ++col) {
        e.setZero();
        e[col + 1] = 1.0;
        r.col(col) = op.solve(xi * xi, 1.0, e, 0.0, 0.0);
    }
    return r;
}

double row_sum_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

double symbol_a(double xi, double y) {
    check_y(y);
    xi = std::abs(xi);
    return std::exp(-xi * y) * (1.0 + std::exp(-2.0 * xi * (1.0 - y))) / (1.0 + std::exp(-2.0 * xi));
}

double symbol_b(double xi, double y) {
    check_y(y);
    xi = std::abs(xi);
    if (xi < 1e-6) return y + xi * xi * (y * y * y / 6.0 - y / 2.0);
    return std::exp(xi * (y - 1.0)) * (-std::expm1(-2.0 * xi * y)) / (xi * (1.0 + std::exp(-2.0 * xi)));
}

SymbolEvaluation::SymbolEvaluation(double xi, const YGrid& y)
    : xi_norm(std::abs(xi)), a_values(y.nodes()), b_values(y.nodes()), op(y) {
    for (int j = 0; j < y.nodes(); ++j) {
        const double yj = std::min(1.0, y.node(j));
        a_values[j] = symbol_a(xi_norm, yj);
        b_values[j] = symbol_b(xi_norm, yj);
    }
}

Eigen::VectorXd SymbolEvaluation::resolvent(const Eigen::VectorXd& f) const {
    return op.solve(xi_norm * xi_norm, 1.0, f, 0.0, 0.0);
}

Eigen::VectorXd resolvent_c_apply(double xi, const Eigen::VectorXd& f, const YGrid& y) {
    require(f.size() == y.nodes(), "resolvent_c_apply: profile has wrong length");
    require(f.allFinite(), "resolvent_c_apply: non-finite data");
    return OperatorC(y).solve(xi * xi, 1.0, f, 0.0, 0.0);
}

Slice dilated_boundary_apply(Symbol which, double t, const Eigen::VectorXd& datum, const Spectral& spectral,
                             const YGrid& y, double c) {
    require(t > 0.0, "dilated_apply: t must be positive");
    require(which != Symbol::C, "dilated_boundary_apply: use dilated_resolvent_apply for c");
    const ComplexVector coeffs = spectral.forward(datum);
    ComplexMatrix out(coeffs.size(), y.nodes());
    for (int k = 0; k < coeffs.size(); ++k) {
        const double xi = t * c * spectral.wavenumber_norm(k);
        for (int j = 0; j < y.nodes(); ++j) {
            const double yj = std::min(1.0, y.node(j));
            const double profile = which == Symbol::A ? symbol_a(xi, yj) : t * symbol_b(xi, yj);
            out(k, j) = coeffs[k] * profile;
        }
    }
    return spectral.backward_columns(out);
}

Slice dilated_resolvent_apply(double t, const Slice& f, const Spectral& spectral, const YGrid& y, double c) {
    require(t > 0.0, "dilated_apply: t must be positive");
    const ComplexMatrix coeffs = spectral.forward_columns(f);
    ComplexMatrix out(coeffs.rows(), coeffs.cols());
    const OperatorC op(y);
    const double scale = t * t * c * c;
    for (int k = 0; k < coeffs.rows(); ++k) {
        const double xi = t * c * spectral.wavenumber_norm(k);
        const Eigen::VectorXcd profile = coeffs.row(k).transpose();
        out.row(k) = scale * op.solve(xi * xi, 1.0, profile, 0.0, 0.0).transpose();
    }
    return spectral.backward_columns(out);
}

std::vector<SymbolEstimate> symbol_class_estimate(Symbol which, int alpha, const std::vector<double>& xi_grid,
                                                  int target, const YGrid& y, int samples) {
    require(alpha >= 0 && alpha <= 2, "symbol_class_estimate: derivative order must be 0, 1 or 2");
    if (alpha >= 1)
        for (double xi : xi_grid)
            require(xi != 0.0, "symbol_class_estimate: xi grid must exclude 0 for derivatives");
    int m_order = 0;
    if (which == Symbol::B) {
        require(target == 0 || target == 1, "symbol_class_estimate: b target must be 0 or 1");
        m_order = target;
    } else if (which == Symbol::C) {
        require(target >= 0 && target <= 2, "symbol_class_estimate: c target must be 0, 1 or 2");
        m_order = target;
    }

    auto derivative = [alpha](auto&& eval, double xi) {
        const double step = 1e-3 * (1.0 + std::abs(xi));
        if (alpha == 0) return eval(xi);
        if (alpha == 1) return decltype(eval(xi))((eval(xi + step) - eval(xi - step)) / (2.0 * step));
        return decltype(eval(xi))((eval(xi + step) - 2.0 * eval(xi) + eval(xi - step)) / (step * step));
    };

    std::vector<SymbolEstimate> out;
    const OperatorC op(y);
    for (double xi : xi_grid) {
        SymbolEstimate est;
        est.xi = xi;
        if (which == Symbol::C) {
            const Eigen::MatrixXd r = derivative([&](double s) { return resolvent_matrix(s, op); }, xi);
            const Slice rows = r.transpose();
            double norm = row_sum_norm(r);
            if (target <= 1) norm += row_sum_norm(y_derivative(rows, y).transpose());
            if (target == 0) norm += row_sum_norm(y_second_derivative(rows, y).transpose());
            est.norm = norm;
        } else {
            auto profile = [&](double s) {
                Eigen::VectorXd v(samples);
                for (int i = 0; i < samples; ++i) {
                    const double yi = static_cast<double>(i) / (samples - 1);
                    v[i] = which == Symbol::A ? symbol_a(s, yi) : symbol_b(s, yi);
                }
                return v;
            };
            const Eigen::VectorXd d = derivative(profile, xi);
            Eigen::Index peak = 0;
            double norm = d.cwiseAbs().maxCoeff(&peak);
            est.peak_location = static_cast<double>(peak) / (samples - 1);
            if (which == Symbol::B && target == 0) {
                const double hy = 1.0 / (samples - 1);
                double slope = 0.0;
                for (int i = 0; i + 1 < samples; ++i) slope = std::max(slope, std::abs(d[i + 1] - d[i]) / hy);
                norm += slope;
            }
            est.norm = norm;
        }
        est.weighted_sup = std::pow(1.0 + xi * xi, 0.5 * (m_order + alpha)) * est.norm;
        out.push_back(est);
    }
    return out;
}

}  // namespace fbp
