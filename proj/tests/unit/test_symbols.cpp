#include "doctest.h"

#include <cmath>

#include "fbp/error.hpp"
#include "fbp/holder.hpp"
#include "fbp/symbols.hpp"

using namespace fbp;

TEST_CASE("closed-form values") {
    CHECK(symbol_a(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    for (double xi : {0.0, 0.3, 5.0, 700.0}) CHECK(symbol_a(xi, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    // Reference values from 30-digit evaluation of 1/cosh(2) and tanh(1).
    CHECK(std::abs(symbol_a(2.0, 1.0) - 0.265802228834079692) < 1e-15);
    CHECK(std::abs(symbol_b(1.0, 1.0) - 0.761594155955764888) < 1e-15);
    for (double y : {0.0, 0.25, 1.0}) CHECK(symbol_b(1e-9, y) == doctest::Approx(y).epsilon(1e-14));
    CHECK(symbol_b(0.0, 0.4) == doctest::Approx(0.4));
    CHECK(symbol_b(3.0, 0.0) == 0.0);
    CHECK(std::isfinite(symbol_a(1e4, 0.5)));
    CHECK(std::isfinite(symbol_b(1e4, 1.0)));
    CHECK(symbol_b(1e4, 1.0) == doctest::Approx(1e-4));
    CHECK_THROWS_AS(symbol_a(1.0, 1.5), DomainError);
    CHECK_THROWS_AS(symbol_b(1.0, -0.1), DomainError);
}

TEST_CASE("symbol relations hold to second order") {
    for (double xi : {0.0, 1.0, 2.0, 10.0}) {
        std::vector<double> errors;
        for (int m : {80, 160}) {
            const YGrid y(m);
            const double h = y.spacing();
            double err = 0.0;
            for (int j = 1; j <= m; ++j) {
                const double yj = y.node(j);
                const double db = (symbol_b(xi, yj + h) - symbol_b(xi, yj - h)) / (2.0 * h);
                const double d2a = (symbol_a(xi, yj + h) - 2.0 * symbol_a(xi, yj) + symbol_a(xi, yj - h)) / (h * h);
                const double d2b = (symbol_b(xi, yj + h) - 2.0 * symbol_b(xi, yj) + symbol_b(xi, yj - h)) / (h * h);
                const double da = (symbol_a(xi, yj + h) - symbol_a(xi, yj - h)) / (2.0 * h);
                err = std::max({err, std::abs(db - symbol_a(xi, 1.0 - yj)), std::abs(d2a - xi * xi * symbol_a(xi, yj)),
                                std::abs(d2b - xi * xi * symbol_b(xi, yj)),
                                std::abs(da + xi * xi * symbol_b(xi, 1.0 - yj))});
            }
            errors.push_back(err);
        }
        if (errors[0] > 1e-10) CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.1));
        CHECK(errors[1] < 1e-2 * (1.0 + std::pow(xi, 4)));
    }
}

TEST_CASE("tanh tail") {
    for (double s = 1.0; s < 300.0; s *= 1.3) CHECK(std::abs(std::tanh(s) - 1.0) <= 2.0 * std::exp(-2.0 * s) * (1.0 + 1e-12) + 4e-16);
}

TEST_CASE("operator C") {
    const OperatorC c{YGrid(16)};
    const Eigen::VectorXd ev = c.eigenvalues();
    CHECK(ev.minCoeff() > 0.0);
    // Lowest eigenvalue approximates (pi/2)^2.
    CHECK(ev[0] == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-2));
}

TEST_CASE("resolvent") {
    const YGrid y(32);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(y.nodes());
    const Eigen::VectorXd u0 = resolvent_c_apply(0.0, one, y);
    for (int j = 0; j < y.nodes(); ++j) CHECK(std::abs(u0[j] - (y.node(j) - 0.5 * y.node(j) * y.node(j))) < 1e-12);
    CHECK(resolvent_c_apply(3.0, Eigen::VectorXd::Zero(y.nodes()), y).cwiseAbs().maxCoeff() == 0.0);

    std::vector<double> errors;
    for (int m : {32, 64}) {
        const YGrid yy(m);
        const Eigen::VectorXd u1 = resolvent_c_apply(1.0, Eigen::VectorXd::Ones(yy.nodes()), yy);
        double err = 0.0;
        for (int j = 0; j < yy.nodes(); ++j)
            err = std::max(err, std::abs(u1[j] - (1.0 - std::cosh(1.0 - yy.node(j)) / std::cosh(1.0))));
        errors.push_back(err);
    }
    CHECK(errors[1] < 1e-4);
    CHECK(errors[0] / errors[1] > 3.5);

    const SymbolEvaluation ev(2.5, y);
    CHECK(ev.a_values[0] == 1.0);
    CHECK(ev.b_values[0] == 0.0);
}

TEST_CASE("dilated application") {
    const XGrid x(1, 32, 2.0 * M_PI);
    const Spectral sp(x);
    const YGrid y(16);
    const double t = 0.3;
    const Eigen::VectorXd mode = x.sample([](const Point& p) { return std::cos(4.0 * p[0]); });
    const Slice a = dilated_boundary_apply(Symbol::A, t, mode, sp, y);
    for (int i = 0; i < x.size(); i += 5)
        for (int j = 0; j < y.nodes(); ++j)
            CHECK(a(i, j) == doctest::Approx(symbol_a(t * 4.0, std::min(1.0, y.node(j))) * mode[i]).epsilon(1e-11));
    CHECK(dilated_boundary_apply(Symbol::B, t, Eigen::VectorXd::Zero(x.size()), sp, y).cwiseAbs().maxCoeff() == 0.0);
    const Slice f = Slice::Constant(x.size(), y.nodes(), 2.0);
    const Slice c = dilated_resolvent_apply(t, f, sp, y);
    for (int j = 0; j < y.nodes(); ++j)
        CHECK(c(7, j) == doctest::Approx(t * t * 2.0 * (y.node(j) - 0.5 * y.node(j) * y.node(j))).epsilon(1e-10));
    CHECK_THROWS_AS(dilated_resolvent_apply(0.0, f, sp, y), DomainError);
}

TEST_CASE("symbol class estimates") {
    const YGrid y(32);
    const auto a0 = symbol_class_estimate(Symbol::A, 0, {0.0, 1.0, 10.0}, 0, y);
    for (const auto& e : a0) {
        CHECK(e.weighted_sup == doctest::Approx(1.0));
        CHECK(e.peak_location == 0.0);
    }
    CHECK_THROWS_AS(symbol_class_estimate(Symbol::A, 1, {0.0, 1.0}, 0, y), DomainError);

    const std::vector<double> xi{4.0, 8.0, 16.0, 32.0};
    const auto c0 = symbol_class_estimate(Symbol::C, 0, xi, 2, y);
    std::vector<double> norms;
    for (const auto& e : c0) norms.push_back(e.norm);
    CHECK(loglog_slope(xi, norms) == doctest::Approx(-2.0).epsilon(0.05));
    double weighted_max = 0.0;
    for (const auto& e : c0) weighted_max = std::max(weighted_max, e.weighted_sup);
    CHECK(weighted_max < 2.0);

    const auto a1 = symbol_class_estimate(Symbol::A, 1, {20.0, 40.0, 80.0}, 0, y, 20001);
    for (const auto& e : a1) {
        CHECK(e.peak_location * e.xi > 0.5);
        CHECK(e.peak_location * e.xi < 2.0);
    }
    const auto b1 = symbol_class_estimate(Symbol::B, 1, {1.0, 10.0, 100.0}, 1, y);
    for (const auto& e : b1) CHECK(e.weighted_sup < 5.0);
}

TEST_CASE("dilation is Lipschitz with weight") {
    // t -> sigma_t a applied to a fixed mode, sampled at one point; weighted
    // Lipschitz seminorm stays bounded as the time grid is refined.
    std::vector<double> seminorms;
    for (int n : {20, 80}) {
        std::vector<double> t;
        std::vector<double> v;
        for (int k = 0; k <= n; ++k) {
            const double s = 1e-3 + (1.0 - 1e-3) * std::pow(static_cast<double>(k) / n, 2.0);
            t.push_back(s);
            v.push_back(symbol_a(s * 6.0, 0.2));
        }
        HolderParams p;
        p.lipschitz = true;
        p.gamma = 1.0;
        seminorms.push_back(singular_holder_norm(t, v, p).weighted_seminorm);
    }
    CHECK(std::isfinite(seminorms[1]));
    CHECK(seminorms[1] < 2.0 * seminorms[0]);
}
