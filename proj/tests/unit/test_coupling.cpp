#include "doctest.h"

#include <cmath>

#include "fbp/coupling.hpp"
#include "fbp/fourier.hpp"
#include "fbp/parabolic.hpp"
#include "fbp/strip_system.hpp"

using namespace fbp;

namespace {

Grids coarse(double T, int nx = 16, int m = 8, int steps = 16) {
    GridConfig gc;
    gc.x_points = nx;
    gc.y_interior = m;
    gc.t0 = 1e-3;
    gc.horizon = T;
    gc.steps = steps;
    return make_grids(gc);
}

Eigen::VectorXd ripple(const XGrid& x, double amp) {
    return x.sample([amp](const Point& p) { return 1.0 + amp * std::sin(p[0]); });
}

SurfaceField flat(const Eigen::VectorXd& g, const std::vector<double>& levels) {
    SurfaceField s;
    s.times = levels;
    for (double t : levels) {
        s.values.push_back(t * g);
        s.dot_values.push_back(g);
    }
    return s;
}

// s = t g + delta t^2 cos x.
SurfaceField bent(const Eigen::VectorXd& g, const XGrid& x, const std::vector<double>& levels, double delta) {
    const Eigen::VectorXd c = x.sample([](const Point& p) { return std::cos(p[0]); });
    SurfaceField s;
    s.times = levels;
    for (double t : levels) {
        s.values.push_back(t * g + delta * t * t * c);
        s.dot_values.push_back(g + 2.0 * delta * t * c);
    }
    return s;
}

double sup(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

CouplingOptions quick() {
    CouplingOptions o;
    o.max_restarts = 0;
    return o;
}

}  // namespace

TEST_CASE("flat front leaves the model generator unperturbed") {
    const XGrid x(1, 16, 2 * M_PI);
    const YGrid y(8);
    const Spectral spectral(x);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(x.size(), 1.7);
    Slice u(x.size(), y.nodes());
    for (int i = 0; i < u.rows(); ++i)
        for (int j = 0; j < u.cols(); ++j) u(i, j) = std::sin(x.coord(i)) * (1.0 + y.node(j) * y.node(j));
    for (double t : {1e-3, 0.05, 0.4}) {
        const FrontLevel front = FrontLevel::from_samples(t, t * g, g, spectral);
        for (int eps : {0, 1}) {
            const FrontPerturbation p(front, g, x, y, spectral, eps);
            CHECK(sup(p.apply(u)) < 1e-12 * sup(u) / (t * t));
            CHECK(p.relative_diffusion_defect() < 1e-14);
        }
    }
}

TEST_CASE("flux of the flat front with u = g is -g^2 (1 + g)") {
    const XGrid x(1, 8, 2 * M_PI);
    const Spectral spectral(x);
    for (double g0 : {0.5, 1.0, 2.0}) {
        const Eigen::VectorXd g = Eigen::VectorXd::Constant(x.size(), g0);
        const FrontLevel front = FrontLevel::from_samples(0.01, 0.01 * g, g, spectral);
        const std::array<Eigen::VectorXd, 2> zero_grad{Eigen::VectorXd::Zero(x.size()), Eigen::VectorXd()};
        const Eigen::VectorXd h = boundary_flux(front, g, zero_grad, 1);
        CHECK(sup(h.array() + g0 * g0 * (1.0 + g0)) < 1e-13);
        CHECK(sup(boundary_flux(front, Eigen::VectorXd::Zero(x.size()), zero_grad, 1)) == 0.0);
        // Without the quadratic term the flux is linear in u.
        CHECK(sup(boundary_flux(front, g, zero_grad, 0).array() + g0 * g0) < 1e-13);
    }
}

TEST_CASE("flux with a tilted front matches the direct formula") {
    const XGrid x(1, 32, 2 * M_PI);
    const Spectral spectral(x);
    const double t = 0.02;
    const Eigen::VectorXd s = x.sample([t](const Point& p) { return t * (1.0 + 0.3 * std::sin(p[0])); });
    const Eigen::VectorXd u = x.sample([](const Point& p) { return 1.0 + 0.2 * std::cos(2 * p[0]); });
    const FrontLevel front = FrontLevel::from_samples(t, s, s / t, spectral);
    const std::array<Eigen::VectorXd, 2> du{spectral.derivative(u, 0), Eigen::VectorXd()};
    const Eigen::VectorXd h = boundary_flux(front, u, du, 1);
    double worst = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double xi = x.coord(i);
        const double sx = 0.3 * t * std::cos(xi);
        const double ux = -0.4 * std::sin(2 * xi);
        const double ui = u[i];
        const double expected =
            (s[i] / t) * (sx * ux / (1 + sx * sx) - ui * (1 + ui) / std::sqrt(1 + sx * sx));
        worst = std::max(worst, std::abs(h[i] - expected));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("front perturbation is second-order consistent in y") {
    // Manufactured u and front with the operator written out symbolically.
    const double t = 0.05, a = 0.2, b = 0.5;
    auto error_for = [&](int m) {
        const XGrid x(1, 32, 2 * M_PI);
        const YGrid y(m);
        const Spectral spectral(x);
        const Eigen::VectorXd g = ripple(x, a);
        const Eigen::VectorXd s =
            x.sample([&](const Point& p) { return t * (1 + a * std::sin(p[0])) + b * t * t * std::cos(p[0]); });
        const Eigen::VectorXd sdot =
            x.sample([&](const Point& p) { return (1 + a * std::sin(p[0])) + 2 * b * t * std::cos(p[0]); });
        Slice u(x.size(), y.nodes());
        for (int i = 0; i < u.rows(); ++i)
            for (int j = 0; j < u.cols(); ++j) {
                const double xi = x.coord(i), eta = y.node(j);
                u(i, j) = std::cos(xi) * eta * eta + std::sin(xi + eta);
            }
        const FrontPerturbation p(FrontLevel::from_samples(t, s, sdot, spectral), g, x, y, spectral, 1);
        const Slice got = p.apply(u);
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i < u.rows(); ++i)
            for (int j = 1; j <= m; ++j) {
                const double xi = x.coord(i), eta = y.node(j);
                const double sx = a * t * std::cos(xi) - b * t * t * std::sin(xi);
                const double sxx = -a * t * std::sin(xi) - b * t * t * std::cos(xi);
                const double uy = 2 * eta * std::cos(xi) + std::cos(xi + eta);
                const double uyy = 2 * std::cos(xi) - std::sin(xi + eta);
                const double uxy = -2 * eta * std::sin(xi) - std::sin(xi + eta);
                const double si = s[i], gi = g[i];
                const double expected = ((1 + eta * eta * sx * sx) / (si * si) - 1 / (t * t * gi * gi)) * uyy +
                                        eta * (sdot[i] / si - 1 / t) * uy - 2 * eta / si * sx * uxy -
                                        eta * (si * sxx - 2 * sx * sx) / (si * si) * uy;
                worst = std::max(worst, std::abs(got(i, j) - expected));
                scale = std::max(scale, std::abs(expected));
            }
        return worst / scale;
    };
    const double coarse_err = error_for(16), fine_err = error_for(32);
    CHECK(coarse_err < 1e-2);
    CHECK(std::log2(coarse_err / fine_err) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("modified Dirichlet lift equals the plain lift plus a drift correction") {
    const XGrid x(1, 16, 2 * M_PI);
    const YGrid y(12);
    const Eigen::VectorXd g = ripple(x, 0.2);
    const GeneratorFamily plain(x, y, g, false), modified(x, y, g, true);
    for (double t : {0.002, 0.05}) {
        const Slice rd = plain.dirichlet(t, g);
        Slice drift = y_derivative(rd, y);
        for (int j = 0; j < y.nodes(); ++j) drift.col(j) *= y.node(j) / t;
        drift.col(0).setZero();
        drift.col(y.nodes() - 1).setZero();
        const Slice corrected = rd + modified.solve(t, 0.0, drift);
        CHECK(sup(corrected - modified.dirichlet(t, g)) < 1e-10 * sup(g));
    }
}

TEST_CASE("inner iteration on x-independent data stays x-independent") {
    const Grids grids = coarse(0.05);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(grids.x.size(), 1.3);
    const InnerSolution sol = phi1(flat(g, grids.time.levels()), g, grids, quick());
    for (const Slice& u : sol.u.slices) {
        CHECK(sup(u.col(0) - g) == 0.0);
        const Eigen::RowVectorXd first = u.row(0);
        CHECK(sup(u.rowwise() - first) < 1e-12);
    }
    CHECK(sol.contraction < 1.0);
}

TEST_CASE("inner contraction shrinks with the horizon") {
    const double wide = phi1(flat(ripple(coarse(0.1).x, 0.1), coarse(0.1).time.levels()), ripple(coarse(0.1).x, 0.1),
                             coarse(0.1), quick())
                            .contraction;
    const Grids g2 = coarse(0.025);
    const Eigen::VectorXd g = ripple(g2.x, 0.1);
    const double narrow = phi1(flat(g, g2.time.levels()), g, g2, quick()).contraction;
    CHECK(wide < 1.0);
    CHECK(narrow < 0.7 * wide);
}

TEST_CASE("trace of the inner solution is Lipschitz in the front") {
    const Grids grids = coarse(0.05);
    const Eigen::VectorXd g = ripple(grids.x, 0.1);
    const Spectral spectral(grids.x);
    const auto& levels = grids.time.levels();
    const SurfaceField base = flat(g, levels);
    const InnerSolution u0 = phi1(base, g, grids, quick());
    auto quotient = [&](double delta) {
        const SurfaceField s = bent(g, grids.x, levels, delta);
        const InnerSolution u1 = phi1(s, g, grids, quick());
        double du = 0.0;
        for (int k = 0; k < u0.u.levels(); ++k)
            du = std::max(du, sup(u1.u.slices[k].col(grids.y.nodes() - 1) - u0.u.slices[k].col(grids.y.nodes() - 1)));
        SurfaceField ds;
        ds.times = levels;
        for (int k = 0; k < s.levels(); ++k) {
            ds.values.push_back(s.values[k] - base.values[k]);
            ds.dot_values.push_back(s.dot_values[k] - base.dot_values[k]);
        }
        return du / front_norm(ds, spectral, 0.5);
    };
    const double q1 = quotient(0.4), q2 = quotient(0.2);
    CHECK(q1 > 0.0);
    CHECK(q2 == doctest::Approx(q1).epsilon(0.2));
}

TEST_CASE("coupled solve with constant data") {
    const Grids grids = coarse(0.05);
    const Eigen::VectorXd g = Eigen::VectorXd::Ones(grids.x.size());
    int lines = 0;
    const CoupledState st = solve_fbp(g, grids, quick(), [&](const IterationRecord&) { ++lines; });
    CHECK(st.converged);
    CHECK(lines == static_cast<int>(st.log.size()));
    CHECK(st.outer_contraction < 1.0);
    CHECK(st.inner_contraction < 1.0);
    for (int k = 0; k < st.s.levels(); ++k) {
        // The front stays flat and advances at the trace speed, up to the
        // last outer update.
        CHECK(sup(st.s.values[k].array() - st.s.values[k][0]) < 1e-12);
        CHECK(sup(st.s.dot_values[k] - st.u.slices[k].col(grids.y.nodes() - 1)) < 1e-7);
    }
    CHECK(std::abs(st.s.dot_values[0][0] - 1.0) < 5e-3);
}

TEST_CASE("coupled solve with a ripple, both regimes") {
    const Grids grids = coarse(0.05);
    const Eigen::VectorXd g = ripple(grids.x, 0.1);
    for (int eps : {1, 0}) {
        CouplingOptions o = quick();
        o.epsilon = eps;
        const CoupledState st = solve_fbp(g, grids, o);
        CHECK(st.converged);
        CHECK(st.restarts == 0);
        CHECK(st.outer_contraction < 0.5);
        for (int k = 0; k < st.u.levels(); ++k) {
            CHECK(sup(st.u.slices[k].col(0) - g) == 0.0);
            CHECK(sup(st.u.slices[k] - st.dirichlet.slices[k] - st.neumann.slices[k] - st.v.slices[k]) < 1e-12);
        }
        CHECK(sup(st.s.dot_values[0] - g) < 5e-3);
    }
}

TEST_CASE("outer contraction shrinks with the horizon") {
    CouplingOptions o = quick();
    const Grids wide = coarse(0.1), narrow = coarse(0.025);
    const double a = solve_fbp(ripple(wide.x, 0.1), wide, o).outer_contraction;
    const double b = solve_fbp(ripple(narrow.x, 0.1), narrow, o).outer_contraction;
    CHECK(a < 1.0);
    CHECK(b < 0.7 * a);
}

TEST_CASE("shifting the data by one cell shifts the solution") {
    const Grids grids = coarse(0.025);
    const int n = grids.x.size();
    const Eigen::VectorXd g = grids.x.sample([](const Point& p) { return 1.0 + 0.1 * std::sin(p[0]) + 0.05 * std::cos(3 * p[0]); });
    Eigen::VectorXd shifted(n);
    for (int i = 0; i < n; ++i) shifted[(i + 1) % n] = g[i];
    const CoupledState a = solve_fbp(g, grids, quick());
    const CoupledState b = solve_fbp(shifted, grids, quick());
    double worst_u = 0.0, worst_s = 0.0;
    for (int k = 0; k < a.u.levels(); ++k) {
        for (int i = 0; i < n; ++i) {
            worst_u = std::max(worst_u, sup(a.u.slices[k].row(i) - b.u.slices[k].row((i + 1) % n)));
            worst_s = std::max(worst_s, std::abs(a.s.values[k][i] - b.s.values[k][(i + 1) % n]));
        }
    }
    CHECK(worst_u < 1e-8);
    CHECK(worst_s < 1e-10);
}

TEST_CASE("decomposition summands scale like t^0, t^1 and t^2") {
    const Grids grids = coarse(0.05, 16, 8, 32);
    const CoupledState st = solve_fbp(ripple(grids.x, 0.1), grids, quick());
    const DecompositionReport r = decomposition_report(st, 4 * grids.time.t0(), grids.time.horizon());
    CHECK(std::abs(r.dirichlet_slope) < 0.05);
    CHECK(r.neumann_slope == doctest::Approx(1.0).epsilon(0.3));
    CHECK(r.remainder_slope == doctest::Approx(2.0).epsilon(0.15));
    CHECK(r.times.size() == st.u.times.size());
}

TEST_CASE("decomposition of constant data skips vanishing summands") {
    const Grids grids = coarse(0.025);
    const CoupledState st = solve_fbp(Eigen::VectorXd::Ones(grids.x.size()), grids, quick());
    const DecompositionReport r = decomposition_report(st, 0.0, 1.0);
    // R_D g - g vanishes identically for constant g.
    CHECK(std::isnan(r.dirichlet_defect_slope));
    CHECK(std::isfinite(r.remainder_slope));
    CHECK_THROWS_AS(decomposition_report(st, 1.0, 2.0), DomainError);
}

TEST_CASE("contraction estimate ignores the round-off tail") {
    CHECK(contraction_estimate({1.0, 0.5, 0.1, 1e-9, 2e-9}, 1e-8) == doctest::Approx(0.5));
    CHECK(contraction_estimate({1.0}, 0.0) == 0.0);
}

TEST_CASE("strip and front norms") {
    const Grids grids = coarse(0.05);
    StripField zero = StripField::zeros(grids.x, grids.y, grids.time.levels());
    CHECK(strip_norm(zero, grids.x, grids.y, 0.5) == 0.0);
    StripField one = zero;
    for (Slice& s : one.slices) s.setConstant(2.0);
    // Constant in time and space: the sup part plus the seminorm of 2 t^(1/2),
    // which peaks on the pair (t0, T).
    const double t0 = grids.time.t0(), T = grids.time.horizon();
    const double weighted = 2.0 * std::sqrt((std::sqrt(T) - std::sqrt(t0)) / (std::sqrt(T) + std::sqrt(t0)));
    CHECK(strip_norm(one, grids.x, grids.y, 0.5) == doctest::Approx(2.0 + weighted));
    const Spectral spectral(grids.x);
    const SurfaceField s = flat(Eigen::VectorXd::Ones(grids.x.size()), grids.time.levels());
    const double n = front_norm(s, spectral, 0.5);
    // s = t: sup t = T, Holder seminorm (T - t0)^(1/2); s' = 1.
    CHECK(n == doctest::Approx(T + std::sqrt(T - t0) + 1.0));
}

TEST_CASE("invalid inputs") {
    const Grids grids = coarse(0.05);
    const Eigen::VectorXd g = Eigen::VectorXd::Ones(grids.x.size());
    CouplingOptions o = quick();
    o.epsilon = 2;
    CHECK_THROWS_AS(phi1(flat(g, grids.time.levels()), g, grids, o), DomainError);
    CHECK_THROWS_AS(solve_fbp(-g, grids, quick()), DomainError);
}
