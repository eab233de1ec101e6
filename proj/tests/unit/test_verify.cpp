#include "doctest.h"

#include <cmath>

#include "fbp/coupling.hpp"
#include "fbp/verify.hpp"

using namespace fbp;

namespace {

constexpr double kAmp = 0.2;

// Manufactured pair: s = t (1 + a sin x)(1 + sin(10 t)/2), u = (1 + sin 10t) phi(x, y).
double front_at(double t, double x) { return t * (1 + kAmp * std::sin(x)) * (1 + 0.5 * std::sin(10 * t)); }
double front_rate(double t, double x) {
    return (1 + kAmp * std::sin(x)) * (1 + 0.5 * std::sin(10 * t) + 5 * t * std::cos(10 * t));
}
double amplitude(double t) { return 1 + std::sin(10 * t); }
double phi(double x, double y) { return std::cos(x) * y * y + std::sin(x + y); }

struct Manufactured {
    Grids grids;
    StripField u;
    SurfaceField s;
    Eigen::VectorXd g;
};

Manufactured manufacture(int m, int steps) {
    GridConfig gc;
    gc.x_points = 16;
    gc.y_interior = m;
    gc.t0 = 0.01;
    gc.horizon = 0.2;
    gc.steps = steps;
    gc.grading = 1.0;
    Manufactured out;
    out.grids = make_grids(gc);
    const XGrid& x = out.grids.x;
    const YGrid& y = out.grids.y;
    out.u.times = out.s.times = out.grids.time.levels();
    for (double t : out.u.times) {
        Slice w(x.size(), y.nodes());
        for (int i = 0; i < x.size(); ++i)
            for (int j = 0; j < y.nodes(); ++j) w(i, j) = amplitude(t) * phi(x.coord(i), y.node(j));
        out.u.slices.push_back(w);
        out.s.values.push_back(x.sample([t](const Point& p) { return front_at(t, p[0]); }));
        out.s.dot_values.push_back(x.sample([t](const Point& p) { return front_rate(t, p[0]); }));
    }
    out.g = x.sample([](const Point& p) { return phi(p[0], 0.0); });
    return out;
}

// Residuals of the continuous equations for the manufactured pair.
double exact_interior(double t, double x, double y) {
    const double a = amplitude(t), at = 10 * std::cos(10 * t);
    const double s = front_at(t, x), sdot = front_rate(t, x);
    const double time_factor = t * (1 + 0.5 * std::sin(10 * t));
    const double sx = time_factor * kAmp * std::cos(x), sxx = -time_factor * kAmp * std::sin(x);
    const double ut = at * phi(x, y);
    const double uxx = a * (-std::cos(x) * y * y - std::sin(x + y));
    const double uy = a * (2 * y * std::cos(x) + std::cos(x + y));
    const double uyy = a * (2 * std::cos(x) - std::sin(x + y));
    const double uxy = a * (-2 * y * std::sin(x) - std::sin(x + y));
    return s * s * (ut - uxx) - (1 + y * y * sx * sx) * uyy - y * s * sdot * uy + 2 * y * s * sx * uxy +
           y * (s * sxx - 2 * sx * sx) * uy;
}

double exact_stefan(double t, double x) {
    const double a = amplitude(t);
    const double s = front_at(t, x), sdot = front_rate(t, x);
    const double sx = t * (1 + 0.5 * std::sin(10 * t)) * kAmp * std::cos(x);
    const double u = a * phi(x, 1.0);
    const double ux = a * (-std::sin(x) + std::cos(x + 1.0));
    const double uy = a * (2 * std::cos(x) + std::cos(x + 1.0));
    return (1 + sx * sx) * uy / t + (s / t) * ((1 + u) * sdot - sx * ux);
}

double exact_front(double t, double x) {
    const double sx = t * (1 + 0.5 * std::sin(10 * t)) * kAmp * std::cos(x);
    return front_rate(t, x) - std::sqrt(1 + sx * sx) * amplitude(t) * phi(x, 1.0);
}

struct Deviation {
    double interior = 0.0, stefan = 0.0, front = 0.0, dirichlet = 0.0;
};

Deviation deviation(int m, int steps) {
    const Manufactured mf = manufacture(m, steps);
    const TransformedResiduals r = residual_transformed_system(mf.u, mf.s, mf.g, mf.grids.x, mf.grids.y, 1);
    Deviation d;
    const int n = static_cast<int>(r.times.size());
    // Interior levels, where the time differences are centered.
    for (int k = 1; k + 1 < n; ++k) {
        const double t = r.times[k];
        for (int i = 0; i < mf.grids.x.size(); ++i) {
            const double x = mf.grids.x.coord(i);
            for (int j = 1; j + 1 < mf.grids.y.nodes(); ++j)
                d.interior = std::max(d.interior, std::abs(r.interior.slices[k](i, j) - exact_interior(t, x, mf.grids.y.node(j))));
            d.stefan = std::max(d.stefan, std::abs(r.stefan[k][i] - exact_stefan(t, x)));
            d.front = std::max(d.front, std::abs(r.front[k][i] - exact_front(t, x)));
            d.dirichlet = std::max(d.dirichlet, std::abs(r.dirichlet[k][i] - (amplitude(t) - 1.0) * phi(x, 0.0)));
        }
    }
    return d;
}

}  // namespace

TEST_CASE("manufactured pair: residuals differ from the exact ones by discretization error") {
    const Deviation coarse = deviation(16, 20);
    const Deviation fine = deviation(32, 40);
    const Deviation finer = deviation(64, 80);
    for (const Deviation* d : {&coarse, &fine, &finer}) CHECK(d->dirichlet < 1e-14);
    CHECK(coarse.interior < 5e-3);
    CHECK(coarse.stefan < 0.1);
    CHECK(coarse.front < 5e-3);
    // Observed orders on the finest pair; the 1/t-scaled flux is still
    // pre-asymptotic at the coarse level.
    CHECK(std::log2(fine.interior / finer.interior) > 1.8);
    CHECK(std::log2(fine.stefan / finer.stefan) > 1.6);
    CHECK(std::log2(fine.front / finer.front) > 1.8);
    CHECK(coarse.stefan / fine.stefan > 2.5);
}

TEST_CASE("zero state has zero residual") {
    GridConfig gc;
    gc.x_points = 8;
    gc.y_interior = 6;
    gc.steps = 5;
    const Grids grids = make_grids(gc);
    const StripField u = StripField::zeros(grids.x, grids.y, grids.time.levels());
    SurfaceField s;
    s.times = grids.time.levels();
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        s.values.push_back(Eigen::VectorXd::Constant(grids.x.size(), 0.3));
        s.dot_values.push_back(Eigen::VectorXd::Zero(grids.x.size()));
    }
    const Eigen::VectorXd g = Eigen::VectorXd::Zero(grids.x.size());
    for (int eps : {0, 1}) {
        const TransformedResiduals r = residual_transformed_system(u, s, g, grids.x, grids.y, eps);
        CHECK(r.front_sup == 0.0);
        CHECK(r.stefan_sup == 0.0);
        CHECK(r.interior_sup == 0.0);
        CHECK(r.dirichlet_sup == 0.0);
    }
}

TEST_CASE("converged coupled state has small residuals that shrink under refinement") {
    auto run = [](int r) {
        GridConfig gc;
        gc.x_points = 16 * r;
        gc.y_interior = 8 * r;
        gc.t0 = 1e-3;
        gc.horizon = 0.05;
        gc.steps = 16 * r;
        const Grids grids = make_grids(gc);
        const Eigen::VectorXd g = grids.x.sample([](const Point& p) { return 1.0 + 0.1 * std::sin(p[0]); });
        return residual_transformed_system(solve_fbp(g, grids, CouplingOptions{}));
    };
    const TransformedResiduals coarse = run(1), fine = run(2);
    CHECK(coarse.dirichlet_sup == 0.0);
    CHECK(coarse.stefan_sup < 5e-3);
    CHECK(coarse.front_sup < 5e-3);
    CHECK(coarse.stefan_sup / fine.stefan_sup > 2.0);
    CHECK(coarse.front_sup / fine.front_sup > 2.0);
    CHECK(fine.interior_sup < coarse.interior_sup);
}

TEST_CASE("residual input checks") {
    GridConfig gc;
    gc.x_points = 8;
    gc.y_interior = 4;
    gc.steps = 1;
    const Grids grids = make_grids(gc);
    const StripField u = StripField::zeros(grids.x, grids.y, grids.time.levels());
    SurfaceField s;
    s.times = grids.time.levels();
    s.values.assign(2, Eigen::VectorXd::Ones(8));
    s.dot_values.assign(2, Eigen::VectorXd::Zero(8));
    CHECK_THROWS_AS(residual_transformed_system(u, s, Eigen::VectorXd::Zero(8), grids.x, grids.y, 1), DomainError);
}
