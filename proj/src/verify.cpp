#include "fbp/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Sparse>

#include "fbp/error.hpp"
#include "fbp/fourier.hpp"

namespace fbp {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Full-node operator rows. Interior rows hold -P (so that rows give A u),
// boundary rows hold the trace operators. Index: ix * nodes + j.
struct FullNodeAssembly {
    SparseMatrix interior;  // A(t) on interior rows, zero elsewhere
    SparseMatrix bottom;    // u(., 0) on bottom rows
    SparseMatrix top;       // one-sided u_y(., 1) on top rows
};

FullNodeAssembly assemble(const XGrid& x, const YGrid& y, const Eigen::VectorXd& kappa, double drift) {
    const int nodes = y.nodes();
    const int size = x.size() * nodes;
    const double h = y.spacing();
    const double hx2 = x.spacing() * x.spacing();
    Triplets ti, tb, tt;
    for (int ix = 0; ix < x.size(); ++ix) {
        const int base = ix * nodes;
        tb.emplace_back(base, base, 1.0);
        const int top = base + nodes - 1;
        tt.emplace_back(top, top, 1.5 / h);
        tt.emplace_back(top, top - 1, -2.0 / h);
        tt.emplace_back(top, top - 2, 0.5 / h);
        for (int j = 1; j + 1 < nodes; ++j) {
            const int row = base + j;
            const double yj = j * h;
            ti.emplace_back(row, row, -2.0 * x.n_dim() / hx2 - 2.0 * kappa[ix] / (h * h));
            for (int d = 0; d < x.n_dim(); ++d)
                for (int off : {-1, 1}) ti.emplace_back(row, x.neighbor(ix, d, off) * nodes + j, 1.0 / hx2);
            ti.emplace_back(row, row - 1, kappa[ix] / (h * h) - drift * yj / (2.0 * h));
            ti.emplace_back(row, row + 1, kappa[ix] / (h * h) + drift * yj / (2.0 * h));
        }
    }
    FullNodeAssembly a;
    a.interior.resize(size, size);
    a.bottom.resize(size, size);
    a.top.resize(size, size);
    a.interior.setFromTriplets(ti.begin(), ti.end());
    a.bottom.setFromTriplets(tb.begin(), tb.end());
    a.top.setFromTriplets(tt.begin(), tt.end());
    return a;
}

Eigen::VectorXd flatten(const Slice& s) {
    Eigen::VectorXd v(s.size());
    for (int i = 0; i < s.rows(); ++i)
        for (int j = 0; j < s.cols(); ++j) v[i * s.cols() + j] = s(i, j);
    return v;
}

Slice unflatten(const Eigen::VectorXd& v, int rows, int cols) {
    Slice s(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) s(i, j) = v[i * cols + j];
    return s;
}

// Right-hand side vector: interior entries from `interior`, boundary rows from g and the flux.
Eigen::VectorXd boundary_rhs(const Slice& interior, const Eigen::VectorXd& g, const Eigen::VectorXd& slope) {
    Slice s = interior;
    s.col(0) = g;
    s.col(s.cols() - 1) = slope;
    return flatten(s);
}

}  // namespace

Slice dense_oracle_elliptic(const EllipticProblem& p, const XGrid& x, const YGrid& y, double* residual) {
    require(x.points_per_dim() <= 128 && y.interior() <= 64, "dense oracle: grid exceeds 128 x 64");
    require(p.t > 0.0, "dense oracle: t must be positive");
    const Eigen::VectorXd kappa = (p.t * p.t * p.c.array().square()).inverse().matrix();
    const FullNodeAssembly a = assemble(x, y, kappa, 0.0);
    // -A u = f inside, u = g at y = 0, u_y = t h at y = 1.
    const SparseMatrix system = SparseMatrix(-a.interior) + a.bottom + a.top;
    const Eigen::VectorXd rhs = boundary_rhs(p.f, p.g, p.t * p.h);
    Eigen::SparseLU<SparseMatrix> lu(system);
    if (lu.info() != Eigen::Success) throw ConvergenceError("dense oracle: factorization failed");
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (residual) {
        // Scale interior rows by t^2 c^2 so the residual is in u-units.
        Eigen::VectorXd r = system * sol - rhs;
        for (int ix = 0; ix < x.size(); ++ix)
            for (int j = 1; j + 1 < y.nodes(); ++j) r[ix * y.nodes() + j] /= kappa[ix];
        *residual = r.cwiseAbs().maxCoeff();
    }
    return unflatten(sol, x.size(), y.nodes());
}

StripField dense_oracle_parabolic(const ParabolicOracleData& data) {
    require(data.x.points_per_dim() <= 128 && data.y.interior() <= 64, "dense oracle: grid exceeds 128 x 64");
    require(data.levels.size() >= 2, "dense oracle: need two levels");
    require(!data.level_steps.empty() || data.steps_per_level >= 1, "dense oracle: need at least one step per level");
    require(data.level_steps.empty() || data.level_steps.size() + 1 >= data.levels.size(),
            "dense oracle: need one step count per level");
    const int nx = data.x.size();
    const int nodes = data.y.nodes();
    const int size = nx * nodes;

    // A(t) = Lx + t^{-2} Kyy + t^{-1} Ky on interior rows; assembled once.
    const Eigen::VectorXd zero_kappa = Eigen::VectorXd::Zero(nx);
    const FullNodeAssembly base = assemble(data.x, data.y, zero_kappa, 0.0);
    const SparseMatrix lx = base.interior;
    const SparseMatrix kyy =
        SparseMatrix(assemble(data.x, data.y, data.c.array().square().inverse().matrix(), 0.0).interior) - lx;
    const SparseMatrix ky = data.modified ? SparseMatrix(assemble(data.x, data.y, zero_kappa, 1.0).interior - lx)
                                          : SparseMatrix(size, size);
    const SparseMatrix boundary = base.bottom + base.top;

    Eigen::VectorXd mass = Eigen::VectorXd::Ones(size);
    for (int ix = 0; ix < nx; ++ix) {
        mass[ix * nodes] = 0.0;
        mass[ix * nodes + nodes - 1] = 0.0;
    }
    SparseMatrix mass_matrix(size, size);
    {
        Triplets tm;
        for (int i = 0; i < size; ++i)
            if (mass[i] != 0.0) tm.emplace_back(i, i, 1.0);
        mass_matrix.setFromTriplets(tm.begin(), tm.end());
    }

    auto generator = [&](double t) { return SparseMatrix(lx + (1.0 / (t * t)) * kyy + (1.0 / t) * ky); };
    auto forcing_at = [&](double t) {
        Slice f = data.f(t);
        f.col(0).setZero();
        f.col(nodes - 1).setZero();
        return flatten(f);
    };
    auto boundary_at = [&](double t) {
        return boundary_rhs(Slice::Zero(nx, nodes), data.g.value(t), t * data.h.value(t));
    };

    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    auto solve = [&](const SparseMatrix& m, const Eigen::VectorXd& rhs) {
        if (!analyzed) {
            lu.analyzePattern(m);
            analyzed = true;
        }
        lu.factorize(m);
        if (lu.info() != Eigen::Success) throw ConvergenceError("dense oracle: factorization failed");
        return Eigen::VectorXd(lu.solve(rhs));
    };

    // SDIRK2: gamma = 1 - 1/sqrt(2), stiffly accurate, so the boundary rows
    // of the last stage hold at the new time.
    const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
    StripField out;
    out.times = data.levels;
    out.slices.push_back(data.u0);
    Eigen::VectorXd u = flatten(data.u0);
    for (std::size_t k = 0; k + 1 < data.levels.size(); ++k) {
        const int steps = data.level_steps.empty() ? data.steps_per_level : data.level_steps[k];
        const double dt = (data.levels[k + 1] - data.levels[k]) / steps;
        for (int n = 0; n < steps; ++n) {
            const double tn = data.levels[k] + n * dt;
            const double t1 = tn + gamma * dt;
            const double t2 = n + 1 == steps ? data.levels[k + 1] : tn + dt;
            const SparseMatrix a1 = generator(t1);
            const Eigen::VectorXd f1 = forcing_at(t1);
            const Eigen::VectorXd y1 =
                solve(mass_matrix - gamma * dt * a1 + boundary, mass.cwiseProduct(u) + gamma * dt * f1 + boundary_at(t1));
            const Eigen::VectorXd k1 = a1 * y1 + f1;
            const SparseMatrix a2 = generator(t2);
            const Eigen::VectorXd r2 = mass.cwiseProduct(u) + (1.0 - gamma) * dt * mass.cwiseProduct(k1) +
                                       gamma * dt * forcing_at(t2) + boundary_at(t2);
            u = solve(mass_matrix - gamma * dt * a2 + boundary, r2);
        }
        out.slices.push_back(unflatten(u, nx, nodes));
    }
    return out;
}

}  // namespace fbp

namespace fbp {

namespace {

// Weights of the three-point derivative at levels[k] on the nearest stencil.
std::array<double, 3> rate_weights(const std::vector<double>& levels, int k, int& start) {
    const int n = static_cast<int>(levels.size());
    start = std::clamp(k - 1, 0, n - 3);
    const double t = levels[k];
    std::array<double, 3> w{};
    for (int a = 0; a < 3; ++a) {
        const double ta = levels[start + a];
        double sum = 0.0;
        for (int b = 0; b < 3; ++b) {
            if (b == a) continue;
            double term = 1.0 / (ta - levels[start + b]);
            for (int c = 0; c < 3; ++c)
                if (c != a && c != b) term *= (t - levels[start + c]) / (ta - levels[start + c]);
            sum += term;
        }
        w[a] = sum;
    }
    return w;
}

template <class T>
T level_rate(const std::vector<T>& samples, const std::vector<double>& levels, int k) {
    int start = 0;
    const auto w = rate_weights(levels, k, start);
    // Differences against level k, so constants give exactly zero.
    const T& ref = samples[k];
    return w[0] * (samples[start] - ref) + w[1] * (samples[start + 1] - ref) + w[2] * (samples[start + 2] - ref);
}

}  // namespace

TransformedResiduals residual_transformed_system(const StripField& u, const SurfaceField& s, const Eigen::VectorXd& g,
                                                 const XGrid& x, const YGrid& y, int epsilon) {
    const int n = u.levels();
    require(n >= 3 && s.levels() == n, "residual_transformed_system: need matching fields with three levels");
    require(g.size() == x.size(), "residual_transformed_system: g has the wrong size");
    const Spectral spectral(x);
    const int dim = x.n_dim();
    const int nodes = y.nodes();
    const int top = nodes - 1;
    TransformedResiduals r;
    r.times = u.times;
    r.interior.times = u.times;
    for (int k = 0; k < n; ++k) {
        const double t = u.times[k];
        const Slice& w = u.slices[k];
        const Eigen::VectorXd& sk = s.values[k];
        const Eigen::VectorXd sdot = level_rate(s.values, s.times, k);
        const Slice wt = level_rate(u.slices, u.times, k);
        const Slice wy = y_derivative(w, y);
        const Slice wyy = y_second_derivative(w, y);

        std::array<Eigen::VectorXd, 2> ds;
        std::array<Slice, 2> dw, dwy;
        Eigen::VectorXd grad2 = Eigen::VectorXd::Zero(x.size());
        Slice lap = Slice::Zero(w.rows(), w.cols());
        for (int d = 0; d < dim; ++d) {
            ds[d] = spectral.derivative(sk, d);
            grad2 += ds[d].cwiseAbs2();
            dw[d] = spectral.derivative_columns(w, d);
            dwy[d] = spectral.derivative_columns(wy, d);
            lap += spectral.derivative_columns(dw[d], d);
        }
        const Eigen::VectorXd lap_s = spectral.laplacian(sk);

        Slice interior = Slice::Zero(w.rows(), w.cols());
        for (int i = 0; i < w.rows(); ++i) {
            const double si = sk[i];
            for (int j = 1; j < top; ++j) {
                const double eta = y.node(j);
                double cross = 0.0;
                for (int d = 0; d < dim; ++d) cross += ds[d][i] * dwy[d](i, j);
                interior(i, j) = si * si * (epsilon * wt(i, j) - lap(i, j)) - (1.0 + eta * eta * grad2[i]) * wyy(i, j) -
                                 epsilon * eta * si * sdot[i] * wy(i, j) + 2.0 * eta * si * cross +
                                 eta * (si * lap_s[i] - 2.0 * grad2[i]) * wy(i, j);
            }
        }

        const Eigen::VectorXd trace = w.col(top);
        const Eigen::VectorXd flux = top_derivative(w, y);
        Eigen::VectorXd stefan(x.size()), front(x.size());
        for (int i = 0; i < x.size(); ++i) {
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) dot += ds[d][i] * dw[d](i, top);
            stefan[i] = (1.0 + grad2[i]) * flux[i] / t + (sk[i] / t) * ((1.0 + epsilon * trace[i]) * sdot[i] - dot);
            front[i] = sdot[i] - std::sqrt(1.0 + grad2[i]) * trace[i];
        }
        const Eigen::VectorXd bottom = w.col(0) - g;

        r.interior_sup = std::max(r.interior_sup, interior.cwiseAbs().maxCoeff());
        r.dirichlet_sup = std::max(r.dirichlet_sup, bottom.cwiseAbs().maxCoeff());
        r.stefan_sup = std::max(r.stefan_sup, stefan.cwiseAbs().maxCoeff());
        r.front_sup = std::max(r.front_sup, front.cwiseAbs().maxCoeff());
        r.interior.slices.push_back(std::move(interior));
        r.dirichlet.push_back(bottom);
        r.stefan.push_back(std::move(stefan));
        r.front.push_back(std::move(front));
    }
    return r;
}

TransformedResiduals residual_transformed_system(const CoupledState& state) {
    return residual_transformed_system(state.u, state.s, state.g, state.grids.x, state.grids.y, state.epsilon);
}

}  // namespace fbp
