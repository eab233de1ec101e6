#include "fbp/hamilton_jacobi.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "fbp/fourier.hpp"
#include "fbp/interp.hpp"

namespace fbp {

namespace {

double periodic_lagrange(const XGrid& grid, const Eigen::VectorXd& samples, const Point& x) {
    const int n = grid.points_per_dim();
    const double h = grid.spacing();
    double w0[4], w1[4];
    const int i0 = periodic_cubic_weights(x[0], h, w0);
    if (grid.n_dim() == 1) {
        double out = 0.0;
        for (int a = 0; a < 4; ++a) out += w0[a] * samples[wrap_index(i0 + a, n)];
        return out;
    }
    const int i1 = periodic_cubic_weights(x[1], h, w1);
    double out = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            out += w0[a] * w1[b] * samples[grid.flat({wrap_index(i0 + a, n), wrap_index(i1 + b, n)})];
    return out;
}

struct SampledData {
    XGrid grid;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    std::vector<std::array<Eigen::VectorXd, 2>> gradients;

    // Cubic-in-time combination of per-level spatial evaluations.
    template <typename Eval>
    double in_time(double t, Eval&& eval) const {
        const int n = static_cast<int>(times.size());
        t = std::clamp(t, times.front(), times.back());
        if (n == 1) return eval(0);
        int start = 0, count = n;
        if (n >= 4) {
            const int i = static_cast<int>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
            start = std::clamp(i - 1, 0, n - 4);
            count = 4;
        }
        double vals[4];
        for (int k = 0; k < count; ++k) vals[k] = eval(start + k);
        return cubic_interpolate(std::span<const double>(times.data() + start, count),
                                 std::span<const double>(vals, count), t);
    }
};

double momentum_norm2(const double* p, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += p[d] * p[d];
    return s;
}

// Per-level trigonometric interpolants of displacement, z and p.
struct LevelInterpolant {
    LevelInterpolant(const Spectral& spectral, const FlowMap& flow, int level) : spectral(spectral) {
        const XGrid& grid = flow.grid;
        dim = grid.n_dim();
        for (int d = 0; d < dim; ++d) {
            Eigen::VectorXd disp(grid.size());
            for (int i = 0; i < grid.size(); ++i) disp[i] = flow.position[level](i, d) - grid.point(i)[d];
            displacement[d] = spectral.forward(disp);
            momentum[d] = spectral.forward(Eigen::VectorXd(flow.momentum[level].col(d)));
        }
        value = spectral.forward(flow.value[level]);
    }

    // Residual X(rho) - q and its Jacobian.
    void residual(const Point& rho, const Point& q, double f[2], double jac[2][2]) const {
        for (int d = 0; d < dim; ++d) {
            f[d] = rho[d] + spectral.interpolate(displacement[d], rho) - q[d];
            const auto g = spectral.interpolate_gradient(displacement[d], rho);
            for (int e = 0; e < dim; ++e) jac[d][e] = (d == e ? 1.0 : 0.0) + g[e];
        }
    }

    Point invert(const Point& q, const CharacteristicOptions& options, double time) const {
        Point rho = q;
        for (int d = 0; d < dim; ++d) rho[d] = q[d] - spectral.interpolate(displacement[d], q);
        double f[2] = {0.0, 0.0}, jac[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        residual(rho, q, f, jac);
        double norm = std::hypot(f[0], f[1]);
        for (int it = 0; it < options.newton_iterations; ++it) {
            if (norm <= options.newton_tol) return rho;
            double step[2] = {0.0, 0.0};
            if (dim == 1) {
                step[0] = f[0] / jac[0][0];
            } else {
                const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                step[0] = (jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
                step[1] = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
            }
            // Damped update: halve until the residual decreases.
            double lambda = 1.0;
            for (int back = 0; back < 20; ++back, lambda *= 0.5) {
                Point trial = rho;
                for (int d = 0; d < dim; ++d) trial[d] -= lambda * step[d];
                double ft[2] = {0.0, 0.0}, jt[2][2];
                residual(trial, q, ft, jt);
                const double nt = std::hypot(ft[0], ft[1]);
                if (nt < norm || back == 19) {
                    rho = trial;
                    f[0] = ft[0];
                    f[1] = ft[1];
                    std::copy(&jt[0][0], &jt[0][0] + 4, &jac[0][0]);
                    norm = nt;
                    break;
                }
            }
        }
        if (norm <= options.newton_tol) return rho;
        throw FlowGuardError("flow map inversion did not converge", time);
    }

    const Spectral& spectral;
    int dim = 1;
    ComplexVector displacement[2];
    ComplexVector momentum[2];
    ComplexVector value;
};

}  // namespace

VelocityField VelocityField::steady(std::function<double(const Point&)> v, std::function<Point(const Point&)> grad) {
    return {[v](double, const Point& x) { return v(x); }, [grad](double, const Point& x) { return grad(x); }};
}

VelocityField VelocityField::constant(double v) {
    return {[v](double, const Point&) { return v; }, [](double, const Point&) { return Point{0.0, 0.0}; }};
}

VelocityField sampled_velocity(const XGrid& x, std::vector<double> times, std::vector<Eigen::VectorXd> values) {
    require(!times.empty() && times.size() == values.size(), "sampled_velocity: one sample per time");
    require(std::is_sorted(times.begin(), times.end()), "sampled_velocity: times must increase");
    auto data = std::make_shared<SampledData>();
    data->grid = x;
    const Spectral spectral(x);
    for (const auto& v : values) {
        require(v.size() == x.size(), "sampled_velocity: sample size mismatch");
        std::array<Eigen::VectorXd, 2> g;
        for (int d = 0; d < x.n_dim(); ++d) g[d] = spectral.derivative(v, d);
        data->gradients.push_back(std::move(g));
    }
    data->times = std::move(times);
    data->values = std::move(values);
    VelocityField out;
    out.value = [data](double t, const Point& p) {
        return data->in_time(t, [&](int k) { return periodic_lagrange(data->grid, data->values[k], p); });
    };
    out.gradient = [data](double t, const Point& p) {
        Point g{0.0, 0.0};
        for (int d = 0; d < data->grid.n_dim(); ++d)
            g[d] = data->in_time(t, [&](int k) { return periodic_lagrange(data->grid, data->gradients[k][d], p); });
        return g;
    };
    return out;
}

FlowMap integrate_characteristics(const VelocityField& v, const XGrid& x, const std::vector<double>& times,
                                  const CharacteristicOptions& options) {
    require(!times.empty() && times.front() > 0.0, "integrate_characteristics: times must start after 0");
    require(std::is_sorted(times.begin(), times.end()), "integrate_characteristics: times must increase");
    require(options.substeps >= 1 && options.initial_steps >= 1, "integrate_characteristics: step counts must be positive");
    const int dim = x.n_dim();
    const int seeds = x.size();
    const int levels = static_cast<int>(times.size());

    FlowMap flow;
    flow.grid = x;
    flow.times = times;
    flow.position.assign(levels, Eigen::MatrixXd(seeds, dim));
    flow.momentum.assign(levels, Eigen::MatrixXd(seeds, dim));
    flow.value.assign(levels, Eigen::VectorXd(seeds));
    flow.rate.assign(levels, Eigen::VectorXd(seeds));

    // State layout: x[0..dim), p[dim..2dim), z.
    constexpr int kMax = 5;
    const int size = 2 * dim + 1;
    auto rhs = [&](double t, const double* s, double* out) {
        const Point pos{s[0], dim == 2 ? s[1] : 0.0};
        const double* p = s + dim;
        const double speed = v.value(t, pos);
        const Point grad = v.gradient(t, pos);
        const double root = std::sqrt(1.0 + momentum_norm2(p, dim));
        for (int d = 0; d < dim; ++d) {
            out[d] = -p[d] * speed / root;
            out[dim + d] = root * grad[d];
        }
        out[2 * dim] = root * speed - momentum_norm2(p, dim) * speed / root;
    };

    std::atomic<int> first_bad_level{levels};
#pragma omp parallel for schedule(static)
    for (int i = 0; i < seeds; ++i) {
        double s[kMax] = {0.0, 0.0, 0.0, 0.0, 0.0};
        const Point seed = x.point(i);
        for (int d = 0; d < dim; ++d) s[d] = seed[d];
        double k1[kMax], k2[kMax], k3[kMax], k4[kMax], tmp[kMax];
        auto advance = [&](double ta, double tb, int steps) {
            const double h = (tb - ta) / steps;
            for (int n = 0; n < steps; ++n) {
                const double t = ta + n * h;
                rhs(t, s, k1);
                for (int c = 0; c < size; ++c) tmp[c] = s[c] + 0.5 * h * k1[c];
                rhs(t + 0.5 * h, tmp, k2);
                for (int c = 0; c < size; ++c) tmp[c] = s[c] + 0.5 * h * k2[c];
                rhs(t + 0.5 * h, tmp, k3);
                for (int c = 0; c < size; ++c) tmp[c] = s[c] + h * k3[c];
                rhs(t + h, tmp, k4);
                for (int c = 0; c < size; ++c) s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        };
        for (int k = 0; k < levels; ++k) {
            if (k == 0)
                advance(0.0, times[0], options.initial_steps);
            else
                advance(times[k - 1], times[k], options.substeps);
            const double p2 = momentum_norm2(s + dim, dim);
            if (!std::isfinite(p2) || std::sqrt(p2) > options.momentum_bound) {
                int cur = first_bad_level.load();
                while (k < cur && !first_bad_level.compare_exchange_weak(cur, k)) {
                }
                break;
            }
            const Point pos{s[0], dim == 2 ? s[1] : 0.0};
            for (int d = 0; d < dim; ++d) {
                flow.position[k](i, d) = s[d];
                flow.momentum[k](i, d) = s[dim + d];
            }
            flow.value[k][i] = s[2 * dim];
            flow.rate[k][i] = std::sqrt(1.0 + p2) * v.value(times[k], pos);
        }
    }
    if (first_bad_level.load() < levels) {
        const int k = first_bad_level.load();
        throw FlowGuardError("characteristic momentum exceeded its bound", k > 0 ? times[k - 1] : 0.0);
    }

    // Jacobian of the flow map from spectral derivatives of the displacement.
    const Spectral spectral(x);
    flow.jacobian_defect.assign(levels, 0.0);
    for (int k = 0; k < levels; ++k) {
        Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(seeds);
        for (int d = 0; d < dim; ++d) {
            Eigen::VectorXd disp(seeds);
            for (int i = 0; i < seeds; ++i) disp[i] = flow.position[k](i, d) - x.point(i)[d];
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(seeds);
            for (int e = 0; e < dim; ++e) acc += spectral.derivative(disp, e).cwiseAbs();
            row_sum = row_sum.cwiseMax(acc);
        }
        flow.jacobian_defect[k] = row_sum.maxCoeff();
        if (flow.jacobian_defect[k] > options.jacobian_bound)
            throw FlowGuardError("flow map Jacobian left the near-identity ball", k > 0 ? times[k - 1] : 0.0);
    }
    return flow;
}

Point invert_flow_map(const FlowMap& flow, int level, const Point& query, const CharacteristicOptions& options) {
    require(level >= 0 && level < flow.levels(), "invert_flow_map: level out of range");
    const Spectral spectral(flow.grid);
    const LevelInterpolant interp(spectral, flow, level);
    return interp.invert(query, options, flow.times[level]);
}

FrontSolution reconstruct_front(const FlowMap& flow, const VelocityField& v, const CharacteristicOptions& options) {
    const XGrid& x = flow.grid;
    const int dim = x.n_dim();
    const int size = x.size();
    const Spectral spectral(x);
    FrontSolution out;
    out.surface.times = flow.times;
    for (int k = 0; k < flow.levels(); ++k) {
        const LevelInterpolant interp(spectral, flow, k);
        Eigen::VectorXd s(size), sdot(size);
        Eigen::MatrixXd grad(size, dim);
        std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static)
        for (int i = 0; i < size; ++i) {
            const Point q = x.point(i);
            Point rho;
            try {
                rho = interp.invert(q, options, flow.times[k]);
            } catch (const FlowGuardError&) {
                failed = true;
                continue;
            }
            s[i] = spectral.interpolate(interp.value, rho);
            double p2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                grad(i, d) = spectral.interpolate(interp.momentum[d], rho);
                p2 += grad(i, d) * grad(i, d);
            }
            sdot[i] = std::sqrt(1.0 + p2) * v.value(flow.times[k], q);
        }
        if (failed) throw FlowGuardError("flow map inversion did not converge", k > 0 ? flow.times[k - 1] : 0.0);
        out.surface.values.push_back(std::move(s));
        out.surface.dot_values.push_back(std::move(sdot));
        out.gradient.push_back(std::move(grad));
        out.max_jacobian_defect = std::max(out.max_jacobian_defect, flow.jacobian_defect[k]);
        for (int i = 0; i < size; ++i)
            out.max_momentum = std::max(out.max_momentum, flow.momentum[k].row(i).norm());
    }
    out.flow = flow;
    return out;
}

FrontSolution hj_solve(const VelocityField& v, const XGrid& x, const std::vector<double>& times,
                       const CharacteristicOptions& options) {
    return reconstruct_front(integrate_characteristics(v, x, times, options), v, options);
}

}  // namespace fbp
