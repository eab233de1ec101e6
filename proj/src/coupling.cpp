#include "fbp/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fbp/error.hpp"
#include "fbp/holder.hpp"
#include "fbp/strip_system.hpp"

namespace fbp {

namespace {

Slice zero_boundary_columns(Slice s) {
    s.col(0).setZero();
    s.col(s.cols() - 1).setZero();
    return s;
}

Eigen::VectorXd flatten(const Slice& s) { return Eigen::Map<const Eigen::VectorXd>(s.data(), s.size()); }

// Four-point Lagrange weights (value and derivative) on increasing nodes,
// stencil clamped at the ends as in cubic_interpolate.
struct TimeStencil {
    int start = 0;
    int count = 0;
    double w[4] = {0, 0, 0, 0};
    double dw[4] = {0, 0, 0, 0};
};

TimeStencil time_stencil(const std::vector<double>& nodes, double t) {
    const int n = static_cast<int>(nodes.size());
    TimeStencil st;
    t = std::clamp(t, nodes.front(), nodes.back());
    st.count = std::min(n, 4);
    const int i = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), t) - nodes.begin()) - 1;
    st.start = std::clamp(i - 1, 0, n - st.count);
    for (int a = 0; a < st.count; ++a) {
        const double ta = nodes[st.start + a];
        double w = 1.0, dw = 0.0;
        for (int b = 0; b < st.count; ++b) {
            if (b == a) continue;
            const double tb = nodes[st.start + b];
            double term = 1.0 / (ta - tb);
            for (int c = 0; c < st.count; ++c)
                if (c != a && c != b) term *= (t - nodes[st.start + c]) / (ta - nodes[st.start + c]);
            dw += term;
            w *= (t - tb) / (ta - tb);
        }
        st.w[a] = w;
        st.dw[a] = dw;
    }
    return st;
}

template <class T>
T combine(const std::vector<T>& samples, const TimeStencil& st, const double* weights) {
    T out = weights[0] * samples[st.start];
    for (int a = 1; a < st.count; ++a) out += weights[a] * samples[st.start + a];
    return out;
}

std::array<Eigen::VectorXd, 2> gradient(const Eigen::VectorXd& f, const Spectral& spectral) {
    std::array<Eigen::VectorXd, 2> out;
    for (int d = 0; d < spectral.grid().n_dim(); ++d) out[d] = spectral.derivative(f, d);
    return out;
}

std::vector<FrontLevel> front_levels(const SurfaceField& s, const Spectral& spectral) {
    std::vector<FrontLevel> out;
    for (int k = 0; k < s.levels(); ++k)
        out.push_back(FrontLevel::from_samples(s.times[k], s.values[k], s.dot_values[k], spectral));
    return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Rethrown as ConvergenceError so callers can shorten the horizon.
void check_strip_guard(const StripField& u, const Eigen::VectorXd& g, double radius) {
    const double bound = radius * g.maxCoeff();
    for (const Slice& s : u.slices) {
        const double dev = (s.colwise() - g).cwiseAbs().maxCoeff();
        if (!std::isfinite(dev) || dev > bound)
            throw ConvergenceError("iterate left the neighbourhood of the boundary datum");
    }
}

void check_front_guard(const SurfaceField& s, const Eigen::VectorXd& g, double radius) {
    const double bound = radius * g.maxCoeff();
    for (int k = 0; k < s.levels(); ++k) {
        const double dev = (s.values[k] / s.times[k] - g).cwiseAbs().maxCoeff();
        if (!std::isfinite(dev) || dev > bound || s.values[k].minCoeff() <= 0.0)
            throw ConvergenceError("front left the neighbourhood of t g");
    }
}

StripField difference(const StripField& a, const StripField& b) {
    StripField d;
    d.times = a.times;
    for (int k = 0; k < a.levels(); ++k) d.slices.push_back(a.slices[k] - b.slices[k]);
    return d;
}

StripField sum(const StripField& a, const StripField& b) {
    StripField d;
    d.times = a.times;
    for (int k = 0; k < a.levels(); ++k) d.slices.push_back(a.slices[k] + b.slices[k]);
    return d;
}

double update_ratio(std::vector<double>& diffs, std::vector<double>& ratios, double d) {
    const double ratio = diffs.empty() || diffs.back() == 0.0 ? 0.0 : d / diffs.back();
    diffs.push_back(d);
    if (diffs.size() > 1) ratios.push_back(ratio);
    return ratio;
}

// Round-off puts a floor under the strip norm of a difference: the
// t^-2 d_yy part amplifies last-bit changes near t0. The floor is the norm
// of an alternating perturbation of a few ulps of u.
double roundoff_floor(const StripField& u, const XGrid& x, const YGrid& y, double beta) {
    StripField noise;
    noise.times = u.times;
    for (int k = 0; k < u.levels(); ++k) {
        Slice d = 4.0 * std::numeric_limits<double>::epsilon() * u.slices[k].cwiseAbs();
        for (int i = 0; i < d.rows(); ++i)
            for (int j = 0; j < d.cols(); ++j)
                if ((i + j + k) % 2) d(i, j) = -d(i, j);
        noise.slices.push_back(std::move(d));
    }
    return strip_norm(noise, x, y, beta);
}

InnerSolution phi1_parabolic(const SurfaceField& s, const Eigen::VectorXd& g, const Grids& grids,
                             const CouplingOptions& options, const StripField* initial,
                             const IterationCallback& log) {
    const XGrid& x = grids.x;
    const YGrid& y = grids.y;
    const std::vector<double>& levels = grids.time.levels();
    const int n = static_cast<int>(levels.size());
    const Spectral spectral(x);
    const auto fronts = front_levels(s, spectral);
    std::vector<FrontPerturbation> perturbation;
    for (const auto& f : fronts) perturbation.emplace_back(f, g, x, y, spectral, 1);

    auto family = std::make_shared<GeneratorFamily>(x, y, g, true);
    const ParabolicStepper stepper(family, options.step);

    // The boundary flux does not vanish at t = 0: its limit -g^2 (1 + g) is
    // split off and solved once, so the iterated datum H - H0 vanishes there.
    const Eigen::VectorXd h0 = -(g.array().square() * (1.0 + g.array())).matrix();
    const Slice zero = Slice::Zero(x.size(), y.nodes());
    const InhomogeneousSolution base = solve_inhomogeneous(
        stepper, levels, [&](double) { return zero; }, BoundaryData::constant(g), BoundaryData::constant(h0));

    StripField u = initial ? *initial : base.u;
    require(u.levels() == n, "phi1: initial field has the wrong number of levels");
    InnerSolution out;
    const double tol = options.tolerance * options.inner_factor;
    out.tolerance = tol;
    for (int it = 1; it <= options.max_inner; ++it) {
        std::vector<Slice> forcing(n);
        std::vector<Eigen::VectorXd> flux(n);
        for (int k = 0; k < n; ++k) {
            forcing[k] = perturbation[k].apply(u.slices[k]);
            const Eigen::VectorXd trace = u.slices[k].col(y.nodes() - 1);
            flux[k] = boundary_flux(fronts[k], trace, gradient(trace, spectral), 1) - h0;
        }
        const Forcing f = [&](double t) {
            const TimeStencil st = time_stencil(levels, t);
            return combine(forcing, st, st.w);
        };
        const BoundaryData h{[&](double t) {
                                 const TimeStencil st = time_stencil(levels, t);
                                 return combine(flux, st, st.w);
                             },
                             [&](double t) {
                                 const TimeStencil st = time_stencil(levels, t);
                                 return combine(flux, st, st.dw);
                             }};
        const InhomogeneousSolution sol = solve_inhomogeneous(stepper, levels, f, BoundaryData::zero(x.size()), h);
        const StripField next = sum(sol.u, base.u);
        const double d = strip_norm(difference(next, u), x, y, options.beta);
        const double ratio = update_ratio(out.differences, out.ratios, d);
        if (log) log({"inner", 0, it, levels.back(), d, ratio});
        u = next;
        out.iterations = it;
        out.dirichlet = base.dirichlet;
        out.neumann = sum(base.neumann, sol.neumann);
        out.v = sum(base.v, sol.v);
        check_strip_guard(u, g, options.radius_u);
        out.tolerance = std::max(tol, roundoff_floor(u, x, y, options.beta));
        if (d <= out.tolerance) break;
        if (out.differences.size() >= 3 && ratio >= 1.0)
            throw ConvergenceError("inner iteration is not contracting");
        if (it == options.max_inner) throw ConvergenceError("inner iteration did not reach its tolerance");
    }
    out.u = u;
    out.contraction = contraction_estimate(out.differences, 10.0 * out.tolerance);
    return out;
}

InnerSolution phi1_quasistationary(const SurfaceField& s, const Eigen::VectorXd& g, const Grids& grids,
                                   const CouplingOptions& options, const StripField* initial,
                                   const IterationCallback& log) {
    const XGrid& x = grids.x;
    const YGrid& y = grids.y;
    const std::vector<double>& levels = grids.time.levels();
    const int n = static_cast<int>(levels.size());
    const Spectral spectral(x);
    const auto fronts = front_levels(s, spectral);
    std::vector<FrontPerturbation> perturbation;
    for (const auto& f : fronts) perturbation.emplace_back(f, g, x, y, spectral, 0);
    const EllipticSolver solver(x, y, g, options.elliptic_path, options.elliptic);

    StripField u;
    if (initial) {
        u = *initial;
    } else {
        u.times = levels;
        for (int k = 0; k < n; ++k) u.slices.push_back(g.replicate(1, y.nodes()));
    }
    require(u.levels() == n, "phi1: initial field has the wrong number of levels");
    InnerSolution out;
    std::vector<Eigen::VectorXd> flux(n);
    const double tol = options.tolerance * options.inner_factor;
    out.tolerance = tol;
    for (int it = 1; it <= options.max_inner; ++it) {
        StripField next;
        next.times = levels;
        next.slices.resize(n);
        for (int k = 0; k < n; ++k) {
            const Eigen::VectorXd trace = u.slices[k].col(y.nodes() - 1);
            flux[k] = boundary_flux(fronts[k], trace, gradient(trace, spectral), 0);
            next.slices[k] = solver.solve(levels[k], perturbation[k].apply(u.slices[k]), g, flux[k]);
        }
        const double d = strip_norm(difference(next, u), x, y, options.beta);
        const double ratio = update_ratio(out.differences, out.ratios, d);
        if (log) log({"inner", 0, it, levels.back(), d, ratio});
        u = std::move(next);
        out.iterations = it;
        check_strip_guard(u, g, options.radius_u);
        out.tolerance = std::max(tol, roundoff_floor(u, x, y, options.beta));
        if (d <= out.tolerance) break;
        if (out.differences.size() >= 3 && ratio >= 1.0)
            throw ConvergenceError("inner iteration is not contracting");
        if (it == options.max_inner) throw ConvergenceError("inner iteration did not reach its tolerance");
    }
    out.u = u;
    out.dirichlet.times = out.neumann.times = out.v.times = levels;
    for (int k = 0; k < n; ++k) {
        const auto parts = solver.boundary_parts(levels[k], g, flux[k]);
        out.dirichlet.slices.push_back(parts.dirichlet);
        out.neumann.slices.push_back(parts.neumann);
        out.v.slices.push_back(u.slices[k] - parts.dirichlet - parts.neumann);
    }
    out.contraction = contraction_estimate(out.differences, 10.0 * out.tolerance);
    return out;
}

SurfaceField flat_front(const Eigen::VectorXd& g, const std::vector<double>& levels) {
    SurfaceField s;
    s.times = levels;
    for (double t : levels) {
        s.values.push_back(t * g);
        s.dot_values.push_back(g);
    }
    return s;
}

}  // namespace

FrontLevel FrontLevel::from_samples(double t, Eigen::VectorXd s, Eigen::VectorXd s_dot, const Spectral& spectral) {
    FrontLevel out;
    out.t = t;
    out.dim = spectral.grid().n_dim();
    out.grad = gradient(s, spectral);
    out.laplacian = spectral.laplacian(s);
    out.s = std::move(s);
    out.s_dot = std::move(s_dot);
    return out;
}

FrontPerturbation::FrontPerturbation(const FrontLevel& front, const Eigen::VectorXd& g, const XGrid& x,
                                     const YGrid& y, const Spectral& spectral, int epsilon)
    : x_(x), y_(y), spectral_(spectral), t_(front.t), epsilon_(epsilon) {
    require(front.s.size() == x.size() && g.size() == x.size(), "FrontPerturbation: size mismatch");
    require(front.s.minCoeff() > 0.0, "FrontPerturbation: front height must be positive");
    const int points = x.size();
    const int nodes = y.nodes();
    const double t = front.t;
    inv_s_ = front.s.cwiseInverse();
    diffusion_.resize(points, nodes);
    drift_.resize(points, nodes);
    for (int d = 0; d < front.dim; ++d) cross_[d] = -2.0 * front.grad[d].cwiseProduct(inv_s_);
    for (int i = 0; i < points; ++i) {
        const double s = front.s[i];
        const double tg = t * g[i];
        double grad2 = 0.0;
        for (int d = 0; d < front.dim; ++d) grad2 += front.grad[d][i] * front.grad[d][i];
        // Differences of nearly equal terms are formed before dividing.
        const double speed_term = epsilon * (t * front.s_dot[i] - s) / (s * t);
        const double curvature_term = (s * front.laplacian[i] - 2.0 * grad2) / (s * s);
        for (int j = 0; j < nodes; ++j) {
            const double eta = y.node(j);
            diffusion_(i, j) = ((tg - s) * (tg + s) + tg * tg * eta * eta * grad2) / (s * s * tg * tg);
            drift_(i, j) = eta * (speed_term - curvature_term);
            defect_ = std::max(defect_, std::abs(diffusion_(i, j)) * tg * tg);
        }
    }
}

Slice FrontPerturbation::apply(const Slice& u) const {
    const Slice uy = y_derivative(u, y_);
    Slice out = diffusion_.cwiseProduct(y_second_derivative(u, y_)) + drift_.cwiseProduct(uy);
    for (int d = 0; d < x_.n_dim(); ++d) {
        const Slice mixed = spectral_.derivative_columns(uy, d);
        for (int j = 0; j < y_.nodes(); ++j) out.col(j) += y_.node(j) * cross_[d].cwiseProduct(mixed.col(j));
    }
    return zero_boundary_columns(std::move(out));
}

double FrontPerturbation::relative_diffusion_defect() const { return defect_; }

Eigen::VectorXd boundary_flux(const FrontLevel& front, const Eigen::VectorXd& trace,
                              const std::array<Eigen::VectorXd, 2>& trace_grad, int epsilon) {
    const int n = static_cast<int>(trace.size());
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double grad2 = 0.0, dot = 0.0;
        for (int d = 0; d < front.dim; ++d) {
            grad2 += front.grad[d][i] * front.grad[d][i];
            dot += front.grad[d][i] * trace_grad[d][i];
        }
        const double ratio = front.s[i] / front.t;
        out[i] = ratio * dot / (1.0 + grad2) - ratio * trace[i] * (1.0 + epsilon * trace[i]) / std::sqrt(1.0 + grad2);
    }
    return out;
}

double strip_norm(const StripField& w, const XGrid& x, const YGrid& y, double beta) {
    TimeSamples value, lap, yy;
    for (int k = 0; k < w.levels(); ++k) {
        const Slice& s = w.slices[k];
        const double t = w.times[k];
        value.push_back(flatten(s));
        lap.push_back(flatten(zero_boundary_columns(difference_laplacian(s, x))));
        yy.push_back(flatten(zero_boundary_columns(y_second_derivative(s, y))) / (t * t));
    }
    return weighted_holder_norm(w.times, value, beta, beta) + weighted_holder_norm(w.times, lap, beta, beta) +
           weighted_holder_norm(w.times, yy, beta, beta);
}

double front_norm(const SurfaceField& s, const Spectral& spectral, double beta) {
    const int dim = spectral.grid().n_dim();
    // Sum over derivative orders of plain C^beta norms in time of the sup
    // over all partial derivatives of that order.
    auto add_orders = [&](const std::vector<Eigen::VectorXd>& levels, int order) {
        std::vector<std::vector<Eigen::VectorXd>> current(levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) current[k] = {levels[k]};
        double total = weighted_holder_norm(s.times, levels, beta, 0.0);
        for (int o = 1; o <= order; ++o) {
            TimeSamples stacked;
            for (std::size_t k = 0; k < levels.size(); ++k) {
                std::vector<Eigen::VectorXd> next;
                for (const auto& c : current[k])
                    for (int d = 0; d < dim; ++d) next.push_back(spectral.derivative(c, d));
                Eigen::VectorXd all(static_cast<Eigen::Index>(next.size()) * next[0].size());
                for (std::size_t q = 0; q < next.size(); ++q) all.segment(q * next[0].size(), next[0].size()) = next[q];
                stacked.push_back(std::move(all));
                current[k] = std::move(next);
            }
            total += weighted_holder_norm(s.times, stacked, beta, 0.0);
        }
        return total;
    };
    return add_orders(s.values, 3) + add_orders(s.dot_values, 2);
}

InnerSolution phi1(const SurfaceField& s, const Eigen::VectorXd& g, const Grids& grids,
                   const CouplingOptions& options, const StripField* initial, const IterationCallback& log) {
    require(options.epsilon == 0 || options.epsilon == 1, "phi1: epsilon must be 0 or 1");
    require(g.size() == grids.x.size() && g.minCoeff() > 0.0, "phi1: g must be positive on the grid");
    require(s.levels() == grids.time.steps() + 1, "phi1: front and time grid disagree");
    return options.epsilon == 1 ? phi1_parabolic(s, g, grids, options, initial, log)
                                : phi1_quasistationary(s, g, grids, options, initial, log);
}

CoupledState solve_fbp(const Eigen::VectorXd& g, const Grids& grids, const CouplingOptions& options,
                       const IterationCallback& log) {
    require(g.size() == grids.x.size() && g.minCoeff() > 0.0, "solve_fbp: g must be positive on the grid");
    CoupledState state;
    state.g = g;
    state.epsilon = options.epsilon;
    state.grids = grids;
    const Spectral spectral(grids.x);
    auto record = [&](const IterationRecord& r) {
        state.log.push_back(r);
        if (log) log(r);
    };

    for (int restart = 0;; ++restart) {
        const std::vector<double>& levels = state.grids.time.levels();
        const double horizon = levels.back();
        int outer = 0;
        auto inner_log = [&](const IterationRecord& r) {
            IterationRecord copy = r;
            copy.outer = outer;
            record(copy);
        };
        try {
            state.outer_differences.clear();
            state.outer_ratios.clear();
            state.inner_iterations = 0;
            SurfaceField s = flat_front(g, levels);
            InnerSolution inner = phi1(s, g, state.grids, options, nullptr, inner_log);
            state.inner_iterations += inner.iterations;
            const double inner_contraction = inner.contraction;
            bool converged = false;
            for (outer = 1; outer <= options.max_outer; ++outer) {
                std::vector<Eigen::VectorXd> traces;
                for (const Slice& u : inner.u.slices) traces.push_back(u.col(grids.y.nodes() - 1));
                const VelocityField speed = sampled_velocity(grids.x, levels, traces);
                const FrontSolution front = hj_solve(speed, grids.x, levels, options.characteristics);
                check_front_guard(front.surface, g, options.radius_s);
                SurfaceField delta;
                delta.times = levels;
                for (int k = 0; k < s.levels(); ++k) {
                    delta.values.push_back(front.surface.values[k] - s.values[k]);
                    delta.dot_values.push_back(front.surface.dot_values[k] - s.dot_values[k]);
                }
                const double d = front_norm(delta, spectral, options.beta);
                const double ratio = update_ratio(state.outer_differences, state.outer_ratios, d);
                record({"outer", outer, inner.iterations, horizon, d, ratio});
                s = front.surface;
                inner = phi1(s, g, state.grids, options, &inner.u, inner_log);
                state.inner_iterations += inner.iterations;
                if (d <= options.tolerance) {
                    converged = true;
                    break;
                }
                if (state.outer_differences.size() >= 3 && ratio >= 1.0)
                    throw ConvergenceError("outer iteration is not contracting");
            }
            if (!converged) throw ConvergenceError("outer iteration did not reach its tolerance");
            state.outer_iterations = outer;
            state.u = inner.u;
            state.s = s;
            state.dirichlet = inner.dirichlet;
            state.neumann = inner.neumann;
            state.v = inner.v;
            state.inner_contraction = inner_contraction;
            state.outer_contraction = contraction_estimate(state.outer_differences, 10.0 * options.tolerance);
            state.restarts = restart;
            state.converged = true;
            return state;
        } catch (const ConvergenceError& e) {
            if (restart >= options.max_restarts) throw;
            const TimeGrid& old = state.grids.time;
            const double shorter = 0.5 * old.horizon();
            if (shorter <= old.t0()) throw;
            record({"restart", outer, 0, shorter, 0.0, 0.0});
            state.grids.time = TimeGrid(old.t0(), shorter, old.steps(), old.grading());
        }
    }
}

namespace {

// Log-log slope over the samples above `floor`; NaN if fewer than two.
double positive_slope(const std::vector<double>& t, const std::vector<double>& values, double floor) {
    std::vector<double> ts, vs;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (values[k] > floor) {
            ts.push_back(t[k]);
            vs.push_back(values[k]);
        }
    if (ts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return loglog_slope(ts, vs);
}

}  // namespace

DecompositionReport decomposition_report(const CoupledState& state, double first_time, double last_time) {
    DecompositionReport r;
    std::vector<double> ts, dn, dd, nn, vn;
    for (int k = 0; k < state.u.levels(); ++k) {
        const double t = state.u.times[k];
        const double d = max_abs(state.dirichlet.slices[k]);
        const double dg = max_abs(state.dirichlet.slices[k].colwise() - state.g);
        const double nm = max_abs(state.neumann.slices[k]);
        const double vm = max_abs(state.v.slices[k]);
        r.times.push_back(t);
        r.dirichlet_norm.push_back(d);
        r.dirichlet_defect.push_back(dg);
        r.neumann_norm.push_back(nm);
        r.remainder_norm.push_back(vm);
        if (t >= first_time && t <= last_time) {
            ts.push_back(t);
            dn.push_back(d);
            dd.push_back(dg);
            nn.push_back(nm);
            vn.push_back(vm);
        }
    }
    require(ts.size() >= 2, "decomposition_report: need two levels in the fit window");
    // Summands at round-off level relative to the data count as vanishing.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * max_abs(state.g);
    r.dirichlet_slope = positive_slope(ts, dn, floor);
    r.dirichlet_defect_slope = positive_slope(ts, dd, floor);
    r.neumann_slope = positive_slope(ts, nn, floor);
    r.remainder_slope = positive_slope(ts, vn, floor);
    return r;
}

double contraction_estimate(const std::vector<double>& differences, double floor) {
    double worst = 0.0;
    for (std::size_t k = 1; k < differences.size(); ++k) {
        if (differences[k] <= floor) break;
        worst = std::max(worst, differences[k] / differences[k - 1]);
    }
    return worst;
}

}  // namespace fbp
