#include "fbp/parabolic.hpp"

#include <cmath>
#include <random>

#include "fbp/error.hpp"
#include "fbp/holder.hpp"

namespace fbp {

namespace {

Slice interior_only(Slice s) {
    s.col(0).setZero();
    s.col(s.cols() - 1).setZero();
    return s;
}

double sup(const Slice& s) { return s.cwiseAbs().maxCoeff(); }

constexpr std::size_t kCacheLimit = 8192;

}  // namespace

GeneratorFamily::GeneratorFamily(const XGrid& x, const YGrid& y, Eigen::VectorXd c, bool modified)
    : x_(x), y_(y), c_(std::move(c)), modified_(modified) {
    require(c_.size() == x.size(), "GeneratorFamily: coefficient has wrong size");
    require(c_.minCoeff() > 0.0, "GeneratorFamily: coefficient must be positive");
}

StripCoefficients GeneratorFamily::shifted(double t, double shift) const {
    require(t > 0.0, "GeneratorFamily: t must be positive");
    StripCoefficients coeffs;
    coeffs.shift = shift;
    coeffs.kappa = (t * t * c_.array().square()).inverse().matrix();
    coeffs.drift = modified_ ? 1.0 / t : 0.0;
    return coeffs;
}

Slice GeneratorFamily::apply(double t, const Slice& u) const {
    const StripSystem probe(x_, y_, shifted(t, 0.0));
    return -probe.apply(u);
}

const StripSystem& GeneratorFamily::system(double t, double shift) const {
    const auto key = std::make_pair(t, shift);
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }
    auto built = std::make_shared<const StripSystem>(x_, y_, shifted(t, shift));
    std::lock_guard lock(mutex_);
    if (cache_.size() >= kCacheLimit) cache_.clear();
    return *cache_.emplace(key, std::move(built)).first->second;
}

Slice GeneratorFamily::solve(double t, double shift, const Slice& f, const Eigen::VectorXd& bottom,
                             const Eigen::VectorXd& flux) const {
    return system(t, shift).solve(f, bottom, t * flux);
}

Slice GeneratorFamily::solve(double t, double shift, const Slice& f) const {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(x_.size());
    return system(t, shift).solve(f, zero, zero);
}

Slice GeneratorFamily::dirichlet(double t, const Eigen::VectorXd& g) const {
    return solve(t, 0.0, Slice::Zero(x_.size(), y_.nodes()), g, Eigen::VectorXd::Zero(x_.size()));
}

Slice GeneratorFamily::neumann(double t, const Eigen::VectorXd& h) const {
    return solve(t, 0.0, Slice::Zero(x_.size(), y_.nodes()), Eigen::VectorXd::Zero(x_.size()), h);
}

Slice GeneratorFamily::rate_operator(double t, const Slice& w) const {
    Slice lw = difference_laplacian(w, x_);
    if (modified_) {
        const double h = y_.spacing();
        for (int j = 1; j + 1 < w.cols(); ++j)
            lw.col(j) += y_.node(j) / (2.0 * t) * (w.col(j + 1) - w.col(j - 1)) / (2.0 * h);
    }
    return (2.0 / t) * solve(t, 0.0, interior_only(lw));
}

Slice GeneratorFamily::dirichlet_rate(double t, const Eigen::VectorXd& g, const Eigen::VectorXd& g_rate) const {
    return rate_operator(t, dirichlet(t, g)) + dirichlet(t, g_rate);
}

Slice GeneratorFamily::neumann_rate(double t, const Eigen::VectorXd& h, const Eigen::VectorXd& h_rate) const {
    const Slice w = neumann(t, h);
    return rate_operator(t, w) + w / t + neumann(t, h_rate);
}

void GeneratorFamily::clear_cache() const {
    std::lock_guard lock(mutex_);
    cache_.clear();
}

std::size_t GeneratorFamily::cached_factorizations() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

TimeScheme parse_time_scheme(const std::string& name) {
    if (name == "euler" || name == "implicit_euler") return TimeScheme::ImplicitEuler;
    if (name == "trapezoidal" || name == "trapezoid") return TimeScheme::Trapezoidal;
    throw DomainError("unknown time scheme '" + name + "' (expected euler or trapezoidal)");
}

std::string to_string(TimeScheme scheme) {
    return scheme == TimeScheme::ImplicitEuler ? "euler" : "trapezoidal";
}

BoundaryData BoundaryData::constant(const Eigen::VectorXd& v) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(v.size());
    return {[v](double) { return v; }, [zero](double) { return zero; }};
}

BoundaryData BoundaryData::zero(int size) { return constant(Eigen::VectorXd::Zero(size)); }

ParabolicStepper::ParabolicStepper(std::shared_ptr<const GeneratorFamily> family, StepOptions options)
    : family_(std::move(family)), options_(options) {
    require(options_.max_step_fraction > 0.0, "ParabolicStepper: step fraction must be positive");
}

int ParabolicStepper::substeps(double t_from, double t_to) const {
    require(t_from > 0.0 && t_to > t_from, "ParabolicStepper: need 0 < t_from < t_to");
    const double ratio = (t_to - t_from) / (options_.max_step_fraction * t_from);
    const int n = std::max(1, static_cast<int>(std::ceil(ratio - 1e-12)));
    if (n > 1 && !options_.allow_substeps)
        throw DomainError("ParabolicStepper: step " + std::to_string(t_to - t_from) + " exceeds " +
                          std::to_string(options_.max_step_fraction) + " * t at t = " + std::to_string(t_from));
    return n;
}

Slice ParabolicStepper::step(const Slice& u, double t_from, double t_to, const Forcing& f) const {
    const int n = substeps(t_from, t_to);
    const double dt = (t_to - t_from) / n;
    Slice current = u;
    Slice f_prev;
    if (options_.scheme == TimeScheme::Trapezoidal) f_prev = f(t_from);
    for (int i = 0; i < n; ++i) {
        const double ta = t_from + i * dt;
        const double tb = i + 1 == n ? t_to : t_from + (i + 1) * dt;
        const double h = tb - ta;
        if (options_.scheme == TimeScheme::ImplicitEuler) {
            const Slice rhs = current / h + f(tb);
            current = family_->solve(tb, 1.0 / h, rhs);
        } else {
            const Slice f_next = f(tb);
            const Slice rhs = 2.0 / h * current + family_->apply(ta, current) + f_prev + f_next;
            current = family_->solve(tb, 2.0 / h, rhs);
            f_prev = f_next;
        }
    }
    return current;
}

Slice ParabolicStepper::damped_step(const Slice& u, double t_from, double t_to, const Forcing& f, int count) const {
    require(count >= 1 && t_to > t_from, "ParabolicStepper: bad damped step");
    const double h = (t_to - t_from) / count;
    Slice current = u;
    for (int i = 1; i <= count; ++i) {
        const double tb = i == count ? t_to : t_from + i * h;
        current = family_->solve(tb, 1.0 / h, Slice(current / h + f(tb)));
    }
    return current;
}

std::vector<Slice> ParabolicStepper::evolve(const Slice& u0, const std::vector<double>& levels,
                                            const Forcing& f) const {
    std::vector<Slice> out{u0};
    out.reserve(levels.size());
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        if (k == 0 && options_.damped_start > 0 && options_.scheme == TimeScheme::Trapezoidal)
            out.push_back(damped_step(out.back(), levels[0], levels[1], f, options_.damped_start));
        else
            out.push_back(step(out.back(), levels[k], levels[k + 1], f));
    }
    return out;
}

InhomogeneousSolution solve_inhomogeneous(const ParabolicStepper& stepper, const std::vector<double>& levels,
                                          const Forcing& f, const BoundaryData& g, const BoundaryData& h,
                                          const Slice* v0) {
    const GeneratorFamily& family = stepper.family();
    const int nx = family.x().size();
    const int ny = family.y().nodes();
    // v' - A v = f - d/dt (R_D g + R_N h); A annihilates the boundary parts.
    const Forcing reduced = [&](double t) -> Slice {
        Slice out = f(t);
        out -= family.dirichlet_rate(t, g.value(t), g.rate(t));
        out -= family.neumann_rate(t, h.value(t), h.rate(t));
        return out;
    };
    const Slice start = v0 ? *v0 : Slice::Zero(nx, ny);
    InhomogeneousSolution sol;
    sol.v.times = levels;
    sol.v.slices = stepper.evolve(start, levels, reduced);
    sol.u.times = sol.dirichlet.times = sol.neumann.times = levels;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        sol.dirichlet.slices.push_back(family.dirichlet(levels[k], g.value(levels[k])));
        sol.neumann.slices.push_back(family.neumann(levels[k], h.value(levels[k])));
        sol.u.slices.push_back(sol.v.slices[k] + sol.dirichlet.slices.back() + sol.neumann.slices.back());
    }
    return sol;
}

MaxRegReport verify_maxreg_hypotheses(const GeneratorFamily& family, const std::vector<double>& times, int triples,
                                      unsigned seed) {
    require(times.size() >= 2, "verify_maxreg_hypotheses: need at least two times");
    const int nx = family.x().size();
    const int ny = family.y().nodes();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random_slice = [&]() {
        Slice s(nx, ny);
        for (int i = 0; i < s.size(); ++i) s.data()[i] = unit(rng);
        return interior_only(s);
    };
    auto power = [&](const std::function<Slice(const Slice&)>& op) {
        Slice v = random_slice();
        v /= v.norm();
        double ratio = 0.0;
        for (int it = 0; it < 40; ++it) {
            Slice w = interior_only(op(v));
            ratio = w.norm();
            if (ratio == 0.0) return 0.0;
            v = w / ratio;
        }
        return ratio;
    };

    MaxRegReport report;
    report.times = times;
    for (double t : times) {
        report.inverse_norm.push_back(power([&](const Slice& v) { return family.solve(t, 0.0, v); }));
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            const Slice f = random_slice();
            worst = std::max(worst, sup(interior_only(family.solve(t, 0.0, f))) / sup(f));
        }
        report.inverse_sup_ratio.push_back(worst);
    }
    report.inverse_slope = loglog_slope(times, report.inverse_norm);
    report.inverse_constant = report.inverse_norm.front() / std::pow(times.front(), 2.0);
    report.smallest_inverse = report.inverse_norm.front();

    // Triples tau <= s < t drawn log-uniformly over the sampled range.
    const double lo = std::log(*std::min_element(times.begin(), times.end()));
    const double hi = std::log(*std::max_element(times.begin(), times.end()));
    std::uniform_real_distribution<double> logt(lo, hi);
    for (int k = 0; k < triples; ++k) {
        std::array<double, 3> draw{std::exp(logt(rng)), std::exp(logt(rng)), std::exp(logt(rng))};
        std::sort(draw.begin(), draw.end());
        const double tau = draw[0], s = draw[1], t = draw[2];
        if (t - s < 1e-12 * t) continue;
        const auto difference = [&](const Slice& v) {
            const Slice w = family.solve(tau, 0.0, v);
            return Slice(family.apply(t, w) - family.apply(s, w));
        };
        double ratio = power(difference);
        for (int trial = 0; trial < 3; ++trial) {
            const Slice f = random_slice();
            ratio = std::max(ratio, sup(interior_only(difference(f))) / sup(f));
        }
        report.difference_ratio_max = std::max(report.difference_ratio_max, ratio * t / (t - s));
        ++report.triples;
    }
    return report;
}

}  // namespace fbp
