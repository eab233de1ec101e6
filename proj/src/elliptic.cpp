#include "fbp/elliptic.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fbp/error.hpp"

namespace fbp {

namespace {

double bump(double z) {
    const double z2 = z * z;
    return z2 < 1.0 ? std::exp(-1.0 / (1.0 - z2)) : 0.0;
}

double periodic_distance(double a, double b, double period) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

double sup(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Slice interior_only(Slice s) {
    s.col(0).setZero();
    s.col(s.cols() - 1).setZero();
    return s;
}

}  // namespace

EllipticProblem EllipticProblem::zeros(double t, const XGrid& x, const YGrid& y, double c) {
    EllipticProblem p;
    p.t = t;
    p.c = Eigen::VectorXd::Constant(x.size(), c);
    p.f = Slice::Zero(x.size(), y.nodes());
    p.g = Eigen::VectorXd::Zero(x.size());
    p.h = Eigen::VectorXd::Zero(x.size());
    return p;
}

PartitionOfUnity::PartitionOfUnity(const XGrid& x, int patches_per_dim) : x_(x), per_dim_(patches_per_dim) {
    const int n = x.points_per_dim();
    require(patches_per_dim >= 1 && n % patches_per_dim == 0,
            "PartitionOfUnity: patch count must divide the points per dimension");
    const double period = x.period();
    radius_ = period / patches_per_dim;
    const int stride = n / patches_per_dim;

    // One-dimensional normalized weights phi_k with sum phi_k^2 = 1.
    std::vector<Eigen::VectorXd> phi1(patches_per_dim, Eigen::VectorXd::Zero(n));
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int k = 0; k < patches_per_dim; ++k) {
            const double d = periodic_distance(x.coord(i), x.coord(k * stride), period);
            phi1[k][i] = bump(d / radius_);
            total += phi1[k][i] * phi1[k][i];
        }
        const double norm = std::sqrt(total);
        for (int k = 0; k < patches_per_dim; ++k) phi1[k][i] /= norm;
    }

    if (x.n_dim() == 1) {
        for (int k = 0; k < patches_per_dim; ++k) {
            weights_.push_back(phi1[k]);
            centers_.push_back({x.coord(k * stride), 0.0});
            center_index_.push_back(k * stride);
        }
        return;
    }
    for (int a = 0; a < patches_per_dim; ++a)
        for (int b = 0; b < patches_per_dim; ++b) {
            Eigen::VectorXd w(x.size());
            for (int i = 0; i < x.size(); ++i) {
                const MultiIndex idx = x.multi_index(i);
                w[i] = phi1[a][idx[0]] * phi1[b][idx[1]];
            }
            weights_.push_back(std::move(w));
            centers_.push_back({x.coord(a * stride), x.coord(b * stride)});
            center_index_.push_back(x.flat({a * stride, b * stride}));
        }
}

PartitionOfUnity PartitionOfUnity::for_coefficient(const XGrid& x, const Eigen::VectorXd& c,
                                                   double max_oscillation) {
    int per_dim = 1;
    while (true) {
        PartitionOfUnity pou(x, per_dim);
        if (pou.oscillation(c) <= max_oscillation || 2 * per_dim > x.points_per_dim() / 2) return pou;
        per_dim *= 2;
    }
}

double PartitionOfUnity::oscillation(const Eigen::VectorXd& c) const {
    double worst = 0.0;
    for (int k = 0; k < patches(); ++k) {
        const Point ck = centers_[k];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int i = 0; i < x_.size(); ++i) {
            const Point p = x_.point(i);
            bool inside = true;
            for (int d = 0; d < x_.n_dim(); ++d)
                inside = inside && periodic_distance(p[d], ck[d], x_.period()) < radius_;
            if (!inside) continue;
            lo = std::min(lo, c[i]);
            hi = std::max(hi, c[i]);
        }
        worst = std::max(worst, (hi - lo) / c[center_index_[k]]);
    }
    return worst;
}

std::vector<double> PartitionOfUnity::frozen(const Eigen::VectorXd& c) const {
    std::vector<double> out(patches());
    for (int k = 0; k < patches(); ++k) out[k] = c[center_index_[k]];
    return out;
}

Slice elliptic_apply(double t, const Eigen::VectorXd& c, const Slice& u, const XGrid& x, const YGrid& y) {
    const double h2 = y.spacing() * y.spacing();
    const Slice lap = difference_laplacian(u, x);
    Slice out = Slice::Zero(u.rows(), u.cols());
    for (int i = 0; i < u.rows(); ++i) {
        const double kappa = 1.0 / (t * t * c[i] * c[i]);
        for (int j = 1; j + 1 < u.cols(); ++j)
            out(i, j) = -lap(i, j) - kappa * (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / h2;
    }
    return out;
}

EllipticResidual elliptic_residual(const EllipticProblem& p, const Slice& u, const XGrid& x, const YGrid& y) {
    const Slice au = elliptic_apply(p.t, p.c, u, x, y);
    Slice rf = interior_only(p.f - au);
    for (int i = 0; i < rf.rows(); ++i) rf.row(i) *= p.t * p.t * p.c[i] * p.c[i];
    EllipticResidual r;
    r.interior = sup(rf);
    r.bottom = (p.g - u.col(0)).cwiseAbs().maxCoeff();
    r.top = (p.t * p.h - top_derivative(u, y)).cwiseAbs().maxCoeff();
    return r;
}

Slice solve_constant(const EllipticProblem& p, const Spectral& spectral, const YGrid& y) {
    require(p.t > 0.0, "solve_constant: t must be positive");
    const double c = p.c[0];
    require((p.c.array() - c).abs().maxCoeff() <= 1e-14 * std::abs(c), "solve_constant: c must be constant");
    const double scale = p.t * p.t * c * c;
    const ComplexMatrix fh = spectral.forward_columns(p.f);
    const ComplexVector gh = spectral.forward(p.g);
    const ComplexVector hh = spectral.forward(p.h);
    const OperatorC op(y);
    ComplexMatrix out(fh.rows(), fh.cols());
    for (int k = 0; k < fh.rows(); ++k) {
        const Eigen::VectorXcd rhs = scale * fh.row(k).transpose();
        out.row(k) = op.solve(scale * spectral.difference_symbol(k), 1.0, rhs, gh[k], p.t * hh[k]).transpose();
    }
    return spectral.backward_columns(out);
}

namespace {

// Localized approximate inverse: sum_k phi_k S_{c_k}(c^2 phi_k rf / c_k^2, phi_k rg, phi_k rh).
Slice localized_inverse(double t, const Eigen::VectorXd& c, const Slice& rf, const Eigen::VectorXd& rg,
                        const Eigen::VectorXd& rh, const PartitionOfUnity& pou, const Spectral& spectral,
                        const YGrid& y) {
    const std::vector<double> frozen = pou.frozen(c);
    Slice total = Slice::Zero(rf.rows(), rf.cols());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < pou.patches(); ++k) {
        const Eigen::VectorXd& phi = pou.weight(k);
        const double ck = frozen[k];
        EllipticProblem patch;
        patch.t = t;
        patch.c = Eigen::VectorXd::Constant(c.size(), ck);
        patch.f = rf;
        for (int i = 0; i < rf.rows(); ++i) patch.f.row(i) *= phi[i] * c[i] * c[i] / (ck * ck);
        patch.g = phi.cwiseProduct(rg);
        patch.h = phi.cwiseProduct(rh);
        Slice w = solve_constant(patch, spectral, y);
        for (int i = 0; i < w.rows(); ++i) w.row(i) *= phi[i];
#pragma omp critical
        total += w;
    }
    return total;
}

}  // namespace

Slice solve_variable(const EllipticProblem& p, const PartitionOfUnity& pou, const Spectral& spectral,
                     const YGrid& y, const EllipticOptions& options, EllipticReport* report, const Slice* initial) {
    require(p.t > 0.0, "solve_variable: t must be positive");
    require(p.c.minCoeff() > 0.0, "solve_variable: coefficient must be positive");
    const XGrid& x = spectral.grid();
    Slice u = initial ? *initial : Slice::Zero(x.size(), y.nodes());

    Slice scaled_f = p.f;
    for (int i = 0; i < scaled_f.rows(); ++i) scaled_f.row(i) *= p.t * p.t * p.c[i] * p.c[i];
    double data_norm = sup(interior_only(scaled_f)) + p.g.cwiseAbs().maxCoeff() + p.t * p.h.cwiseAbs().maxCoeff();
    if (data_norm == 0.0) data_norm = 1.0;

    EllipticReport local;
    local.patches = pou.patches();
    for (int sweep = 0;; ++sweep) {
        const EllipticResidual r = elliptic_residual(p, u, x, y);
        const double rel = r.total() / data_norm;
        local.residual_history.push_back(rel);
        local.residual = rel;
        local.sweeps = sweep;
        if (rel <= options.tolerance) break;
        const auto& hist = local.residual_history;
        const std::size_t n = hist.size();
        if (n >= 3 && hist[n - 1] > hist[n - 2] && hist[n - 2] > hist[n - 3])
            throw ConvergenceError("solve_variable: residual grows, patches too coarse or t too large");
        if (sweep >= options.max_sweeps)
            throw ConvergenceError("solve_variable: no convergence in " + std::to_string(options.max_sweeps) +
                                   " sweeps (residual " + std::to_string(rel) + ")");
        const Slice rf = interior_only(p.f - elliptic_apply(p.t, p.c, u, x, y));
        const Eigen::VectorXd rg = p.g - u.col(0);
        const Eigen::VectorXd rh = p.h - top_derivative(u, y) / p.t;
        u += localized_inverse(p.t, p.c, rf, rg, rh, pou, spectral, y);
    }
    const auto& hist = local.residual_history;
    if (hist.size() >= 3 && hist[1] > 0.0)
        local.contraction = std::pow(hist.back() / hist[1], 1.0 / (hist.size() - 2));
    if (report) *report = local;
    return u;
}

Slice solve_direct(const EllipticProblem& p, const XGrid& x, const YGrid& y) {
    require(p.t > 0.0, "solve_direct: t must be positive");
    StripCoefficients coeffs;
    coeffs.kappa = (p.t * p.t * p.c.array().square()).inverse().matrix();
    const StripSystem system(x, y, coeffs);
    return system.solve(p.f, p.g, p.t * p.h);
}

double commutator_factor(double t, const Eigen::VectorXd& c, const PartitionOfUnity& pou, const Spectral& spectral,
                         const YGrid& y, int iterations, unsigned seed) {
    const XGrid& x = spectral.grid();
    const std::vector<double> frozen = pou.frozen(c);
    auto defect = [&](const Slice& data) {
        Slice total = Slice::Zero(data.rows(), data.cols());
        for (int k = 0; k < pou.patches(); ++k) {
            const Eigen::VectorXd& phi = pou.weight(k);
            const double ck = frozen[k];
            EllipticProblem patch = EllipticProblem::zeros(t, x, y, ck);
            patch.f = data;
            for (int i = 0; i < data.rows(); ++i) patch.f.row(i) *= phi[i] / (t * t * ck * ck);
            const Slice w = solve_constant(patch, spectral, y);
            Slice phi_w = w;
            for (int i = 0; i < w.rows(); ++i) phi_w.row(i) *= phi[i];
            Slice comm = -difference_laplacian(phi_w, x);
            const Slice lap_w = difference_laplacian(w, x);
            for (int i = 0; i < w.rows(); ++i) comm.row(i) += phi[i] * lap_w.row(i);
            total += t * t * ck * ck * comm;
        }
        return interior_only(total);
    };
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Slice v(x.size(), y.nodes());
    for (int i = 0; i < v.size(); ++i) v.data()[i] = dist(rng);
    v = interior_only(v);
    v /= v.norm();
    double ratio = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Slice w = defect(v);
        ratio = w.norm();
        if (ratio == 0.0) return 0.0;
        v = w / ratio;
    }
    return ratio;
}

EllipticPath parse_elliptic_path(const std::string& name) {
    if (name == "constant") return EllipticPath::Constant;
    if (name == "variable") return EllipticPath::Variable;
    if (name == "direct" || name == "oracle") return EllipticPath::Direct;
    throw DomainError("unknown elliptic path '" + name + "' (expected constant, variable or direct)");
}

std::string to_string(EllipticPath path) {
    switch (path) {
        case EllipticPath::Constant: return "constant";
        case EllipticPath::Variable: return "variable";
        case EllipticPath::Direct: return "direct";
    }
    return "unknown";
}

EllipticSolver::EllipticSolver(const XGrid& x, const YGrid& y, Eigen::VectorXd c, EllipticPath path,
                               EllipticOptions options)
    : x_(x),
      y_(y),
      c_(std::move(c)),
      path_(path),
      options_(options),
      spectral_(std::make_shared<Spectral>(x)),
      pou_(PartitionOfUnity::for_coefficient(x, c_, options.max_oscillation)) {
    require(c_.size() == x.size(), "EllipticSolver: coefficient has wrong size");
    require(c_.minCoeff() > 0.0, "EllipticSolver: coefficient must be positive");
    if (path_ == EllipticPath::Constant)
        require(c_.maxCoeff() - c_.minCoeff() <= 1e-14 * c_.maxCoeff(),
                "EllipticSolver: constant path needs a constant coefficient");
}

Slice EllipticSolver::solve(double t, const Slice& f, const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                            EllipticReport* report) const {
    EllipticProblem p;
    p.t = t;
    p.c = c_;
    p.f = f;
    p.g = g;
    p.h = h;
    switch (path_) {
        case EllipticPath::Constant: return solve_constant(p, *spectral_, y_);
        case EllipticPath::Variable: return solve_variable(p, pou_, *spectral_, y_, options_, report);
        case EllipticPath::Direct: return solve_direct(p, x_, y_);
    }
    return {};
}

EllipticSolver::BoundaryParts EllipticSolver::boundary_parts(double t, const Eigen::VectorXd& g,
                                                             const Eigen::VectorXd& h) const {
    const Slice zero = Slice::Zero(x_.size(), y_.nodes());
    const Eigen::VectorXd none = Eigen::VectorXd::Zero(x_.size());
    return {solve(t, zero, g, none), solve(t, zero, none, h)};
}

}  // namespace fbp
