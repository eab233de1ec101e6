#include "fbp/holder.hpp"

#include <cmath>
#include <limits>

#include "fbp/error.hpp"

namespace fbp {

namespace {

TimeSamples as_samples(const std::vector<double>& values) {
    TimeSamples out;
    out.reserve(values.size());
    for (double v : values) out.push_back(Eigen::VectorXd::Constant(1, v));
    return out;
}

TimeSamples weighted(const std::vector<double>& times, const TimeSamples& values, double gamma) {
    TimeSamples out = values;
    if (gamma == 0.0) return out;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= std::pow(times[k], gamma);
    return out;
}

TimeSamples shifted_to_zero(const TimeSamples& values) {
    TimeSamples out = values;
    for (auto& v : out) v -= values.front();
    return out;
}

TimeSamples product(const TimeSamples& f, const TimeSamples& g) {
    TimeSamples out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k].cwiseProduct(g[k]);
    return out;
}

// Growth like t^{-a} with a > 0.1 over the first few levels marks the sup as infinite.
bool grows_at_start(const std::vector<double>& times, const std::vector<double>& sups) {
    const std::size_t n = std::min<std::size_t>(5, times.size());
    if (n < 3) return false;
    std::vector<double> t(times.begin(), times.begin() + n), s(sups.begin(), sups.begin() + n);
    for (double v : s)
        if (!(v > 0.0)) return false;
    return loglog_slope(t, s) < -0.1;
}

}  // namespace

double holder_seminorm(const std::vector<double>& times, const TimeSamples& values, double exponent) {
    require(times.size() == values.size(), "holder_seminorm: size mismatch");
    require(times.size() >= 2, "holder_seminorm: need at least two levels");
    double best = 0.0;
    for (std::size_t a = 0; a < times.size(); ++a)
        for (std::size_t b = a + 1; b < times.size(); ++b) {
            const double dt = std::abs(times[b] - times[a]);
            if (dt == 0.0) continue;
            const double diff = (values[b] - values[a]).lpNorm<Eigen::Infinity>();
            best = std::max(best, diff / std::pow(dt, exponent));
        }
    return best;
}

double holder_seminorm(const std::vector<double>& times, const std::vector<double>& values, double exponent) {
    return holder_seminorm(times, as_samples(values), exponent);
}

HolderNormReport singular_holder_norm(const std::vector<double>& times, const TimeSamples& values,
                                      const HolderParams& params) {
    require(params.lipschitz || (params.beta > 0.0 && params.beta < 1.0),
            "singular_holder_norm: beta must lie in (0, 1)");
    if (params.gamma != 0.0)
        for (double t : times) require(t > 0.0, "singular_holder_norm: time levels must exclude 0");
    const double exponent = params.exponent();
    HolderNormReport report;
    report.beta = exponent;
    report.gamma = params.gamma;
    const TimeSamples sup_samples = weighted(times, values, std::min(params.gamma, 0.0));
    const std::vector<double> sups = level_sup_norms(sup_samples);
    report.sup_norm = *std::max_element(sups.begin(), sups.end());
    report.seminorm = holder_seminorm(times, values, exponent);
    report.weighted_seminorm =
        params.gamma == 0.0 ? report.seminorm : holder_seminorm(times, weighted(times, values, params.gamma), exponent);
    if (times.front() > 0.0 && grows_at_start(times, sups)) {
        report.unbounded = true;
        report.sup_norm = std::numeric_limits<double>::infinity();
    }
    report.total = report.sup_norm + (params.gamma == 0.0 ? report.seminorm : report.weighted_seminorm);
    return report;
}

HolderNormReport singular_holder_norm(const std::vector<double>& times, const std::vector<double>& values,
                                      const HolderParams& params) {
    return singular_holder_norm(times, as_samples(values), params);
}

double weighted_holder_norm(const std::vector<double>& times, const TimeSamples& values, double beta,
                            double gamma) {
    const TimeSamples sup_samples = weighted(times, values, std::min(gamma, 0.0));
    const std::vector<double> sups = level_sup_norms(sup_samples);
    const double sup = *std::max_element(sups.begin(), sups.end());
    return sup + holder_seminorm(times, weighted(times, values, gamma), beta);
}

std::array<double, 4> product_ratios(const std::vector<double>& times, const TimeSamples& f,
                                     const TimeSamples& g, double alpha, double beta) {
    require(beta <= alpha, "product check: need beta <= alpha");
    const TimeSamples f0 = shifted_to_zero(f);
    const TimeSamples g0 = shifted_to_zero(g);
    auto norm = [&](const TimeSamples& v, double exponent, double gamma) {
        return weighted_holder_norm(times, v, exponent, gamma);
    };
    auto ratio = [](double num, double den) {
        return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    };
    return {
        ratio(norm(product(f, g), beta, beta), norm(f, alpha, alpha) * norm(g, beta, beta)),
        ratio(norm(product(f, g0), beta, 0.0), norm(f, alpha, alpha) * norm(g0, beta, 0.0)),
        ratio(norm(product(f0, g0), beta, -alpha), norm(f0, alpha, 0.0) * norm(g0, beta, 0.0)),
        ratio(norm(product(f0, g), beta, beta - alpha), norm(f0, alpha, 0.0) * norm(g, beta, beta)),
    };
}

ProductRatios product_inequality_check(const std::vector<double>& times, const std::vector<TimeSamples>& f,
                                       const std::vector<TimeSamples>& g, double alpha, double beta) {
    require(beta <= alpha, "product check: need beta <= alpha");
    require(f.size() == g.size(), "product check: trial count mismatch");
    ProductRatios out;
    for (std::size_t trial = 0; trial < f.size(); ++trial) {
        const auto r = product_ratios(times, f[trial], g[trial], alpha, beta);
        for (int i = 0; i < 4; ++i) {
            if (std::isnan(r[i])) {
                ++out.skipped;
                continue;
            }
            out.max_ratio[i] = std::max(out.max_ratio[i], r[i]);
            ++out.counted[i];
        }
    }
    return out;
}

std::vector<double> level_sup_norms(const TimeSamples& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(v.lpNorm<Eigen::Infinity>());
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need two matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fbp
