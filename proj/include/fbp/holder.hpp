#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace fbp {

/// Time-indexed samples: one vector (a flattened field, or a single value) per level.
using TimeSamples = std::vector<Eigen::VectorXd>;

struct HolderParams {
    double beta = 0.5;
    /// Weight exponent of the seminorm. 0 gives the plain space, beta the
    /// singular space; negative values give the weighted spaces with
    /// negative lower index.
    double gamma = 0.0;
    /// Lipschitz convention: the exponent is taken as 1.
    bool lipschitz = false;

    double exponent() const { return lipschitz ? 1.0 : beta; }
};

struct HolderNormReport {
    double beta = 0.0;
    double gamma = 0.0;
    double sup_norm = 0.0;
    double seminorm = 0.0;
    double weighted_seminorm = 0.0;
    double total = 0.0;
    /// Set when the samples grow like a negative power of t near the first level.
    bool unbounded = false;
};

/// max over level pairs of |u(t) - u(s)|_inf / |t - s|^exponent.
double holder_seminorm(const std::vector<double>& times, const TimeSamples& values, double exponent);
double holder_seminorm(const std::vector<double>& times, const std::vector<double>& values, double exponent);

/// Plain and weighted norms. The weighted seminorm is that of t -> t^gamma u(t);
/// the sup part is of t^{min(gamma, 0)} u. For gamma = 0 the total is
/// sup + plain seminorm, otherwise sup + weighted seminorm.
/// Throws DomainError when a level is <= 0 and gamma != 0.
HolderNormReport singular_holder_norm(const std::vector<double>& times, const TimeSamples& values,
                                      const HolderParams& params);
HolderNormReport singular_holder_norm(const std::vector<double>& times, const std::vector<double>& values,
                                      const HolderParams& params);

/// Norm with weight exponent gamma; convenience wrapper returning the total.
double weighted_holder_norm(const std::vector<double>& times, const TimeSamples& values, double beta,
                            double gamma);

/// The four product maps, in order:
///   (alpha, alpha) x (beta, beta) -> (beta, beta)
///   (alpha, alpha) x (beta, 0)    -> (beta, 0)
///   (alpha, 0)     x (beta, 0)    -> (beta, -alpha)
///   (alpha, 0)     x (beta, beta) -> (beta, beta - alpha)
/// Factors entering a vanishing-at-start class are shifted by their first
/// sample so that f(t0) = 0.
struct ProductRatios {
    std::array<double, 4> max_ratio{0.0, 0.0, 0.0, 0.0};
    std::array<int, 4> counted{0, 0, 0, 0};
    int skipped = 0;
};

std::array<double, 4> product_ratios(const std::vector<double>& times, const TimeSamples& f,
                                     const TimeSamples& g, double alpha, double beta);

/// Max over trials of each ratio. Trials with a zero denominator are skipped.
/// Throws DomainError when beta > alpha.
ProductRatios product_inequality_check(const std::vector<double>& times, const std::vector<TimeSamples>& f,
                                       const std::vector<TimeSamples>& g, double alpha, double beta);

/// Sup norm of each level.
std::vector<double> level_sup_norms(const TimeSamples& values);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fbp
