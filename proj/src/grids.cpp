#include "fbp/grids.hpp"

#include <cmath>
#include <vector>

#include "fbp/error.hpp"
#include "fbp/interp.hpp"

namespace fbp {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

XGrid::XGrid(int n_dim, int points_per_dim, double period)
    : n_dim_(n_dim), points_(points_per_dim), period_(period) {
    require(n_dim == 1 || n_dim == 2, "XGrid: n_dim must be 1 or 2");
    require(is_power_of_two(points_per_dim) && points_per_dim >= 4,
            "XGrid: points per dimension must be a power of two >= 4, got " +
                std::to_string(points_per_dim));
    require(period > 0.0, "XGrid: period must be positive");
}

Point XGrid::point(int flat_index) const {
    const MultiIndex idx = multi_index(flat_index);
    return {coord(idx[0]), n_dim_ == 2 ? coord(idx[1]) : 0.0};
}

MultiIndex XGrid::multi_index(int flat_index) const {
    if (n_dim_ == 1) return {flat_index, 0};
    return {flat_index / points_, flat_index % points_};
}

int XGrid::flat(MultiIndex idx) const {
    const int i0 = wrap_index(idx[0], points_);
    if (n_dim_ == 1) return i0;
    return i0 * points_ + wrap_index(idx[1], points_);
}

int XGrid::neighbor(int flat_index, int dim, int offset) const {
    MultiIndex idx = multi_index(flat_index);
    idx[dim] += offset;
    return flat(idx);
}

int XGrid::integer_wavenumber(int slot) const { return slot < points_ / 2 ? slot : slot - points_; }

std::vector<double> XGrid::wavenumbers() const {
    std::vector<double> k(points_);
    const double base = 2.0 * M_PI / period_;
    for (int j = 0; j < points_; ++j) k[j] = base * integer_wavenumber(j);
    return k;
}

Eigen::VectorXd XGrid::sample(const std::function<double(const Point&)>& f) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = f(point(i));
    return out;
}

YGrid::YGrid(int interior) : m_(interior) {
    require(interior >= 3, "YGrid: need at least 3 interior nodes");
}

Eigen::VectorXd YGrid::node_values() const {
    Eigen::VectorXd y(nodes());
    for (int j = 0; j < nodes(); ++j) y[j] = node(j);
    y[nodes() - 1] = 1.0;
    return y;
}

TimeGrid::TimeGrid(double t0, double horizon, int steps, double grading) : grading_(grading) {
    require(t0 > 0.0, "TimeGrid: t0 must be positive");
    require(horizon > t0, "TimeGrid: need t0 < T");
    require(steps >= 1, "TimeGrid: need at least one step");
    require(grading >= 1.0, "TimeGrid: grading exponent must be >= 1");
    levels_.resize(steps + 1);
    for (int k = 0; k <= steps; ++k)
        levels_[k] = t0 + (horizon - t0) * std::pow(static_cast<double>(k) / steps, grading);
    levels_.back() = horizon;
}

TimeGrid TimeGrid::from_levels(std::vector<double> levels) {
    require(levels.size() >= 2, "TimeGrid: need at least two levels");
    require(levels.front() > 0.0, "TimeGrid: levels must be positive");
    for (std::size_t k = 1; k < levels.size(); ++k)
        require(levels[k] > levels[k - 1], "TimeGrid: levels must be strictly increasing");
    TimeGrid grid;
    grid.levels_ = std::move(levels);
    return grid;
}

Grids make_grids(const GridConfig& config) {
    return {XGrid(config.n_dim, config.x_points, config.period), YGrid(config.y_interior),
            TimeGrid(config.t0, config.horizon, config.steps, config.grading)};
}

StripField StripField::zeros(const XGrid& x, const YGrid& y, const std::vector<double>& times) {
    StripField field;
    field.times = times;
    field.slices.assign(times.size(), Slice::Zero(x.size(), y.nodes()));
    return field;
}

PhysicalField to_physical(const StripField& u, const SurfaceField& s, const YGrid& y) {
    require(u.levels() == s.levels(), "to_physical: level count mismatch");
    const Eigen::VectorXd eta = y.node_values();
    PhysicalField phys;
    phys.times = u.times;
    for (int k = 0; k < u.levels(); ++k) {
        const Eigen::VectorXd& sk = s.values[k];
        require((sk.array() > 0.0).all(), "to_physical: front height must be positive");
        Eigen::MatrixXd heights = sk * eta.transpose();
        phys.heights.push_back(std::move(heights));
        phys.values.push_back(u.slices[k]);
    }
    return phys;
}

StripField to_fixed(const PhysicalField& phys, const SurfaceField& s, const YGrid& y) {
    require(phys.values.size() == s.values.size(), "to_fixed: level count mismatch");
    const Eigen::VectorXd eta = y.node_values();
    StripField out;
    out.times = phys.times;
    for (std::size_t k = 0; k < phys.values.size(); ++k) {
        const Eigen::MatrixXd& heights = phys.heights[k];
        const Eigen::MatrixXd& values = phys.values[k];
        require((s.values[k].array() > 0.0).all(), "to_fixed: front height must be positive");
        Slice slice(values.rows(), y.nodes());
        std::vector<double> col_h(heights.cols()), col_v(values.cols());
        for (int i = 0; i < values.rows(); ++i) {
            for (int j = 0; j < heights.cols(); ++j) {
                col_h[j] = heights(i, j);
                col_v[j] = values(i, j);
            }
            for (int j = 0; j < y.nodes(); ++j)
                slice(i, j) = cubic_interpolate(col_h, col_v, eta[j] * s.values[k][i]);
        }
        out.slices.push_back(std::move(slice));
    }
    return out;
}

}  // namespace fbp
