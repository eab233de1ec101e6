#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fbp {

using Point = std::array<double, 2>;
using MultiIndex = std::array<int, 2>;

/// One time level of a strip quantity: rows are flattened x points, columns
/// are y nodes 0..m+1 (both boundary nodes included).
using Slice = Eigen::MatrixXd;

/// Periodic grid on the box [0, L)^n, n in {1, 2}.
class XGrid {
public:
    XGrid() = default;
    XGrid(int n_dim, int points_per_dim, double period);

    int n_dim() const { return n_dim_; }
    int points_per_dim() const { return points_; }
    double period() const { return period_; }
    double spacing() const { return period_ / points_; }
    int size() const { return n_dim_ == 1 ? points_ : points_ * points_; }

    double coord(int i) const { return i * spacing(); }
    Point point(int flat) const;
    MultiIndex multi_index(int flat) const;
    int flat(MultiIndex idx) const;
    int neighbor(int flat, int dim, int offset) const;

    /// Integer wavenumber stored in FFT slot j (0..N/2-1, then -N/2..-1).
    int integer_wavenumber(int slot) const;
    /// Physical wavenumbers 2*pi*k/L in FFT order, one dimension.
    std::vector<double> wavenumbers() const;

    Eigen::VectorXd sample(const std::function<double(const Point&)>& f) const;

private:
    int n_dim_ = 1;
    int points_ = 0;
    double period_ = 0.0;
};

/// Uniform nodes on [0, 1]: y_0 = 0 (fixed boundary), y_{m+1} = 1 (moving
/// boundary after the domain-fixing transform), m interior nodes.
class YGrid {
public:
    YGrid() = default;
    explicit YGrid(int interior);

    int interior() const { return m_; }
    int nodes() const { return m_ + 2; }
    double spacing() const { return 1.0 / (m_ + 1); }
    double node(int j) const { return j * spacing(); }
    Eigen::VectorXd node_values() const;

private:
    int m_ = 0;
};

/// Graded levels t_k = t0 + (T - t0) (k/N)^q, k = 0..N.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double t0, double horizon, int steps, double grading);
    static TimeGrid from_levels(std::vector<double> levels);

    double t0() const { return levels_.front(); }
    double horizon() const { return levels_.back(); }
    int steps() const { return static_cast<int>(levels_.size()) - 1; }
    double grading() const { return grading_; }
    const std::vector<double>& levels() const { return levels_; }
    double operator[](int k) const { return levels_[k]; }

private:
    std::vector<double> levels_;
    double grading_ = 1.0;
};

struct GridConfig {
    int n_dim = 1;
    int x_points = 64;
    double period = 6.283185307179586;
    int y_interior = 32;
    double t0 = 1e-3;
    double horizon = 0.5;
    int steps = 100;
    double grading = 2.0;
};

struct Grids {
    XGrid x;
    YGrid y;
    TimeGrid time;
};

Grids make_grids(const GridConfig& config);

/// u(t, x, y) on the fixed strip, one Slice per time level.
struct StripField {
    std::vector<double> times;
    std::vector<Slice> slices;

    int levels() const { return static_cast<int>(slices.size()); }
    static StripField zeros(const XGrid& x, const YGrid& y, const std::vector<double>& times);
};

/// Front height s(t, x) and its time derivative.
struct SurfaceField {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    std::vector<Eigen::VectorXd> dot_values;

    int levels() const { return static_cast<int>(values.size()); }
};

/// Samples of u on the physical domain {0 < y < s(t, x)}: per level, a
/// (points x nodes) matrix of heights and one of values.
struct PhysicalField {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> heights;
    std::vector<Eigen::MatrixXd> values;
};

/// Inverse of the domain-fixing change of variables: node eta_j of column x
/// is placed at physical height eta_j * s(t, x).
PhysicalField to_physical(const StripField& u, const SurfaceField& s, const YGrid& y);

/// Forward map: resample physical columns at heights eta_j * s(t, x) by
/// local cubic interpolation.
StripField to_fixed(const PhysicalField& phys, const SurfaceField& s, const YGrid& y);

}  // namespace fbp
