#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace fbp {

/// Four-point Lagrange interpolation on increasing, possibly non-uniform
/// nodes. The stencil is clamped at the ends, so values outside
/// [nodes.front(), nodes.back()] are extrapolated from the end cells.
inline double cubic_interpolate(std::span<const double> nodes, std::span<const double> values,
                                double x) {
    const int n = static_cast<int>(nodes.size());
    if (n == 1) return values[0];
    if (n < 4) {
        // Linear fallback for tiny tables.
        int i = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin()) - 1;
        i = std::clamp(i, 0, n - 2);
        const double w = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }
    int i = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin()) - 1;
    const int start = std::clamp(i - 1, 0, n - 4);
    double result = 0.0;
    for (int a = start; a < start + 4; ++a) {
        double w = 1.0;
        for (int b = start; b < start + 4; ++b)
            if (b != a) w *= (x - nodes[b]) / (nodes[a] - nodes[b]);
        result += w * values[a];
    }
    return result;
}

/// Lagrange weights of the 4-point stencil around x on a uniform periodic
/// grid with spacing h. Returns the first stencil index (may be negative or
/// >= n; callers wrap) and fills w[0..3].
inline int periodic_cubic_weights(double x, double h, double w[4]) {
    const double s = x / h;
    const int i = static_cast<int>(std::floor(s));
    const double f = s - i;  // in [0, 1)
    // Nodes at offsets -1, 0, 1, 2 relative to i.
    w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
    w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
    w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
    return i - 1;
}

inline int wrap_index(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

}  // namespace fbp
