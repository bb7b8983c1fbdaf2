#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frachill/error.hpp"

namespace frachill {

/// Uniform cell-centred collocation grid on the box prod_i (0, L_i), d in {1, 2}.
///
/// Node j along axis i sits at (j + 1/2) L_i / n_i. Values are stored row-major
/// (x is the slow axis). The discrete inner product is
///     (u, v)_h = w * sum_j u_j v_j,   w = |Omega| / prod n_i.
class GridSpec {
public:
    GridSpec() = default;

    static GridSpec line(double length, std::size_t n) { return GridSpec(1, {length, 1.0}, {n, 1}); }

    static GridSpec box(double lx, double ly, std::size_t nx, std::size_t ny) {
        return GridSpec(2, {lx, ly}, {nx, ny});
    }

    GridSpec(int dimension, std::array<double, 2> extents, std::array<std::size_t, 2> points)
        : dim_(dimension), extents_(extents), points_(points) {
        if (dim_ != 1 && dim_ != 2) {
            throw ConfigError("unsupported dimension " + std::to_string(dim_) + " (expected 1 or 2)");
        }
        if (dim_ == 1) {
            extents_[1] = 1.0;
            points_[1] = 1;
        }
        for (int a = 0; a < dim_; ++a) {
            if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a])) {
                throw ConfigError("grid extent must be positive and finite");
            }
            if (points_[a] < 2) {
                throw ConfigError("grid needs at least 2 points per axis");
            }
        }
    }

    int dimension() const noexcept { return dim_; }
    double extent(int axis) const { return extents_.at(axis); }
    std::size_t points(int axis) const { return points_.at(axis); }
    std::size_t size() const noexcept { return points_[0] * points_[1]; }
    double volume() const noexcept { return dim_ == 1 ? extents_[0] : extents_[0] * extents_[1]; }
    double weight() const noexcept { return volume() / static_cast<double>(size()); }

    /// Coordinate of node j along the axis.
    double node(int axis, std::size_t j) const {
        return (static_cast<double>(j) + 0.5) * extents_.at(axis) / static_cast<double>(points_.at(axis));
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int dim_ = 1;
    std::array<double, 2> extents_{1.0, 1.0};
    std::array<std::size_t, 2> points_{2, 1};
};

/// Grid function: one value per collocation node.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
    Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw ConfigError("field length " + std::to_string(values_.size()) + " does not match grid size " +
                              std::to_string(grid_.size()));
        }
    }

    /// Samples fn(x, y) at the nodes (y = 0 in 1-D).
    static Field sample(const GridSpec& grid, const std::function<double(double, double)>& fn) {
        Field f(grid);
        const std::size_t ny = grid.points(1);
        for (std::size_t i = 0; i < grid.points(0); ++i) {
            const double x = grid.node(0, i);
            for (std::size_t j = 0; j < ny; ++j) {
                const double y = grid.dimension() == 2 ? grid.node(1, j) : 0.0;
                f.values_[i * ny + j] = fn(x, y);
            }
        }
        return f;
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    Field& operator+=(const Field& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    /// this += s * o
    Field& axpy(double s, const Field& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }

    void check_same(const Field& o) const {
        if (!(grid_ == o.grid_)) throw ConfigError("grid mismatch between fields");
    }

    friend bool operator==(const Field&, const Field&) = default;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Pointwise product.
inline Field hadamard(const Field& a, const Field& b) {
    a.check_same(b);
    Field out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

/// Applies fn to every nodal value.
template <class Fn>
Field map_values(const Field& a, Fn&& fn) {
    Field out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
    return out;
}

inline double inner(const Field& a, const Field& b) {
    a.check_same(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return a.grid().weight() * s;
}

inline double norm(const Field& a) { return std::sqrt(inner(a, a)); }

inline double max_abs(const Field& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

/// Quadrature of a field over Omega.
inline double integral(const Field& a) {
    return a.grid().weight() * std::accumulate(a.values().begin(), a.values().end(), 0.0);
}

inline double mean(const Field& a) { return integral(a) / a.grid().volume(); }

}  // namespace frachill
