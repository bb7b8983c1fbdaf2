#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frachill/error.hpp"
#include "frachill/grid.hpp"

namespace frachill {

enum class BoundaryCondition { neumann, dirichlet };

inline std::string_view to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::neumann ? "neumann" : "dirichlet";
}

inline BoundaryCondition parse_boundary_condition(std::string_view s) {
    if (s == "neumann") return BoundaryCondition::neumann;
    if (s == "dirichlet") return BoundaryCondition::dirichlet;
    throw ConfigError("unknown boundary condition '" + std::string(s) + "'");
}

namespace detail {

// FFTW's planner is not reentrant; execution with new-array functions is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct TransformPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    TransformPlans() = default;
    TransformPlans(const TransformPlans&) = delete;
    TransformPlans& operator=(const TransformPlans&) = delete;
    ~TransformPlans() {
        std::lock_guard lock(fftw_planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

}  // namespace detail

/// Coefficients c_j = (v, e_j)_h, indexed by the sorted mode index j
/// (eigenvalues nondecreasing, ties in natural transform order).
struct ModeCoeffs {
    GridSpec grid;
    BoundaryCondition bc = BoundaryCondition::neumann;
    std::vector<double> coeffs;
};

/// -Laplacian on the box with homogeneous Neumann or Dirichlet conditions,
/// truncated to as many modes as grid nodes.
///
/// Neumann modes are products of cos(k pi x / L), k = 0..n-1; Dirichlet modes
/// products of sin(k pi x / L), k = 1..n. On the cell-centred grid both
/// families are exactly orthogonal under the uniform-weight inner product, so
/// the eigenfunctions are normalised in (.,.)_h and the DCT-II/DST-II pair
/// realises the expansion. Eigenvalues are the continuous ones,
/// sum_i (k_i pi / L_i)^2.
///
/// Internally everything runs in the natural transform layout
/// (index kx * ny + ky); the sorted ordering is exposed through
/// mode_order() and the ModeCoeffs API.
class SpectralOperator {
public:
    SpectralOperator(const GridSpec& grid, BoundaryCondition bc) : grid_(grid), bc_(bc) {
        const int d = grid_.dimension();
        if (d != 1 && d != 2) throw ConfigError("unsupported dimension");
        const std::size_t nx = grid_.points(0);
        const std::size_t ny = grid_.points(1);

        std::array<std::vector<double>, 2> lam_axis, fwd_axis, bwd_axis;
        for (int a = 0; a < 2; ++a) {
            const std::size_t n = grid_.points(a);
            const double L = grid_.extent(a);
            lam_axis[a].resize(n);
            fwd_axis[a].resize(n);
            bwd_axis[a].resize(n);
            if (a == 1 && d == 1) {
                lam_axis[a][0] = 0.0;
                fwd_axis[a][0] = 1.0;
                bwd_axis[a][0] = 1.0;
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (bc_ == BoundaryCondition::neumann) {
                    const double kk = static_cast<double>(k) * std::numbers::pi / L;
                    lam_axis[a][k] = kk * kk;
                    const double c = (k == 0) ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
                    fwd_axis[a][k] = c / 2.0;
                    bwd_axis[a][k] = (k == 0) ? c : c / 2.0;
                } else {
                    const double m = static_cast<double>(k + 1);
                    const double kk = m * std::numbers::pi / L;
                    lam_axis[a][k] = kk * kk;
                    const double c = (k + 1 == n) ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
                    fwd_axis[a][k] = c / 2.0;
                    bwd_axis[a][k] = (k + 1 == n) ? c : c / 2.0;
                }
            }
        }

        const std::size_t N = grid_.size();
        eig_.resize(N);
        fwd_scale_.resize(N);
        bwd_scale_.resize(N);
        const double w = grid_.weight();
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t k = i * ny + j;
                eig_[k] = lam_axis[0][i] + lam_axis[1][j];
                fwd_scale_[k] = w * fwd_axis[0][i] * fwd_axis[1][j];
                bwd_scale_[k] = bwd_axis[0][i] * bwd_axis[1][j];
            }
        }
        order_.resize(N);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return eig_[a] < eig_[b]; });

        make_plans();
    }

    const GridSpec& grid() const noexcept { return grid_; }
    BoundaryCondition bc() const noexcept { return bc_; }
    std::size_t mode_count() const noexcept { return eig_.size(); }

    /// Eigenvalues in natural transform layout.
    std::span<const double> eigenvalues_natural() const noexcept { return eig_; }

    /// Natural index of the j-th smallest eigenvalue.
    std::span<const std::size_t> mode_order() const noexcept { return order_; }

    /// Eigenvalues sorted nondecreasing.
    std::vector<double> eigenvalues() const {
        std::vector<double> out(eig_.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = eig_[order_[j]];
        return out;
    }

    /// lambda_k^exponent in natural layout, with 0^exponent := 0.
    std::vector<double> powers(double exponent) const {
        check_exponent(exponent);
        std::vector<double> out(eig_.size());
        for (std::size_t k = 0; k < eig_.size(); ++k) out[k] = eig_[k] > 0.0 ? std::pow(eig_[k], exponent) : 0.0;
        return out;
    }

    /// Natural-layout coefficients (v, e_k)_h.
    std::vector<double> forward(std::span<const double> values) const {
        check_length(values.size());
        std::vector<double> in(values.begin(), values.end());
        std::vector<double> out(values.size());
        fftw_execute_r2r(plans_->forward, in.data(), out.data());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] *= fwd_scale_[k];
        return out;
    }

    /// Grid values of sum_k c_k e_k from natural-layout coefficients.
    std::vector<double> backward(std::span<const double> coeffs) const {
        check_length(coeffs.size());
        std::vector<double> in(coeffs.size());
        for (std::size_t k = 0; k < in.size(); ++k) in[k] = coeffs[k] * bwd_scale_[k];
        std::vector<double> out(coeffs.size());
        fftw_execute_r2r(plans_->backward, in.data(), out.data());
        return out;
    }

    /// sum_k m_k (v, e_k) e_k for a natural-layout multiplier.
    Field apply_multiplier(const Field& v, std::span<const double> multiplier) const {
        check_grid(v);
        auto c = forward(v.values());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] *= multiplier[k];
        return Field(grid_, backward(c));
    }

    void check_grid(const Field& v) const {
        if (!(v.grid() == grid_)) throw ConfigError("field grid does not match operator grid");
    }

    static void check_exponent(double exponent) {
        if (!(exponent > 0.0) || !std::isfinite(exponent)) {
            throw ConfigError("fractional exponent must be positive and finite");
        }
    }

private:
    void check_length(std::size_t n) const {
        if (n != grid_.size()) throw ConfigError("array length does not match operator grid");
    }

    void make_plans() {
        const fftw_r2r_kind fk = bc_ == BoundaryCondition::neumann ? FFTW_REDFT10 : FFTW_RODFT10;
        const fftw_r2r_kind bk = bc_ == BoundaryCondition::neumann ? FFTW_REDFT01 : FFTW_RODFT01;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
        std::vector<double> a(grid_.size()), b(grid_.size());
        auto plans = std::make_shared<detail::TransformPlans>();
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (grid_.dimension() == 1) {
            const int n = static_cast<int>(grid_.points(0));
            plans->forward = fftw_plan_r2r_1d(n, a.data(), b.data(), fk, flags);
            plans->backward = fftw_plan_r2r_1d(n, a.data(), b.data(), bk, flags);
        } else {
            const int n0 = static_cast<int>(grid_.points(0));
            const int n1 = static_cast<int>(grid_.points(1));
            plans->forward = fftw_plan_r2r_2d(n0, n1, a.data(), b.data(), fk, fk, flags);
            plans->backward = fftw_plan_r2r_2d(n0, n1, a.data(), b.data(), bk, bk, flags);
        }
        if (!plans->forward || !plans->backward) throw ConfigError("FFTW could not create a transform plan");
        plans_ = std::move(plans);
    }

    GridSpec grid_;
    BoundaryCondition bc_;
    std::vector<double> eig_;
    std::vector<double> fwd_scale_;
    std::vector<double> bwd_scale_;
    std::vector<std::size_t> order_;
    std::shared_ptr<const detail::TransformPlans> plans_;
};

inline SpectralOperator build_operator(const GridSpec& grid, BoundaryCondition bc) {
    return SpectralOperator(grid, bc);
}

inline ModeCoeffs to_modes(const SpectralOperator& op, const Field& v) {
    op.check_grid(v);
    const auto nat = op.forward(v.values());
    ModeCoeffs out{op.grid(), op.bc(), std::vector<double>(nat.size())};
    const auto order = op.mode_order();
    for (std::size_t j = 0; j < nat.size(); ++j) out.coeffs[j] = nat[order[j]];
    return out;
}

inline Field from_modes(const SpectralOperator& op, const ModeCoeffs& c) {
    if (!(c.grid == op.grid()) || c.bc != op.bc() || c.coeffs.size() != op.mode_count()) {
        throw ConfigError("mode coefficients do not belong to this operator");
    }
    std::vector<double> nat(c.coeffs.size());
    const auto order = op.mode_order();
    for (std::size_t j = 0; j < nat.size(); ++j) nat[order[j]] = c.coeffs[j];
    return Field(op.grid(), op.backward(nat));
}

/// A^exponent v.
inline Field apply_fractional(const SpectralOperator& op, double exponent, const Field& v) {
    return op.apply_multiplier(v, op.powers(exponent));
}

/// (||v||^2 + ||A^exponent v||^2)^{1/2}.
inline double graph_norm(const SpectralOperator& op, double exponent, const Field& v) {
    const auto lp = op.powers(exponent);
    const auto c = op.forward(v.values());
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += (1.0 + lp[k] * lp[k]) * c[k] * c[k];
    return std::sqrt(s);
}

/// ||A^exponent v||, the seminorm part of the graph norm.
inline double power_seminorm(const SpectralOperator& op, double exponent, const Field& v) {
    const auto lp = op.powers(exponent);
    const auto c = op.forward(v.values());
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += lp[k] * lp[k] * c[k] * c[k];
    return std::sqrt(s);
}

/// Norm of v in the dual of the graph-norm space, with H identified in it.
inline double dual_norm(const SpectralOperator& op, double exponent, const Field& v) {
    const auto lp = op.powers(exponent);
    const auto c = op.forward(v.values());
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * c[k] / (1.0 + lp[k] * lp[k]);
    return std::sqrt(s);
}

/// Solves (shift I + A^exponent) v = rhs by diagonal inversion in mode space.
inline Field solve_shifted(const SpectralOperator& op, double exponent, double shift, const Field& rhs) {
    if (!(shift > 0.0) || !std::isfinite(shift)) throw ConfigError("shift must be positive");
    auto m = op.powers(exponent);
    for (double& x : m) x = 1.0 / (shift + x);
    return op.apply_multiplier(rhs, m);
}

/// Zeros every mode whose index along some axis is at or above two thirds of
/// that axis' mode count.
inline Field two_thirds_filter(const SpectralOperator& op, const Field& v) {
    const auto& g = op.grid();
    const std::size_t nx = g.points(0), ny = g.points(1);
    std::vector<double> m(g.size(), 1.0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const bool cut = 3 * i >= 2 * nx || (g.dimension() == 2 && 3 * j >= 2 * ny);
            if (cut) m[i * ny + j] = 0.0;
        }
    }
    return op.apply_multiplier(v, m);
}

}  // namespace frachill
