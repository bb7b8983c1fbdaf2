#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "frachill/error.hpp"
#include "frachill/grid.hpp"

namespace frachill {

enum class InterpolantKind { bar, underline, hat };

/// Values z^0..z^N of one field at t_n = n h, with the piecewise-constant
/// (right and left endpoint) and piecewise-linear reconstructions.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(double h, std::vector<Field> values) : h_(h), z_(std::move(values)) {
        if (z_.empty()) throw ConfigError("trajectory needs at least the initial value");
        if (!(h_ > 0.0)) throw ConfigError("trajectory step must be positive");
    }

    double h() const noexcept { return h_; }
    int steps() const noexcept { return static_cast<int>(z_.size()) - 1; }
    double final_time() const noexcept { return h_ * steps(); }
    const Field& operator[](int n) const { return z_.at(static_cast<std::size_t>(n)); }
    Field& operator[](int n) { return z_.at(static_cast<std::size_t>(n)); }
    const std::vector<Field>& values() const noexcept { return z_; }

    /// bar: z^n on ((n-1)h, nh]; underline: z^{n-1} on [(n-1)h, nh); hat: linear.
    /// At t = 0 bar takes z^1, at t = T underline takes z^{N-1}.
    Field eval(InterpolantKind kind, double t) const {
        const int N = steps();
        const double T = final_time();
        if (!(t >= 0.0) || t > T * (1.0 + 1e-14) + 1e-300) {
            throw ConfigError("time " + std::to_string(t) + " outside [0, " + std::to_string(T) + "]");
        }
        if (N == 0) return z_.front();
        const double s = t / h_;
        switch (kind) {
            case InterpolantKind::bar: {
                int n = static_cast<int>(std::ceil(s - 1e-12));
                return (*this)[std::clamp(n, 1, N)];
            }
            case InterpolantKind::underline: {
                int n = static_cast<int>(std::floor(s + 1e-12));
                return (*this)[std::clamp(n, 0, N - 1)];
            }
            case InterpolantKind::hat: {
                int n = std::clamp(static_cast<int>(std::floor(s)), 0, N - 1);
                double theta = std::clamp(s - n, 0.0, 1.0);
                if (std::abs(s - std::round(s)) < 1e-12) {
                    return (*this)[std::clamp(static_cast<int>(std::round(s)), 0, N)];
                }
                Field out = (1.0 - theta) * (*this)[n];
                out.axpy(theta, (*this)[n + 1]);
                return out;
            }
        }
        return z_.front();
    }

private:
    double h_ = 1.0;
    std::vector<Field> z_;
};

/// Norms of the interpolants computed from the stored sequence, for a
/// Hilbert norm Z given by its inner product.
struct InterpolantNorms {
    double bar_Linf = 0.0;        // max_{n>=1} ||z^n||
    double underline_Linf = 0.0;  // max_{n<=N-1} ||z^n||
    double dt_Linf = 0.0;         // max ||(z^{n+1}-z^n)/h||
    double bar_L2_sq = 0.0;       // h sum_{n=1}^N ||z^n||^2
    double underline_L2_sq = 0.0; // h sum_{n=0}^{N-1} ||z^n||^2
    double dt_L2_sq = 0.0;        // h sum ||(z^{n+1}-z^n)/h||^2
    double hat_Linf = 0.0;        // max_n ||z^n||
    double hat_L2_sq = 0.0;       // exact integral of the linear interpolant
    double bar_minus_hat_Linf = 0.0;   // max ||z^{n+1}-z^n||
    double bar_minus_hat_L2_sq = 0.0;  // (h/3) sum ||z^{n+1}-z^n||^2
};

using InnerProduct = std::function<double(const Field&, const Field&)>;

inline InterpolantNorms interpolant_norms(const Trajectory& traj,
                                          const InnerProduct& ip = [](const Field& a, const Field& b) {
                                              return inner(a, b);
                                          }) {
    InterpolantNorms out;
    const int N = traj.steps();
    const double h = traj.h();
    out.hat_Linf = std::sqrt(ip(traj[0], traj[0]));
    for (int n = 0; n <= N; ++n) {
        const double zz = ip(traj[n], traj[n]);
        const double nz = std::sqrt(zz);
        out.hat_Linf = std::max(out.hat_Linf, nz);
        if (n >= 1) {
            out.bar_Linf = std::max(out.bar_Linf, nz);
            out.bar_L2_sq += h * zz;
        }
        if (n <= N - 1) {
            out.underline_Linf = std::max(out.underline_Linf, nz);
            out.underline_L2_sq += h * zz;
        }
    }
    for (int n = 0; n < N; ++n) {
        const Field d = traj[n + 1] - traj[n];
        const double dd = ip(d, d);
        out.dt_Linf = std::max(out.dt_Linf, std::sqrt(dd) / h);
        out.dt_L2_sq += dd / h;
        out.bar_minus_hat_Linf = std::max(out.bar_minus_hat_Linf, std::sqrt(dd));
        out.bar_minus_hat_L2_sq += h / 3.0 * dd;
        const double ab = ip(traj[n], traj[n + 1]);
        out.hat_L2_sq += h / 3.0 * (ip(traj[n], traj[n]) + ab + ip(traj[n + 1], traj[n + 1]));
    }
    return out;
}

/// ||hat(a) - hat(b)||_{L2(0,T;H)} for two trajectories on the same interval
/// whose step counts divide one another. Exact: both interpolants are linear
/// on every fine subinterval, so Simpson's rule integrates the square exactly.
inline double l2_time_distance(const Trajectory& a, const Trajectory& b) {
    const Trajectory& fine = a.steps() >= b.steps() ? a : b;
    const Trajectory& coarse = a.steps() >= b.steps() ? b : a;
    const double T = fine.final_time();
    if (std::abs(T - coarse.final_time()) > 1e-12 * std::max(1.0, T)) {
        throw ConfigError("trajectories cover different time intervals");
    }
    const int Nf = fine.steps();
    if (Nf == 0) return 0.0;
    if (coarse.steps() == 0 || Nf % coarse.steps() != 0) {
        throw ConfigError("step counts must divide one another");
    }
    const int ratio = Nf / coarse.steps();
    const double hf = fine.h();
    auto coarse_at = [&](int fine_index2) {
        // fine_index2 counts half fine steps
        const int num = fine_index2;
        const int den = 2 * ratio;
        const int n = std::min(num / den, coarse.steps() - 1);
        const double theta = static_cast<double>(num - n * den) / den;
        Field out = (1.0 - theta) * coarse[n];
        out.axpy(theta, coarse[n + 1]);
        return out;
    };
    double total = 0.0;
    for (int n = 0; n < Nf; ++n) {
        const Field e0 = fine[n] - coarse_at(2 * n);
        Field fm = 0.5 * fine[n];
        fm.axpy(0.5, fine[n + 1]);
        const Field em = fm - coarse_at(2 * n + 1);
        const Field e1 = fine[n + 1] - coarse_at(2 * n + 2);
        total += hf / 6.0 * (inner(e0, e0) + 4.0 * inner(em, em) + inner(e1, e1));
    }
    return std::sqrt(total);
}

}  // namespace frachill
