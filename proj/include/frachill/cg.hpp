#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "frachill/error.hpp"
#include "frachill/grid.hpp"

namespace frachill {

struct CgOptions {
    double rel_tol = 1e-12;
    double abs_floor = 1e-14;
    int max_iters = 500;
};

struct CgResult {
    Field x;
    int iters = 0;
    double residual = 0.0;  // ||b - A x||_h
    std::vector<double> history;
};

/// Preconditioned conjugate gradients for an operator that is symmetric
/// positive definite in (.,.)_h. `apply(v)` and `precond(r)` return Fields.
/// Stops when ||r|| <= max(rel_tol ||b||, abs_floor).
template <class Apply, class Precond>
CgResult conjugate_gradient(Apply&& apply, Precond&& precond, const Field& b, const CgOptions& opt,
                            const Field* initial = nullptr) {
    CgResult res{initial ? *initial : Field(b.grid()), 0, 0.0, {}};
    const double bnorm = norm(b);
    const double target = std::max(opt.rel_tol * bnorm, opt.abs_floor);
    if (bnorm == 0.0 && !initial) return res;

    Field r = initial ? b - apply(res.x) : b;
    double rnorm = norm(r);
    res.history.push_back(rnorm);
    if (rnorm <= target) {
        res.residual = rnorm;
        return res;
    }
    Field z = precond(r);
    Field p = z;
    double rz = inner(r, z);
    for (int it = 1; it <= opt.max_iters; ++it) {
        const Field Ap = apply(p);
        const double pAp = inner(p, Ap);
        if (!(pAp > 0.0)) {
            throw SolverFailure("conjugate gradient: operator not positive definite (p.Ap = " +
                                std::to_string(pAp) + ")");
        }
        const double alpha = rz / pAp;
        res.x.axpy(alpha, p);
        r.axpy(-alpha, Ap);
        rnorm = norm(r);
        res.history.push_back(rnorm);
        res.iters = it;
        if (rnorm <= target) {
            res.residual = rnorm;
            return res;
        }
        z = precond(r);
        const double rz_new = inner(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        p *= beta;
        p += z;
    }
    std::ostringstream msg;
    msg << "conjugate gradient exceeded " << opt.max_iters << " iterations; residual history:";
    const std::size_t from = res.history.size() > 8 ? res.history.size() - 8 : 0;
    for (std::size_t i = from; i < res.history.size(); ++i) msg << ' ' << res.history[i];
    msg << " (target " << target << ")";
    throw SolverFailure(msg.str());
}

}  // namespace frachill
