#pragma once

#include <cmath>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"

namespace sisp {

// MAP estimation for
//   argmin_x (lambda/nu) ||T x||_nu^nu + 1/(2 sigma^2) ||y - A x||_2^2
// with nu in {1, 2} and A unitary.  Unitarity turns the fidelity term into
// ||Re(A* y) - x||^2 plus a constant, which every solver below exploits.

enum class MapStatus { Converged, MaxIterations };

struct MapResult {
    Vec x;
    MapStatus status = MapStatus::Converged;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

struct AdmmOptions {
    double rho = 1.0;
    double tol = 1e-6;
    int max_iter = 500;
};

// nu = 2: normal equations (I/sigma^2 + lambda T'T) x = Re(A* y)/sigma^2.
inline MapResult map_l2(const CVec& y, double lambda, const Mat& T, double sigma2,
                        const ForwardOperator& op) {
    const int n = op.n();
    require_dim(y.size() == n && T.cols() == n, "map_l2: dimension mismatch");
    require(lambda >= 0.0, "map_l2: lambda must be nonnegative");
    require(sigma2 > 0.0, "map_l2: sigma2 must be positive");
    const Vec rhs = op.adjoint(y).real() / sigma2;
    Mat lhs = lambda * (T.transpose() * T);
    lhs.diagonal().array() += 1.0 / sigma2;
    Eigen::LDLT<Mat> fac(lhs);
    if (fac.info() != Eigen::Success)
        throw SolverError("map_l2: normal equations factorization failed");
    MapResult res;
    res.x = fac.solve(rhs);
    res.iterations = 1;
    const double rel = (lhs * res.x - rhs).norm() / (rhs.norm() + 1e-300);
    if (!(rel < 1e-8)) throw SolverError("map_l2: solve residual too large");
    return res;
}

inline Vec soft_threshold(const Vec& v, double kappa) {
    return v.array().sign() * (v.array().abs() - kappa).max(0.0);
}

// nu = 1: ADMM on the split z = T x.  Objective is rescaled by sigma^2 so
// the x-update solves (I + rho T'T) x = Re(A* y) + rho T'(z - u) and the
// z-update soft-thresholds at lambda*sigma^2/rho.
inline MapResult map_l1(const CVec& y, double lambda, const Mat& T, double sigma2,
                        const ForwardOperator& op, const AdmmOptions& opts = {}) {
    const int n = op.n();
    require_dim(y.size() == n && T.cols() == n, "map_l1: dimension mismatch");
    require(lambda >= 0.0, "map_l1: lambda must be nonnegative");
    require(sigma2 > 0.0, "map_l1: sigma2 must be positive");
    require(opts.rho > 0.0 && opts.max_iter >= 1, "map_l1: bad ADMM options");

    const Vec c = op.adjoint(y).real();
    Mat lhs = opts.rho * (T.transpose() * T);
    lhs.diagonal().array() += 1.0;
    Eigen::LLT<Mat> fac(lhs);
    if (fac.info() != Eigen::Success)
        throw SolverError("map_l1: ADMM factorization failed");

    const int rows = static_cast<int>(T.rows());
    Vec x = c;
    Vec z = T * x;
    Vec u = Vec::Zero(rows);
    const double kappa = lambda * sigma2 / opts.rho;

    MapResult res;
    for (int it = 1; it <= opts.max_iter; ++it) {
        x = fac.solve(c + opts.rho * (T.transpose() * (z - u)));
        const Vec tx = T * x;
        const Vec z_prev = z;
        z = soft_threshold(tx + u, kappa);
        u += tx - z;
        res.primal_residual = (tx - z).norm();
        res.dual_residual = opts.rho * (T.transpose() * (z - z_prev)).norm();
        res.iterations = it;
        if (res.primal_residual < opts.tol && res.dual_residual < opts.tol) {
            res.x = x;
            res.status = MapStatus::Converged;
            return res;
        }
    }
    res.x = x;
    res.status = MapStatus::MaxIterations;
    return res;
}

inline MapResult map_estimate(const CVec& y, double lambda, int nu, const Mat& T,
                              double sigma2, const ForwardOperator& op,
                              const AdmmOptions& opts = {}) {
    require(nu == 1 || nu == 2, "map_estimate: nu must be 1 or 2");
    return nu == 1 ? map_l1(y, lambda, T, sigma2, op, opts)
                   : map_l2(y, lambda, T, sigma2, op);
}

// Objective value matching map_estimate's minimization target.
inline double map_objective(const CVec& y, double lambda, int nu, const Mat& T,
                            double sigma2, const ForwardOperator& op, const Vec& x) {
    const CVec resid = y - op.apply(x);
    const double fid = resid.squaredNorm() / (2.0 * sigma2);
    const Vec tx = T * x;
    if (nu == 1) return lambda * tx.lpNorm<1>() + fid;
    return 0.5 * lambda * tx.squaredNorm() + fid;
}

} // namespace sisp
