#ifndef SPECTENSOR_SPARSE_REP_HPP
#define SPECTENSOR_SPARSE_REP_HPP

#include <Eigen/Dense>

#include "spectensor/tensor.hpp"

namespace spectensor {

struct SparseRepParams {
    double lambda_H = 0.0;  // RKHS-norm weight
    double lambda_1 = 0.0;  // l1 weight
    double tol = 1e-7;      // KKT tolerance, relative to max |X|
    int max_iter = 10000;   // coordinate-descent sweeps

    void validate() const {
        if (lambda_H < 0.0 || lambda_1 < 0.0)
            throw std::invalid_argument("SparseRepParams: penalties must be >= 0");
        if (!(tol > 0.0) || max_iter < 1)
            throw std::invalid_argument("SparseRepParams: bad tol/max_iter");
    }
};

struct SparseRepFit {
    Eigen::VectorXd coeffs;    // x >= 0
    Eigen::VectorXd fitted;    // K x
    double objective = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    int sweeps = 0;
};

/// Precomputed quadratic form shared across spectra on the same grid:
/// H = K^T K + 2 lambda_H K.
struct SparseRepWorkspace {
    Eigen::MatrixXd kmat;
    Eigen::MatrixXd hess;
    double lambda_H = 0.0;

    SparseRepWorkspace(const Eigen::MatrixXd& K, double lambda_H_)
        : kmat(K), hess(K.transpose() * K + 2.0 * lambda_H_ * K), lambda_H(lambda_H_) {}
};

/// Minimize (1/2)||X - Kx||^2 + lambda_H x'Kx + lambda_1 ||x||_1 over x >= 0
/// by cyclic projected coordinate descent. KKT: with
/// g = K(Kx - X) + 2 lambda_H Kx + lambda_1, every coordinate satisfies
/// g_l >= -tol and x_l |g_l| <= tol (tol scaled by max |X|).
SparseRepFit fit_sparse_rep(const Eigen::VectorXd& sample, const Eigen::MatrixXd& kmat,
                            const SparseRepParams& params);

/// Same solve against a shared workspace (params.lambda_H must match).
SparseRepFit fit_sparse_rep(const Eigen::VectorXd& sample, const SparseRepWorkspace& ws,
                            const SparseRepParams& params);

/// Objective value at x.
double sparse_rep_objective(const Eigen::VectorXd& sample, const Eigen::MatrixXd& kmat,
                            const SparseRepParams& params, const Eigen::VectorXd& x);

/// Max KKT violation at x (absolute, caller scales the tolerance).
double sparse_rep_kkt_residual(const Eigen::VectorXd& sample, const Eigen::MatrixXd& kmat,
                               const SparseRepParams& params, const Eigen::VectorXd& x);

/// Fit every (k,i,j) spectrum independently. Deterministic regardless of
/// execution order; `threads` bounds worker concurrency.
CoeffTensor fit_all(const SpectrumTensor& tensor, const Eigen::MatrixXd& kmat,
                    const SparseRepParams& params, int threads = 1);

}  // namespace spectensor

#endif
