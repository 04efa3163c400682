#include "spectensor/sparse_rep.hpp"

#include <cassert>
#include <cmath>
#include <thread>

namespace spectensor {

double sparse_rep_objective(const Eigen::VectorXd& sample, const Eigen::MatrixXd& kmat,
                            const SparseRepParams& params, const Eigen::VectorXd& x) {
    Eigen::VectorXd r = sample - kmat * x;
    return 0.5 * r.squaredNorm() + params.lambda_H * x.dot(kmat * x) +
           params.lambda_1 * x.lpNorm<1>();
}

double sparse_rep_kkt_residual(const Eigen::VectorXd& sample, const Eigen::MatrixXd& kmat,
                               const SparseRepParams& params, const Eigen::VectorXd& x) {
    Eigen::VectorXd kx = kmat * x;
    Eigen::VectorXd g = kmat.transpose() * (kx - sample) + 2.0 * params.lambda_H * kx;
    g.array() += params.lambda_1;
    double viol = 0.0;
    for (Eigen::Index l = 0; l < g.size(); ++l) {
        viol = std::max(viol, -g[l]);                  // dual feasibility
        viol = std::max(viol, x[l] * std::abs(g[l]));  // complementary slackness
    }
    return viol;
}

SparseRepFit fit_sparse_rep(const Eigen::VectorXd& sample, const SparseRepWorkspace& ws,
                            const SparseRepParams& params) {
    params.validate();
    const Eigen::Index nw = ws.kmat.rows();
    if (sample.size() != nw)
        throw std::invalid_argument("fit_sparse_rep: sample/kernel dim mismatch");

    SparseRepFit fit;
    fit.coeffs = Eigen::VectorXd::Zero(nw);

    const double scale = sample.cwiseAbs().maxCoeff();
    if (scale == 0.0) {  // all-zero spectrum: x = 0 is optimal
        fit.fitted = Eigen::VectorXd::Zero(nw);
        fit.converged = true;
        return fit;
    }
    const double tol = params.tol * scale;

    const Eigen::MatrixXd& H = ws.hess;
    Eigen::VectorXd b = ws.kmat.transpose() * sample;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(nw);  // H x, updated incrementally
    Eigen::VectorXd& x = fit.coeffs;

#ifndef NDEBUG
    double prev_obj = sparse_rep_objective(sample, ws.kmat, params, x);
#endif

    int sweep = 0;
    for (; sweep < params.max_iter; ++sweep) {
        for (Eigen::Index l = 0; l < nw; ++l) {
            double hll = H(l, l);
            if (hll <= 0.0) continue;
            double xl = std::max(0.0, (b[l] - params.lambda_1 - q[l] + hll * x[l]) / hll);
            double delta = xl - x[l];
            if (delta != 0.0) {
                q += delta * H.col(l);
                x[l] = xl;
            }
        }
#ifndef NDEBUG
        double obj = sparse_rep_objective(sample, ws.kmat, params, x);
        assert(obj <= prev_obj + 1e-10 * (1.0 + std::abs(prev_obj)));
        prev_obj = obj;
#endif
        double viol = 0.0;
        for (Eigen::Index l = 0; l < nw; ++l) {
            double g = q[l] - b[l] + params.lambda_1;
            viol = std::max(viol, -g);
            viol = std::max(viol, x[l] * std::abs(g));
        }
        if (viol <= tol) {
            fit.converged = true;
            break;
        }
    }
    fit.sweeps = fit.converged ? sweep + 1 : params.max_iter;
    fit.fitted = ws.kmat * x;
    fit.objective = sparse_rep_objective(sample, ws.kmat, params, x);
    fit.kkt_residual = sparse_rep_kkt_residual(sample, ws.kmat, params, x);
    return fit;
}

SparseRepFit fit_sparse_rep(const Eigen::VectorXd& sample, const Eigen::MatrixXd& kmat,
                            const SparseRepParams& params) {
    SparseRepWorkspace ws(kmat, params.lambda_H);
    return fit_sparse_rep(sample, ws, params);
}

CoeffTensor fit_all(const SpectrumTensor& tensor, const Eigen::MatrixXd& kmat,
                    const SparseRepParams& params, int threads) {
    tensor.validate();
    params.validate();
    const Tensor4& X = tensor.values;
    if (kmat.rows() != X.num_wavenumbers())
        throw std::invalid_argument("fit_all: kernel/grid dim mismatch");

    CoeffTensor out;
    out.values = Tensor4(X.n(), X.p(), X.d(), X.num_wavenumbers());
    out.grid = tensor.grid;
    out.meta = tensor.meta;
    const size_t n_fits = static_cast<size_t>(X.n()) * X.p() * X.d();
    out.converged.assign(n_fits, 0);

    SparseRepWorkspace ws(kmat, params.lambda_H);

    auto run_range = [&](size_t lo, size_t hi) {
        for (size_t f = lo; f < hi; ++f) {
            int k = static_cast<int>(f / (static_cast<size_t>(X.p()) * X.d()));
            int rem = static_cast<int>(f % (static_cast<size_t>(X.p()) * X.d()));
            int i = rem / X.d();
            int j = rem % X.d();
            SparseRepFit fit = fit_sparse_rep(X.spectrum_vec(k, i, j), ws, params);
            Eigen::Map<Eigen::VectorXd>(out.values.spectrum(k, i, j),
                                        X.num_wavenumbers()) = fit.coeffs;
            out.converged[f] = fit.converged ? 1 : 0;
        }
    };

    threads = std::max(1, threads);
    if (threads == 1 || n_fits < 2) {
        run_range(0, n_fits);
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (n_fits + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            size_t lo = t * chunk, hi = std::min(n_fits, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace spectensor
