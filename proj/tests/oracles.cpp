#include "oracles.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace oracles {

Eigen::VectorXd nnqp_exhaustive(const Eigen::MatrixXd& H, const Eigen::VectorXd& b) {
    const int n = static_cast<int>(b.size());
    if (n > 16) throw std::invalid_argument("nnqp_exhaustive: too many variables");

    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_obj = 0.0;  // objective at x = 0

    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> sup;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) sup.push_back(i);
        const int m = static_cast<int>(sup.size());

        Eigen::MatrixXd Hs(m, m);
        Eigen::VectorXd bs(m);
        for (int r = 0; r < m; ++r) {
            bs[r] = b[sup[static_cast<size_t>(r)]];
            for (int c = 0; c < m; ++c)
                Hs(r, c) = H(sup[static_cast<size_t>(r)], sup[static_cast<size_t>(c)]);
        }
        Eigen::VectorXd xs = Hs.ldlt().solve(bs);
        if ((Hs * xs - bs).norm() > 1e-8 * (1.0 + bs.norm())) continue;  // singular block
        if ((xs.array() < -1e-12).any()) continue;

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int r = 0; r < m; ++r) x[sup[static_cast<size_t>(r)]] = std::max(0.0, xs[r]);
        double obj = 0.5 * x.dot(H * x) - b.dot(x);
        if (obj < best_obj) {
            best_obj = obj;
            best = x;
        }
    }
    return best;
}

Eigen::VectorXd sparse_rep_oracle(const Eigen::VectorXd& X, const Eigen::MatrixXd& K,
                                  double lambda_H, double lambda_1) {
    Eigen::MatrixXd H = K.transpose() * K + 2.0 * lambda_H * K;
    Eigen::VectorXd b = K.transpose() * X - Eigen::VectorXd::Constant(X.size(), lambda_1);
    return nnqp_exhaustive(H, b);
}

Eigen::VectorXd grid_refine_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     Eigen::VectorXd lo, Eigen::VectorXd hi, int pts_per_dim,
                                     int rounds, bool clamp_nonneg) {
    const int dim = static_cast<int>(lo.size());
    Eigen::VectorXd best = 0.5 * (lo + hi);
    double best_val = f(best);

    for (int round = 0; round < rounds; ++round) {
        Eigen::VectorXd step = (hi - lo) / double(pts_per_dim - 1);
        long total = 1;
        for (int i = 0; i < dim; ++i) total *= pts_per_dim;

        Eigen::VectorXd x(dim);
        for (long idx = 0; idx < total; ++idx) {
            long rem = idx;
            for (int i = 0; i < dim; ++i) {
                x[i] = lo[i] + step[i] * double(rem % pts_per_dim);
                rem /= pts_per_dim;
            }
            double v = f(x);
            if (v < best_val) {
                best_val = v;
                best = x;
            }
        }
        // shrink the box around the incumbent
        for (int i = 0; i < dim; ++i) {
            double h = 1.5 * step[i];
            lo[i] = best[i] - h;
            hi[i] = best[i] + h;
            if (clamp_nonneg && lo[i] < 0.0) lo[i] = 0.0;
        }
    }
    return best;
}

double nonneg_l2_kkt_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double c,
                              const Eigen::VectorXd& a) {
    const double n = static_cast<double>(y.size());
    Eigen::VectorXd g = M.transpose() * (M * a - y) / n;
    double na = a.norm();
    if (na > 0.0) {
        Eigen::VectorXd full = g + (c / na) * a;
        double r = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a[i] > 0.0)
                r = std::max(r, std::abs(full[i]));
            else
                r = std::max(r, std::max(0.0, -full[i]));  // multiplier must be >= 0
        }
        return r / (1.0 + g.norm());
    }
    // a = 0: optimal iff the negative part of the gradient fits in the c-ball
    double neg = std::sqrt(g.array().min(0.0).square().sum());
    return std::max(0.0, neg - c) / (1.0 + g.norm());
}

double gen_lasso_kkt_residual(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                              const Eigen::MatrixXd& D, const Eigen::VectorXd& gamma,
                              double active_tol) {
    const double n = static_cast<double>(y.size());
    Eigen::VectorXd g0 = U.transpose() * (U * gamma - y) / n;
    const Eigen::Index m = D.rows();
    if (m == 0) return g0.norm() / (1.0 + g0.norm());

    Eigen::VectorXd dg = D * gamma;
    std::vector<char> fixed(static_cast<size_t>(m), 0);
    Eigen::VectorXd v(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        if (std::abs(dg[r]) > active_tol) {
            fixed[static_cast<size_t>(r)] = 1;
            v[r] = dg[r] > 0 ? 1.0 : -1.0;
        } else {
            v[r] = 0.0;
        }
    }

    // minimize ||g0 + D'v||^2 over the free coordinates of v, box [-1,1]
    double L = D.squaredNorm();  // Frobenius bound on the largest eigenvalue of DD'
    if (L <= 0.0) return g0.norm() / (1.0 + g0.norm());
    double step = 1.0 / L;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd res = g0 + D.transpose() * v;
        Eigen::VectorXd grad = D * res;
        double moved = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) {
            if (fixed[static_cast<size_t>(r)]) continue;
            double nv = std::clamp(v[r] - step * grad[r], -1.0, 1.0);
            moved = std::max(moved, std::abs(nv - v[r]));
            v[r] = nv;
        }
        if (moved < 1e-14) break;
    }
    return (g0 + D.transpose() * v).norm() / (1.0 + g0.norm());
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, double lambda,
                         int sweeps, double tol) {
    const double n = static_cast<double>(y.size());
    const Eigen::Index p = U.cols();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd r = y;  // residual y - Ug
    Eigen::VectorXd col_sq = U.colwise().squaredNorm();

    for (int s = 0; s < sweeps; ++s) {
        double moved = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq[j] <= 0.0) continue;
            double rho = U.col(j).dot(r) / n + col_sq[j] / n * g[j];
            double nj;
            if (rho > lambda)
                nj = (rho - lambda) / (col_sq[j] / n);
            else if (rho < -lambda)
                nj = (rho + lambda) / (col_sq[j] / n);
            else
                nj = 0.0;
            if (nj != g[j]) {
                r -= (nj - g[j]) * U.col(j);
                moved = std::max(moved, std::abs(nj - g[j]));
                g[j] = nj;
            }
        }
        if (moved < tol) break;
    }
    return g;
}

}  // namespace oracles
