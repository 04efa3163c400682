#include "spectensor/rank_one.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace spectensor {

double predict_sample(const RankOneModel& model, const Tensor4& xtilde, int k) {
    const int p = xtilde.p(), d = xtilde.d(), nw = xtilde.num_wavenumbers();
    if (model.alpha.size() != p || model.beta.size() != d || model.gamma.size() != nw)
        throw std::invalid_argument("predict_sample: model/data dim mismatch");
    double acc = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j)
            acc += model.alpha[i] * model.beta[j] *
                   model.gamma.dot(xtilde.spectrum_vec(k, i, j));
    return acc;
}

Eigen::VectorXd predict_all(const RankOneModel& model, const Tensor4& xtilde) {
    Eigen::VectorXd out(xtilde.n());
    for (int k = 0; k < xtilde.n(); ++k) out[k] = predict_sample(model, xtilde, k);
    return out;
}

double objective(const RankOneModel& model, const RankOneData& data, const RegParams& params) {
    params.validate();
    data.validate();
    const int n = data.xtilde.n();
    const int p = data.xtilde.p(), d = data.xtilde.d(), nw = data.xtilde.num_wavenumbers();
    Eigen::VectorXd r = data.y - predict_all(model, data.xtilde);
    double obj = 0.5 / n * r.squaredNorm();
    obj += params.kappa_alpha / std::sqrt(double(p)) * model.alpha.norm();
    obj += params.kappa_beta / std::sqrt(double(d)) * model.beta.norm();
    obj += params.kappa_gamma / nw * model.gamma.lpNorm<1>();
    if (params.kappa_gram > 0.0) {
        double fused = 0.0;  // paper-style double sum = 2x the unordered sum
        for (int a = 0; a < nw; ++a)
            for (int b = a + 1; b < nw; ++b)
                fused += 2.0 * data.gram(a, b) * std::abs(model.gamma[a] - model.gamma[b]);
        obj += params.kappa_gram / (double(nw) * nw) * fused;
    }
    return obj;
}

Eigen::MatrixXd alpha_design(const Tensor4& xtilde, const Eigen::VectorXd& beta,
                             const Eigen::VectorXd& gamma) {
    Eigen::MatrixXd M(xtilde.n(), xtilde.p());
    for (int k = 0; k < xtilde.n(); ++k)
        for (int i = 0; i < xtilde.p(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < xtilde.d(); ++j)
                acc += beta[j] * gamma.dot(xtilde.spectrum_vec(k, i, j));
            M(k, i) = acc;
        }
    return M;
}

Eigen::MatrixXd beta_design(const Tensor4& xtilde, const Eigen::VectorXd& alpha,
                            const Eigen::VectorXd& gamma) {
    Eigen::MatrixXd M(xtilde.n(), xtilde.d());
    for (int k = 0; k < xtilde.n(); ++k)
        for (int j = 0; j < xtilde.d(); ++j) {
            double acc = 0.0;
            for (int i = 0; i < xtilde.p(); ++i)
                acc += alpha[i] * gamma.dot(xtilde.spectrum_vec(k, i, j));
            M(k, j) = acc;
        }
    return M;
}

Eigen::MatrixXd gamma_design(const Tensor4& xtilde, const Eigen::VectorXd& alpha,
                             const Eigen::VectorXd& beta) {
    const int nw = xtilde.num_wavenumbers();
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(xtilde.n(), nw);
    for (int k = 0; k < xtilde.n(); ++k)
        for (int i = 0; i < xtilde.p(); ++i)
            for (int j = 0; j < xtilde.d(); ++j)
                U.row(k) += alpha[i] * beta[j] *
                            Eigen::Map<const Eigen::RowVectorXd>(xtilde.spectrum(k, i, j), nw);
    return U;
}

namespace {

// prox of step*c*||.||_2 plus the nonnegative-orthant indicator
Eigen::VectorXd prox_nonneg_l2(Eigen::VectorXd v, double threshold) {
    v = v.cwiseMax(0.0);
    double nrm = v.norm();
    if (nrm <= threshold) return Eigen::VectorXd::Zero(v.size());
    return (1.0 - threshold / nrm) * v;
}

}  // namespace

Eigen::VectorXd solve_nonneg_l2(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double c,
                                Eigen::VectorXd init, const NonnegL2Options& opts,
                                bool* converged) {
    const int n = static_cast<int>(M.rows());
    const Eigen::Index pdim = M.cols();
    if (init.size() != pdim) init = Eigen::VectorXd::Zero(pdim);
    init = init.cwiseMax(0.0);

    Eigen::MatrixXd MtM = M.transpose() * M / n;
    Eigen::VectorXd Mty = M.transpose() * y / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(MtM, Eigen::EigenvaluesOnly);
    double L = es.eigenvalues().maxCoeff();

    if (L <= 0.0) {  // zero design: data term is constant in a
        if (converged) *converged = true;
        return c > 0.0 ? Eigen::VectorXd::Zero(pdim) : init;
    }
    double step = 1.0 / L;
    double scale = std::max(1.0, Mty.cwiseAbs().maxCoeff());

    Eigen::VectorXd a = init;
    bool ok = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd grad = MtM * a - Mty;
        Eigen::VectorXd a_new = prox_nonneg_l2(a - step * grad, step * c);
        double res = (a_new - a).cwiseAbs().maxCoeff() / step;
        a = a_new;
        if (res <= opts.tol * scale) {
            ok = true;
            break;
        }
    }
    if (converged) *converged = ok;
    return a;
}

Eigen::MatrixXd build_penalty_matrix(double kappa_gamma, double kappa_gram,
                                     const Eigen::MatrixXd& gram, double graph_eps) {
    const int nw = static_cast<int>(gram.rows());
    std::vector<std::pair<int, int>> edges;
    double gmax = 0.0;
    for (int a = 0; a < nw; ++a)
        for (int b = a + 1; b < nw; ++b) gmax = std::max(gmax, gram(a, b));
    if (kappa_gram > 0.0 && gmax > 0.0)
        for (int a = 0; a < nw; ++a)
            for (int b = a + 1; b < nw; ++b)
                if (gram(a, b) >= graph_eps * gmax) edges.emplace_back(a, b);

    int rows = (kappa_gamma > 0.0 ? nw : 0) + static_cast<int>(edges.size());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, nw);
    int r = 0;
    if (kappa_gamma > 0.0)
        for (int l = 0; l < nw; ++l, ++r) D(r, l) = kappa_gamma / nw;
    for (auto [a, b] : edges) {
        double w = 2.0 * kappa_gram * gram(a, b) / (double(nw) * nw);
        D(r, a) = w;
        D(r, b) = -w;
        ++r;
    }
    return D;
}

namespace {

double gamma_objective(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& D, const Eigen::VectorXd& g) {
    double n = static_cast<double>(U.rows());
    return 0.5 / n * (y - U * g).squaredNorm() + (D * g).lpNorm<1>();
}

}  // namespace

Eigen::VectorXd solve_gamma(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                            double kappa_gamma, double kappa_gram,
                            const Eigen::MatrixXd& gram, Eigen::VectorXd init,
                            const GammaOptions& opts, GammaWarmState* warm, bool* converged) {
    const int n = static_cast<int>(U.rows());
    const int nw = static_cast<int>(U.cols());
    if (init.size() != nw) init = Eigen::VectorXd::Zero(nw);

    Eigen::MatrixXd D = build_penalty_matrix(kappa_gamma, kappa_gram, gram, opts.graph_eps);
    const Eigen::Index m = D.rows();
    Eigen::MatrixXd A = U.transpose() * U / n;
    Eigen::VectorXd rhs0 = U.transpose() * y / n;

    if (m == 0) {  // unpenalized least squares
        Eigen::MatrixXd Ar = A + 1e-12 * Eigen::MatrixXd::Identity(nw, nw);
        Eigen::VectorXd g = Ar.ldlt().solve(rhs0);
        if (converged) *converged = true;
        if (gamma_objective(U, y, D, g) <= gamma_objective(U, y, D, init)) return g;
        return init;
    }

    Eigen::MatrixXd DtD = D.transpose() * D;

    double rho = warm && warm->z.size() == m ? warm->rho : 1.0;
    Eigen::VectorXd z = warm && warm->z.size() == m ? warm->z : Eigen::VectorXd(D * init);
    Eigen::VectorXd u = warm && warm->u.size() == m ? warm->u : Eigen::VectorXd::Zero(m);

    Eigen::LDLT<Eigen::MatrixXd> fact(A + rho * DtD);
    Eigen::VectorXd g = init;
    bool ok = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        g = fact.solve(rhs0 + rho * D.transpose() * (z - u));
        Eigen::VectorXd Dg = D * g;
        Eigen::VectorXd z_old = z;
        Eigen::VectorXd v = Dg + u;
        double thr = 1.0 / rho;
        z = v.array().sign() * (v.array().abs() - thr).max(0.0);
        u += Dg - z;

        double r_norm = (Dg - z).norm();
        double s_norm = rho * (D.transpose() * (z - z_old)).norm();
        double eps_pri = std::sqrt(double(m)) * opts.abs_tol +
                         opts.rel_tol * std::max(Dg.norm(), z.norm());
        double eps_dual = std::sqrt(double(nw)) * opts.abs_tol +
                          opts.rel_tol * rho * (D.transpose() * u).norm();
        if (r_norm <= eps_pri && s_norm <= eps_dual) {
            ok = true;
            break;
        }
        if ((it + 1) % 10 == 0) {  // residual balancing
            if (r_norm > 10.0 * s_norm) {
                rho *= 2.0;
                u /= 2.0;
                fact.compute(A + rho * DtD);
            } else if (s_norm > 10.0 * r_norm) {
                rho /= 2.0;
                u *= 2.0;
                fact.compute(A + rho * DtD);
            }
        }
    }
    if (warm) {
        warm->z = z;
        warm->u = u;
        warm->rho = rho;
    }
    if (converged) *converged = ok;
    // exact block minimization must not go uphill; keep the better iterate
    if (gamma_objective(U, y, D, g) <= gamma_objective(U, y, D, init)) return g;
    return init;
}

std::pair<RankOneModel, FitReport> fit_alternating(const RankOneData& data,
                                                   const RegParams& params,
                                                   const FitOptions& opts) {
    params.validate();
    data.validate();
    const int p = data.xtilde.p(), d = data.xtilde.d(), nw = data.xtilde.num_wavenumbers();
    const double ca = params.kappa_alpha / std::sqrt(double(p));
    const double cb = params.kappa_beta / std::sqrt(double(d));

    std::mt19937_64 rng(opts.seed);
    RankOneModel best;
    FitReport best_report;
    double best_obj = std::numeric_limits<double>::infinity();

    int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
        RankOneModel model;
        if (r == 0) {
            model.alpha = Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(double(p)));
            model.beta = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d)));
        } else {
            std::uniform_real_distribution<double> unif(0.1, 1.0);
            model.alpha = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return unif(rng); });
            model.beta = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return unif(rng); });
        }
        if (p == 1) model.alpha[0] = 1.0;
        if (d == 1) model.beta[0] = 1.0;
        model.gamma = Eigen::VectorXd::Zero(nw);

        FitReport report;
        GammaWarmState warm;
        double obj = objective(model, data, params);
        report.trajectory.push_back(obj);

        auto check_monotone = [&](double next) {
            if (next > obj + 1e-10 * (1.0 + std::abs(obj)))
                throw std::runtime_error(
                    "fit_alternating: objective increased across a block update "
                    "(subproblem solver defect)");
            obj = next;
            report.trajectory.push_back(next);
        };

        for (int sweep = 0; sweep < opts.max_outer; ++sweep) {
            double sweep_start = obj;

            Eigen::MatrixXd U = gamma_design(data.xtilde, model.alpha, model.beta);
            Eigen::VectorXd gamma_prev = model.gamma;
            model.gamma = solve_gamma(U, data.y, params.kappa_gamma, params.kappa_gram,
                                      data.gram, model.gamma, opts.gamma_opts, &warm);
            // dropped Gram edges are outside the ADMM surrogate; never go uphill
            // in the full objective
            if (objective(model, data, params) > obj) model.gamma = gamma_prev;
            check_monotone(objective(model, data, params));

            if (p > 1) {
                Eigen::MatrixXd Ma = alpha_design(data.xtilde, model.beta, model.gamma);
                model.alpha = solve_nonneg_l2(Ma, data.y, ca, model.alpha, opts.ab_opts);
                check_monotone(objective(model, data, params));
                if (model.alpha.isZero(0.0)) {
                    report.zero_model = true;
                    break;
                }
            }
            if (d > 1) {
                Eigen::MatrixXd Mb = beta_design(data.xtilde, model.alpha, model.gamma);
                model.beta = solve_nonneg_l2(Mb, data.y, cb, model.beta, opts.ab_opts);
                check_monotone(objective(model, data, params));
                if (model.beta.isZero(0.0)) {
                    report.zero_model = true;
                    break;
                }
            }

            report.sweeps = sweep + 1;
            if (sweep_start - obj <= opts.tol_outer * (1.0 + std::abs(obj))) {
                report.converged = true;
                break;
            }
        }
        if (report.zero_model) {
            // regularization dominates: the zero map is the reported minimizer
            model.alpha.setZero();
            model.beta.setZero();
            model.gamma.setZero();
            obj = objective(model, data, params);
            report.trajectory.push_back(obj);
            report.converged = true;
        }
        report.final_objective = obj;
        if (obj < best_obj) {
            best_obj = obj;
            best = model;
            best_report = report;
        }
    }
    return {best, best_report};
}

double eval_coefficient_function(const RankOneModel& model, const KernelSpec& spec,
                                 const SpectralGrid& kept_grid, double t) {
    if (model.gamma.size() != kept_grid.size())
        throw std::invalid_argument("eval_coefficient_function: gamma/grid mismatch");
    double acc = 0.0;
    for (int l = 0; l < kept_grid.size(); ++l)
        acc += model.gamma[l] * kernel_value(spec, t, kept_grid[l]);
    return acc;
}

}  // namespace spectensor
