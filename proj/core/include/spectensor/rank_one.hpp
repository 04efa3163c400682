#ifndef SPECTENSOR_RANK_ONE_HPP
#define SPECTENSOR_RANK_ONE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "spectensor/kernel.hpp"
#include "spectensor/tensor.hpp"

namespace spectensor {

/// Regularization four-tuple (kappa_alpha, kappa_beta, kappa_gamma, kappa_gram).
/// The 1/sqrt(p), 1/sqrt(d), 1/N, 1/N^2 scalings are applied inside the objective.
struct RegParams {
    double kappa_alpha = 0.0;
    double kappa_beta = 0.0;
    double kappa_gamma = 0.0;
    double kappa_gram = 0.0;

    void validate() const {
        if (kappa_alpha < 0 || kappa_beta < 0 || kappa_gamma < 0 || kappa_gram < 0)
            throw std::invalid_argument("RegParams: penalties must be >= 0");
    }
};

/// Coefficient triple of the rank-one multilinear map. alpha (sources) and
/// beta (detectors) are nonnegative; gamma (spectral) is unconstrained in sign.
struct RankOneModel {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    Eigen::VectorXd gamma;
};

/// Training data after selection, Gram transform and normalization.
struct RankOneData {
    Tensor4 xtilde;      // n x p x d x N
    Eigen::VectorXd y;   // length n
    Eigen::MatrixXd gram;  // N x N over the kept grid

    void validate() const {
        if (y.size() != xtilde.n())
            throw std::invalid_argument("RankOneData: response length mismatch");
        if (gram.rows() != xtilde.num_wavenumbers() || gram.cols() != gram.rows())
            throw std::invalid_argument("RankOneData: Gram dim mismatch");
    }
};

/// sum_{ijl} alpha_i beta_j gamma_l xtilde_{kijl} for sample k.
double predict_sample(const RankOneModel& model, const Tensor4& xtilde, int k);
Eigen::VectorXd predict_all(const RankOneModel& model, const Tensor4& xtilde);

/// Five-term regularized objective:
/// (1/2n) sum_k residual^2 + (ka/sqrt(p))||a||_2 + (kb/sqrt(d))||b||_2
///   + (kg/N)||g||_1 + (kG/N^2) sum_{l'l} Gram_{l'l} |g_l' - g_l|.
double objective(const RankOneModel& model, const RankOneData& data, const RegParams& params);

// Design matrices for the three block subproblems.
Eigen::MatrixXd alpha_design(const Tensor4& xtilde, const Eigen::VectorXd& beta,
                             const Eigen::VectorXd& gamma);  // n x p
Eigen::MatrixXd beta_design(const Tensor4& xtilde, const Eigen::VectorXd& alpha,
                            const Eigen::VectorXd& gamma);   // n x d
Eigen::MatrixXd gamma_design(const Tensor4& xtilde, const Eigen::VectorXd& alpha,
                             const Eigen::VectorXd& beta);   // n x N

struct NonnegL2Options {
    double tol = 1e-8;
    int max_iter = 20000;
};

/// min (1/2n)||y - M a||^2 + c ||a||_2 over a >= 0, by projected proximal
/// gradient; the prox of c||.||_2 plus nonnegativity clamps negatives to zero
/// then applies block shrinkage.
Eigen::VectorXd solve_nonneg_l2(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double c,
                                Eigen::VectorXd init, const NonnegL2Options& opts = {},
                                bool* converged = nullptr);

struct GammaOptions {
    double abs_tol = 1e-7;
    double rel_tol = 1e-5;
    int max_iter = 20000;
    double graph_eps = 1e-3;  // drop Gram pairs below graph_eps * max entry
};

struct GammaWarmState {
    Eigen::VectorXd z, u;
    double rho = 1.0;
};

/// Rows of the generalized-lasso penalty matrix D: scaled coordinate rows
/// (kg/N) plus scaled pairwise-difference rows (2 kG Gram_{l'l} / N^2) for the
/// retained Gram graph edges. Penalty = ||D gamma||_1.
Eigen::MatrixXd build_penalty_matrix(double kappa_gamma, double kappa_gram,
                                     const Eigen::MatrixXd& gram, double graph_eps);

/// min (1/2n)||y - U g||^2 + ||D g||_1 by ADMM with residual-balanced rho.
/// Never returns an iterate worse than `init` in the subproblem objective.
Eigen::VectorXd solve_gamma(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                            double kappa_gamma, double kappa_gram,
                            const Eigen::MatrixXd& gram, Eigen::VectorXd init,
                            const GammaOptions& opts = {}, GammaWarmState* warm = nullptr,
                            bool* converged = nullptr);

struct FitOptions {
    double tol_outer = 1e-6;
    int max_outer = 200;
    int restarts = 1;
    uint64_t seed = 0;
    NonnegL2Options ab_opts;
    GammaOptions gamma_opts;
};

struct FitReport {
    std::vector<double> trajectory;  // objective after every block update
    bool converged = false;
    bool zero_model = false;
    int sweeps = 0;
    double final_objective = 0.0;
};

/// Alternating minimization, block order gamma -> alpha -> beta. Blocks of
/// length 1 stay fixed at 1, so p=d=1 reduces to the gamma solve alone and
/// d=1 runs a two-block (alpha, gamma) path. Aborts if the objective ever
/// increases beyond numerical slack.
std::pair<RankOneModel, FitReport> fit_alternating(const RankOneData& data,
                                                   const RegParams& params,
                                                   const FitOptions& opts = {});

/// Continuous coefficient curve: sum_l gamma_l * kernel(t, t_l) over the kept grid.
double eval_coefficient_function(const RankOneModel& model, const KernelSpec& spec,
                                 const SpectralGrid& kept_grid, double t);

}  // namespace spectensor

#endif
