#ifndef SPECTENSOR_CV_HPP
#define SPECTENSOR_CV_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spectensor/rank_one.hpp"
#include "spectensor/tensor.hpp"

namespace spectensor {

struct CVBatch {
    std::vector<int> train;
    std::vector<int> test;
    int id = 0;
    uint64_t seed = 0;
};

/// Stratified draw when `groups` is nonempty (per_group_test samples from each
/// group), uniform draw of total_test otherwise. Reproducible given seed.
std::vector<CVBatch> make_cv_batches(int n_samples, const std::vector<std::string>& groups,
                                     int n_batches, int per_group_test, int total_test,
                                     uint64_t seed);

enum class ErrorMetric { median_ad, mean_ad };

double error_metric(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual,
                    ErrorMetric metric = ErrorMetric::median_ad);

/// Inputs the harness fits on: Gram-transformed covariates, normalized
/// response, and the precomputed ratio covariate for the baseline.
struct CVDataset {
    Tensor4 xtilde;
    Eigen::VectorXd y;
    Eigen::MatrixXd gram;
    Eigen::VectorXd ratio_covariate;   // empty disables the ratio baseline
    std::vector<uint8_t> ratio_usable;
};

struct BatchErrors {
    int batch_id = 0;
    double train_model = 0, test_model = 0;
    double train_mean = 0, test_mean = 0;
    double train_ratio = 0, test_ratio = 0;
    bool has_ratio = false;
    RegParams chosen;
    Eigen::VectorXd alpha, beta;  // coefficients of the chosen fit
};

struct CVReport {
    std::string policy;  // "fixed" or "adaptive"
    ErrorMetric metric = ErrorMetric::median_ad;
    std::vector<BatchErrors> batches;
    RegParams selected;  // fixed policy only
    int fit_failures = 0;
    double mean_test_model = 0, mean_test_mean = 0, mean_test_ratio = 0;
};

/// Default logarithmic grid over the four penalties (reduced factorial design).
std::vector<RegParams> default_param_grid();

/// One parameter point for all batches, chosen to minimize the mean test error.
/// Ties broken lexicographically by the kappa vector.
CVReport run_cv_fixed(const CVDataset& data, const std::vector<RegParams>& grid,
                      const std::vector<CVBatch>& batches,
                      ErrorMetric metric = ErrorMetric::median_ad,
                      const FitOptions& fit_opts = {});

/// Oracle policy: per batch, the grid point minimizing that batch's test error.
CVReport run_cv_adaptive(const CVDataset& data, const std::vector<RegParams>& grid,
                         const std::vector<CVBatch>& batches,
                         ErrorMetric metric = ErrorMetric::median_ad,
                         const FitOptions& fit_opts = {});

/// Samples whose mean error exceeds median + c * IQR.
std::vector<int> screen_outliers(const Eigen::VectorXd& per_sample_mean_error, double c = 3.0);

struct BandStat {
    double lo = 0, hi = 0;
    int count = 0;
    double mean = 0, median = 0;
};

/// Equal-width bands over [min y, max y]; per band count/mean/median of the covariate.
std::vector<BandStat> band_summary(const Eigen::VectorXd& covariate,
                                   const Eigen::VectorXd& response, int n_bands = 3);

}  // namespace spectensor

#endif
