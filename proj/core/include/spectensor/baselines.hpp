#ifndef SPECTENSOR_BASELINES_HPP
#define SPECTENSOR_BASELINES_HPP

#include <Eigen/Dense>
#include <vector>

#include "spectensor/kernel.hpp"
#include "spectensor/tensor.hpp"

namespace spectensor {

/// Predicts the training-set mean for every test point.
struct MeanPredictor {
    double mean = 0.0;
    static MeanPredictor fit(const Eigen::VectorXd& train_responses);
    double predict() const { return mean; }
};

/// OLS of the response on the mineral-to-matrix peak ratio.
struct RatioRegressionModel {
    double peak_num_wavenumber = 954.0;
    double peak_den_wavenumber = 1450.0;
    double intercept = 0.0;
    double slope = 0.0;
    bool fallback_to_mean = false;  // degenerate (constant) covariate
    double fallback_mean = 0.0;

    double predict(double ratio) const {
        return fallback_to_mean ? fallback_mean : intercept + slope * ratio;
    }
};

/// Per sample: fitted-spectrum value (K x) at the grid point nearest `peak`,
/// averaged over all (source, detector) pairs.
Eigen::VectorXd extract_peak_average(const CoeffTensor& coeffs, const KernelSpec& kspec,
                                     double peak);

struct RatioCovariates {
    Eigen::VectorXd values;            // per sample
    std::vector<uint8_t> usable;       // denominator above threshold
};

/// Per sample: average over all (source, detector) pairs of the fitted
/// spectrum value (K x) at the grid point nearest each peak, then
/// numerator / denominator. Samples with |denominator| < 1e-12 are flagged.
RatioCovariates extract_ratio_covariate(const CoeffTensor& coeffs, const KernelSpec& kspec,
                                        double peak_num, double peak_den);

/// OLS on (1, ratio); falls back to the mean predictor on a constant covariate.
RatioRegressionModel fit_ratio_regression(const Eigen::VectorXd& train_covariates,
                                          const Eigen::VectorXd& train_responses,
                                          bool with_intercept = true);

}  // namespace spectensor

#endif
