#include "spectensor/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace spectensor {

MeanPredictor MeanPredictor::fit(const Eigen::VectorXd& train_responses) {
    if (train_responses.size() == 0)
        throw std::invalid_argument("MeanPredictor: empty training set");
    return {train_responses.mean()};
}

namespace {

int nearest_grid_index(const SpectralGrid& grid, double w) {
    int best = 0;
    double bd = std::abs(grid[0] - w);
    for (int l = 1; l < grid.size(); ++l) {
        double d = std::abs(grid[l] - w);
        if (d < bd) {
            bd = d;
            best = l;
        }
    }
    return best;
}

}  // namespace

Eigen::VectorXd extract_peak_average(const CoeffTensor& coeffs, const KernelSpec& kspec,
                                     double peak) {
    const SpectralGrid& grid = coeffs.grid;
    if (peak < grid[0] || peak > grid[grid.size() - 1])
        throw std::invalid_argument("extract_peak_average: peak outside grid range");
    int lp = nearest_grid_index(grid, peak);

    // fitted value at a grid point is the kernel row against the coefficients
    const int nw = grid.size();
    Eigen::VectorXd krow(nw);
    for (int l = 0; l < nw; ++l) krow[l] = kernel_value(kspec, grid[lp], grid[l]);

    const Tensor4& x = coeffs.values;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.n());
    for (int k = 0; k < x.n(); ++k) {
        double acc = 0.0;
        for (int i = 0; i < x.p(); ++i)
            for (int j = 0; j < x.d(); ++j) acc += krow.dot(x.spectrum_vec(k, i, j));
        out[k] = acc / (double(x.p()) * x.d());
    }
    return out;
}

RatioCovariates extract_ratio_covariate(const CoeffTensor& coeffs, const KernelSpec& kspec,
                                        double peak_num, double peak_den) {
    Eigen::VectorXd a1 = extract_peak_average(coeffs, kspec, peak_num);
    Eigen::VectorXd a2 = extract_peak_average(coeffs, kspec, peak_den);

    RatioCovariates out;
    out.values = Eigen::VectorXd::Zero(a1.size());
    out.usable.assign(static_cast<size_t>(a1.size()), 1);
    const double eps_den = 1e-12;
    for (Eigen::Index k = 0; k < a1.size(); ++k) {
        if (std::abs(a2[k]) < eps_den) {
            out.usable[static_cast<size_t>(k)] = 0;
            out.values[k] = 0.0;
        } else {
            out.values[k] = a1[k] / a2[k];
        }
    }
    return out;
}

RatioRegressionModel fit_ratio_regression(const Eigen::VectorXd& train_covariates,
                                          const Eigen::VectorXd& train_responses,
                                          bool with_intercept) {
    if (train_covariates.size() != train_responses.size() || train_covariates.size() < 2)
        throw std::invalid_argument("fit_ratio_regression: need >= 2 paired samples");

    RatioRegressionModel m;
    double xbar = train_covariates.mean();
    double sxx = (train_covariates.array() - xbar).square().sum();
    if (sxx <= 1e-24 * train_covariates.size()) {
        m.fallback_to_mean = true;
        m.fallback_mean = train_responses.mean();
        return m;
    }
    if (with_intercept) {
        double ybar = train_responses.mean();
        double sxy = ((train_covariates.array() - xbar) *
                      (train_responses.array() - ybar)).sum();
        m.slope = sxy / sxx;
        m.intercept = ybar - m.slope * xbar;
    } else {
        double sxx0 = train_covariates.squaredNorm();
        m.slope = train_covariates.dot(train_responses) / sxx0;
        m.intercept = 0.0;
    }
    return m;
}

}  // namespace spectensor
