#include <doctest.h>

#include <random>

#include "spectensor/baselines.hpp"
#include "spectensor/cv.hpp"
#include "spectensor/preprocess.hpp"

using namespace spectensor;

namespace {

CoeffTensor flat_coeffs(int n, const std::vector<double>& grid_pts,
                        const std::vector<double>& spectrum) {
    CoeffTensor c;
    c.grid = SpectralGrid(grid_pts);
    c.values = Tensor4(n, 1, 1, static_cast<int>(grid_pts.size()));
    for (int k = 0; k < n; ++k)
        for (size_t l = 0; l < spectrum.size(); ++l)
            c.values(k, 0, 0, static_cast<int>(l)) = spectrum[l];
    return c;
}

}  // namespace

TEST_CASE("mean predictor") {
    Eigen::VectorXd y(3);
    y << -1.0, 0.0, 1.0;
    CHECK(MeanPredictor::fit(y).predict() == doctest::Approx(0.0));
    CHECK(MeanPredictor::fit(Eigen::VectorXd::Constant(1, 2.0)).predict() == doctest::Approx(2.0));
    CHECK_THROWS(MeanPredictor::fit(Eigen::VectorXd()));

    // centered responses predict ~0
    Eigen::VectorXd raw(4);
    raw << 3.0, 7.0, 1.0, 9.0;
    ResponseVector norm = normalize_response(raw);
    CHECK(std::abs(MeanPredictor::fit(norm.values).predict()) < 1e-12);
}

TEST_CASE("mean predictor train error equals MAD about the mean") {
    Eigen::VectorXd y(5);
    y << 0.1, -0.3, 0.7, -0.2, 0.5;
    MeanPredictor m = MeanPredictor::fit(y);
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(5, m.predict());
    Eigen::VectorXd dev = (y.array() - y.mean()).abs();
    std::sort(dev.data(), dev.data() + dev.size());
    CHECK(error_metric(pred, y) == doctest::Approx(dev[2]));
}

TEST_CASE("ratio covariate from identical flat spectra") {
    // delta coefficients on a widely spaced grid: fitted value at a grid point
    // is ~the coefficient there (kernel is near-identity)
    std::vector<double> grid{954.0, 1450.0};
    CoeffTensor c = flat_coeffs(3, grid, {2.0, 4.0});
    KernelSpec spec{KernelFamily::lorentzian, 1.0};
    RatioCovariates rc = extract_ratio_covariate(c, spec, 954.0, 1450.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(rc.usable[static_cast<size_t>(k)] == 1);
        CHECK(rc.values[k] == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("zero denominator flags the sample") {
    CoeffTensor c = flat_coeffs(2, {954.0, 1450.0}, {0.0, 0.0});
    KernelSpec spec{KernelFamily::lorentzian, 1.0};
    RatioCovariates rc = extract_ratio_covariate(c, spec, 954.0, 1450.0);
    CHECK(rc.usable[0] == 0);
    CHECK(rc.usable[1] == 0);
    CHECK(rc.values[0] == doctest::Approx(0.0));
}

TEST_CASE("peak outside the grid range throws") {
    CoeffTensor c = flat_coeffs(1, {954.0, 1450.0}, {1.0, 1.0});
    KernelSpec spec{KernelFamily::lorentzian, 1.0};
    CHECK_THROWS(extract_peak_average(c, spec, 2000.0));
}

TEST_CASE("ratio is invariant under common positive rescaling of the spectra") {
    CoeffTensor c = flat_coeffs(2, {954.0, 1200.0, 1450.0}, {2.0, 1.0, 4.0});
    KernelSpec spec{KernelFamily::lorentzian, 15.0};
    RatioCovariates a = extract_ratio_covariate(c, spec, 954.0, 1450.0);
    for (double& v : c.values.data()) v *= 3.7;
    RatioCovariates b = extract_ratio_covariate(c, spec, 954.0, 1450.0);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical peaks give covariate 1 and the OLS fallback") {
    CoeffTensor c = flat_coeffs(4, {954.0, 1450.0}, {2.0, 4.0});
    KernelSpec spec{KernelFamily::lorentzian, 1.0};
    RatioCovariates rc = extract_ratio_covariate(c, spec, 954.0, 954.0);
    for (int k = 0; k < 4; ++k) CHECK(rc.values[k] == doctest::Approx(1.0));

    Eigen::VectorXd y(4);
    y << 0.5, -0.5, 0.25, 1.0;
    RatioRegressionModel m = fit_ratio_regression(rc.values, y);
    CHECK(m.fallback_to_mean);
    CHECK(m.predict(1.0) == doctest::Approx(y.mean()));
}

TEST_CASE("ratio regression recovers an exact affine relationship") {
    Eigen::VectorXd ratio(5);
    ratio << 0.2, 0.5, 0.9, 1.3, 2.0;
    Eigen::VectorXd y = 3.0 * ratio.array() + 1.0;
    RatioRegressionModel m = fit_ratio_regression(ratio, y);
    CHECK(m.slope == doctest::Approx(3.0));
    CHECK(m.intercept == doctest::Approx(1.0));
    for (int k = 0; k < 5; ++k) CHECK(m.predict(ratio[k]) == doctest::Approx(y[k]));

    RatioRegressionModel no_icpt = fit_ratio_regression(ratio, (2.0 * ratio).eval(), false);
    CHECK(no_icpt.slope == doctest::Approx(2.0));
    CHECK(no_icpt.intercept == doctest::Approx(0.0));
}
