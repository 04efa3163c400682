#ifndef SPECTENSOR_SVG_PLOT_HPP
#define SPECTENSOR_SVG_PLOT_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spectensor/cv.hpp"
#include "spectensor/kernel.hpp"

namespace spectensor {

/// All emitters produce deterministic SVG bytes for fixed input and write
/// atomically. Empty series yield a valid SVG with an empty plot area.

void emit_scatter_pred_vs_actual(const std::string& path, const Eigen::VectorXd& actual,
                                 const Eigen::VectorXd& predicted);

/// Per-batch model test error versus the mean-predictor test error, with the
/// identity line for reference.
void emit_error_scatter(const std::string& path, const Eigen::VectorXd& model_errors,
                        const Eigen::VectorXd& baseline_errors);

/// One box per column of `samples` (rows are observations, e.g. CV batches).
void emit_coeff_boxplot(const std::string& path, const Eigen::MatrixXd& samples,
                        const std::vector<std::string>& labels);

/// Observed and fitted curves plus vertical stems at the nonzero coefficients.
void emit_spectrum_fit(const std::string& path, const SpectralGrid& grid,
                       const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted,
                       const Eigen::VectorXd& coeffs);

/// Score profile over the full grid with the kept wavenumbers marked.
void emit_scores(const std::string& path, const SpectralGrid& grid,
                 const Eigen::VectorXd& scores, const std::vector<int>& kept_indices);

void emit_band_summary(const std::string& path, const std::vector<BandStat>& bands);

}  // namespace spectensor

#endif
