#ifndef SPECTENSOR_SELECTION_HPP
#define SPECTENSOR_SELECTION_HPP

#include <Eigen/Dense>
#include <vector>

#include "spectensor/tensor.hpp"

namespace spectensor {

enum class ScoreMode { weighted, frequency };

/// Per-wavenumber score: weighted mode averages the coefficients over all
/// (source, detector, sample) triples; frequency mode averages the indicator
/// of a nonzero coefficient.
Eigen::VectorXd compute_scores(const CoeffTensor& coeffs, ScoreMode mode);

struct SelectedSubset {
    std::vector<int> kept_indices;  // sorted ascending into the full grid
    SpectralGrid reduced;
};

/// Indices of the N largest scores; ties broken toward the smaller grid index.
SelectedSubset select_top(const Eigen::VectorXd& scores, const SpectralGrid& grid, int n_keep);

/// Restrict a coefficient tensor to the kept wavenumbers.
Tensor4 restrict_tensor(const Tensor4& t, const std::vector<int>& kept);

/// Gram transform x~_{ijl'} = sum_l Gram_{l'l} x_{ijl} over the kept grid.
Tensor4 transform_xtilde(const Tensor4& coeffs_kept, const Eigen::MatrixXd& gram);

}  // namespace spectensor

#endif
