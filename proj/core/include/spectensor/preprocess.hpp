#ifndef SPECTENSOR_PREPROCESS_HPP
#define SPECTENSOR_PREPROCESS_HPP

#include <vector>

#include "spectensor/tensor.hpp"

namespace spectensor {

enum class NormalizationMode { none, max_amplitude, source_energy };

/// Degenerate (all-zero) slices pass through unchanged and are listed here.
struct NormalizationFlags {
    std::vector<std::pair<int, int>> degenerate_slices;  // (i,j) or (i,k) pairs
};

/// Drop wavenumbers above `upper`. Throws if nothing would remain.
SpectrumTensor truncate_grid(const SpectrumTensor& t, double upper);

/// Keep every m-th wavenumber, starting from index 0.
SpectrumTensor subsample_grid(const SpectrumTensor& t, int m);

/// Per source-detector pair (i,j): divide by the max over samples and
/// wavenumbers, so the per-pair max amplitude becomes 1.
Tensor4 normalize_max_amplitude(const Tensor4& t, NormalizationFlags* flags = nullptr);

/// Per (source i, sample k): divide by the l2 norm over detectors and
/// wavenumbers, so each source slice has unit energy.
Tensor4 normalize_source_energy(const Tensor4& t, NormalizationFlags* flags = nullptr);

/// Center to mean 0 and rescale so max |y| = 1; records (center, scale).
ResponseVector normalize_response(const Eigen::VectorXd& raw);

}  // namespace spectensor

#endif
