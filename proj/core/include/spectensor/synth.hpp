#ifndef SPECTENSOR_SYNTH_HPP
#define SPECTENSOR_SYNTH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spectensor/tensor.hpp"

namespace spectensor {

/// Generator configuration: pure components mixed per sample, per-(source,
/// detector) gains, a planted rank-one model and the two noise levels.
struct SyntheticSpec {
    int n = 0, p = 0, d = 0;
    SpectralGrid grid;

    struct Component {
        double center = 0, width = 1, amplitude = 1;
    };
    std::vector<Component> components;

    double dirichlet_concentration = 1.0;  // mixing-weight law
    double gain_lo = 0.1, gain_hi = 10.0;  // log-uniform per-(i,j) gains

    Eigen::VectorXd alpha_star, beta_star, gamma_star;  // planted model

    double sigma_spec = 0.0;  // spectral Gaussian noise, clamped at 0
    double sigma_resp = 0.0;  // response noise (the additive eps)
    uint64_t seed = 0;

    void validate() const;

    /// Paper-shaped defaults with a handful of Lorentzian components and a
    /// sparse planted gamma; gamma_star has length `gamma_len` (pass the
    /// post-selection size when known).
    static SyntheticSpec default_spec(int n, int p, int d, const SpectralGrid& grid,
                                      int gamma_len, uint64_t seed);
};

struct GroundTruth {
    Eigen::MatrixXd mixing_weights;  // n x components
    Eigen::MatrixXd gains;           // p x d
    Eigen::VectorXd alpha_star, beta_star, gamma_star;
};

/// Component spectra on the grid, one column per component.
Eigen::MatrixXd generate_pure_components(const SyntheticSpec& spec);

/// X^k_{ij} = gain_{ij} * sum_m weight^k_m * component_m + noise, clamped at 0.
SpectrumTensor generate_tensor(const SyntheticSpec& spec, GroundTruth* truth = nullptr);

/// y^k = planted rank-one prediction on xtilde plus i.i.d. Gaussian noise.
ResponseVector generate_response(const SyntheticSpec& spec, const Tensor4& xtilde);

}  // namespace spectensor

#endif
