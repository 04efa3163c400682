#ifndef SPECTENSOR_TENSOR_HPP
#define SPECTENSOR_TENSOR_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectensor/kernel.hpp"

namespace spectensor {

/// Dense 4-way array indexed (sample k, source i, detector j, wavenumber l),
/// dims n x p x d x N. Row-major flat storage, l fastest.
class Tensor4 {
  public:
    Tensor4() = default;
    Tensor4(int n, int p, int d, int nw)
        : n_(n), p_(p), d_(d), nw_(nw),
          v_(static_cast<size_t>(n) * p * d * nw, 0.0) {
        if (n < 1 || p < 1 || d < 1 || nw < 1)
            throw std::invalid_argument("Tensor4: all dims must be >= 1");
    }

    int n() const { return n_; }
    int p() const { return p_; }
    int d() const { return d_; }
    int num_wavenumbers() const { return nw_; }
    size_t size() const { return v_.size(); }

    double& operator()(int k, int i, int j, int l) { return v_[idx(k, i, j, l)]; }
    double operator()(int k, int i, int j, int l) const { return v_[idx(k, i, j, l)]; }

    double* spectrum(int k, int i, int j) { return v_.data() + idx(k, i, j, 0); }
    const double* spectrum(int k, int i, int j) const { return v_.data() + idx(k, i, j, 0); }

    Eigen::Map<const Eigen::VectorXd> spectrum_vec(int k, int i, int j) const {
        return {spectrum(k, i, j), nw_};
    }
    Eigen::Map<Eigen::VectorXd> spectrum_vec(int k, int i, int j) {
        return {spectrum(k, i, j), nw_};
    }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

  private:
    size_t idx(int k, int i, int j, int l) const {
        return ((static_cast<size_t>(k) * p_ + i) * d_ + j) * nw_ + l;
    }
    int n_ = 0, p_ = 0, d_ = 0, nw_ = 0;
    std::vector<double> v_;
};

struct SampleMeta {
    std::string id;
    std::string group;  // e.g. week label; empty when ungrouped
};

/// Observed spectra X indexed by (sample, source, detector, wavenumber).
struct SpectrumTensor {
    Tensor4 values;
    SpectralGrid grid;
    std::vector<SampleMeta> meta;  // length n

    void validate() const {
        if (values.num_wavenumbers() != grid.size())
            throw std::invalid_argument("SpectrumTensor: grid/value dim mismatch");
        if (!meta.empty() && static_cast<int>(meta.size()) != values.n())
            throw std::invalid_argument("SpectrumTensor: metadata length mismatch");
        if (!values.all_finite())
            throw std::invalid_argument("SpectrumTensor: non-finite entries");
    }
};

/// Nonnegative kernel-expansion coefficients, one spectrum slot per (k,i,j).
struct CoeffTensor {
    Tensor4 values;
    SpectralGrid grid;
    std::vector<SampleMeta> meta;
    std::vector<uint8_t> converged;  // per (k,i,j), flattened k-major

    size_t flag_index(int k, int i, int j) const {
        return (static_cast<size_t>(k) * values.p() + i) * values.d() + j;
    }
};

/// Scalar response with its recorded centering/scaling transform.
struct ResponseVector {
    Eigen::VectorXd values;
    double center = 0.0;
    double scale = 1.0;

    Eigen::VectorXd to_raw() const { return (values.array() * scale + center).matrix(); }
};

}  // namespace spectensor

#endif
