#include "spectensor/preprocess.hpp"

#include <cmath>
#include <stdexcept>

namespace spectensor {

SpectrumTensor truncate_grid(const SpectrumTensor& t, double upper) {
    t.validate();
    std::vector<int> kept;
    for (int l = 0; l < t.grid.size(); ++l)
        if (t.grid[l] <= upper) kept.push_back(l);
    if (kept.empty()) throw std::invalid_argument("truncate_grid: no wavenumbers remain");
    if (static_cast<int>(kept.size()) == t.grid.size()) return t;

    SpectrumTensor out;
    out.meta = t.meta;
    std::vector<double> pts;
    for (int l : kept) pts.push_back(t.grid[l]);
    out.grid = SpectralGrid(std::move(pts));
    out.values = Tensor4(t.values.n(), t.values.p(), t.values.d(),
                         static_cast<int>(kept.size()));
    for (int k = 0; k < t.values.n(); ++k)
        for (int i = 0; i < t.values.p(); ++i)
            for (int j = 0; j < t.values.d(); ++j) {
                const double* src = t.values.spectrum(k, i, j);
                double* dst = out.values.spectrum(k, i, j);
                for (size_t a = 0; a < kept.size(); ++a) dst[a] = src[kept[a]];
            }
    return out;
}

SpectrumTensor subsample_grid(const SpectrumTensor& t, int m) {
    t.validate();
    if (m < 1) throw std::invalid_argument("subsample_grid: rate denominator must be >= 1");
    if (m == 1) return t;
    std::vector<int> kept;
    for (int l = 0; l < t.grid.size(); l += m) kept.push_back(l);

    SpectrumTensor out;
    out.meta = t.meta;
    std::vector<double> pts;
    for (int l : kept) pts.push_back(t.grid[l]);
    out.grid = SpectralGrid(std::move(pts));
    out.values = Tensor4(t.values.n(), t.values.p(), t.values.d(),
                         static_cast<int>(kept.size()));
    for (int k = 0; k < t.values.n(); ++k)
        for (int i = 0; i < t.values.p(); ++i)
            for (int j = 0; j < t.values.d(); ++j) {
                const double* src = t.values.spectrum(k, i, j);
                double* dst = out.values.spectrum(k, i, j);
                for (size_t a = 0; a < kept.size(); ++a) dst[a] = src[kept[a]];
            }
    return out;
}

Tensor4 normalize_max_amplitude(const Tensor4& t, NormalizationFlags* flags) {
    Tensor4 out = t;
    for (int i = 0; i < t.p(); ++i)
        for (int j = 0; j < t.d(); ++j) {
            double mx = 0.0;
            for (int k = 0; k < t.n(); ++k) {
                const double* sp = t.spectrum(k, i, j);
                for (int l = 0; l < t.num_wavenumbers(); ++l)
                    mx = std::max(mx, sp[l]);
            }
            if (mx <= 0.0) {
                if (flags) flags->degenerate_slices.emplace_back(i, j);
                continue;
            }
            for (int k = 0; k < t.n(); ++k) {
                double* sp = out.spectrum(k, i, j);
                for (int l = 0; l < t.num_wavenumbers(); ++l) sp[l] /= mx;
            }
        }
    return out;
}

Tensor4 normalize_source_energy(const Tensor4& t, NormalizationFlags* flags) {
    Tensor4 out = t;
    for (int i = 0; i < t.p(); ++i)
        for (int k = 0; k < t.n(); ++k) {
            double ss = 0.0;
            for (int j = 0; j < t.d(); ++j) {
                const double* sp = t.spectrum(k, i, j);
                for (int l = 0; l < t.num_wavenumbers(); ++l) ss += sp[l] * sp[l];
            }
            if (ss <= 0.0) {
                if (flags) flags->degenerate_slices.emplace_back(i, k);
                continue;
            }
            double inv = 1.0 / std::sqrt(ss);
            for (int j = 0; j < t.d(); ++j) {
                double* sp = out.spectrum(k, i, j);
                for (int l = 0; l < t.num_wavenumbers(); ++l) sp[l] *= inv;
            }
        }
    return out;
}

ResponseVector normalize_response(const Eigen::VectorXd& raw) {
    if (raw.size() < 2)
        throw std::invalid_argument("normalize_response: need at least 2 samples");
    double center = raw.mean();
    Eigen::VectorXd centered = raw.array() - center;
    double scale = centered.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        throw std::invalid_argument("normalize_response: constant response");
    ResponseVector y;
    y.values = centered / scale;
    y.center = center;
    y.scale = scale;
    return y;
}

}  // namespace spectensor
