#include "spectensor/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace spectensor {

Eigen::VectorXd compute_scores(const CoeffTensor& coeffs, ScoreMode mode) {
    const Tensor4& x = coeffs.values;
    const int nw = x.num_wavenumbers();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(nw);
    for (int k = 0; k < x.n(); ++k)
        for (int i = 0; i < x.p(); ++i)
            for (int j = 0; j < x.d(); ++j) {
                const double* sp = x.spectrum(k, i, j);
                if (mode == ScoreMode::weighted) {
                    for (int l = 0; l < nw; ++l) s[l] += sp[l];
                } else {
                    for (int l = 0; l < nw; ++l)
                        if (sp[l] != 0.0) s[l] += 1.0;
                }
            }
    s /= static_cast<double>(x.n()) * x.p() * x.d();
    return s;
}

SelectedSubset select_top(const Eigen::VectorXd& scores, const SpectralGrid& grid, int n_keep) {
    const int nw = static_cast<int>(scores.size());
    if (nw != grid.size())
        throw std::invalid_argument("select_top: scores/grid length mismatch");
    if (n_keep < 1 || n_keep > nw)
        throw std::invalid_argument("select_top: N must be in [1, N']");

    std::vector<int> order(static_cast<size_t>(nw));
    std::iota(order.begin(), order.end(), 0);
    // stable sort by descending score keeps the smaller grid index on ties
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    order.resize(static_cast<size_t>(n_keep));
    std::sort(order.begin(), order.end());

    SelectedSubset sub;
    sub.kept_indices = order;
    std::vector<double> pts;
    pts.reserve(order.size());
    for (int idx : order) pts.push_back(grid[idx]);
    sub.reduced = SpectralGrid(std::move(pts));
    return sub;
}

Tensor4 restrict_tensor(const Tensor4& t, const std::vector<int>& kept) {
    for (size_t a = 1; a < kept.size(); ++a)
        if (kept[a] <= kept[a - 1])
            throw std::invalid_argument("restrict_tensor: indices must be sorted and distinct");
    if (kept.empty() || kept.front() < 0 || kept.back() >= t.num_wavenumbers())
        throw std::invalid_argument("restrict_tensor: index out of range");
    Tensor4 out(t.n(), t.p(), t.d(), static_cast<int>(kept.size()));
    for (int k = 0; k < t.n(); ++k)
        for (int i = 0; i < t.p(); ++i)
            for (int j = 0; j < t.d(); ++j) {
                const double* src = t.spectrum(k, i, j);
                double* dst = out.spectrum(k, i, j);
                for (size_t a = 0; a < kept.size(); ++a) dst[a] = src[kept[a]];
            }
    return out;
}

Tensor4 transform_xtilde(const Tensor4& coeffs_kept, const Eigen::MatrixXd& gram) {
    const int nw = coeffs_kept.num_wavenumbers();
    if (gram.rows() != nw || gram.cols() != nw)
        throw std::invalid_argument("transform_xtilde: Gram dim mismatch");
    Tensor4 out(coeffs_kept.n(), coeffs_kept.p(), coeffs_kept.d(), nw);
    for (int k = 0; k < coeffs_kept.n(); ++k)
        for (int i = 0; i < coeffs_kept.p(); ++i)
            for (int j = 0; j < coeffs_kept.d(); ++j)
                out.spectrum_vec(k, i, j) = gram * coeffs_kept.spectrum_vec(k, i, j);
    return out;
}

}  // namespace spectensor
