#include "spectensor/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "spectensor/kernel.hpp"
#include "spectensor/rank_one.hpp"

namespace spectensor {

void SyntheticSpec::validate() const {
    if (n < 1 || p < 1 || d < 1) throw std::invalid_argument("SyntheticSpec: bad dims");
    grid.validate();
    if (components.empty()) throw std::invalid_argument("SyntheticSpec: no components");
    for (const auto& c : components)
        if (!(c.width > 0) || !(c.amplitude >= 0))
            throw std::invalid_argument("SyntheticSpec: component width/amplitude invalid");
    if (sigma_spec < 0 || sigma_resp < 0)
        throw std::invalid_argument("SyntheticSpec: negative noise level");
    if (!(gain_lo > 0) || !(gain_hi >= gain_lo))
        throw std::invalid_argument("SyntheticSpec: bad gain range");
}

SyntheticSpec SyntheticSpec::default_spec(int n, int p, int d, const SpectralGrid& grid,
                                          int gamma_len, uint64_t seed) {
    SyntheticSpec s;
    s.n = n;
    s.p = p;
    s.d = d;
    s.grid = grid;
    s.seed = seed;

    double lo = grid[0], hi = grid[grid.size() - 1];
    double span = std::max(hi - lo, 1.0);
    int n_comp = 6;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> amp(0.5, 2.0);
    for (int m = 0; m < n_comp; ++m) {
        Component c;
        c.center = lo + span * (m + 0.5) / n_comp;
        c.width = span / 60.0;
        c.amplitude = amp(rng);
        s.components.push_back(c);
    }

    std::uniform_real_distribution<double> unit(0.2, 1.0);
    s.alpha_star = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return unit(rng); });
    s.beta_star = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return unit(rng); });
    s.gamma_star = Eigen::VectorXd::Zero(gamma_len);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    int nnz = std::max(2, gamma_len / 5);
    for (int t = 0; t < nnz; ++t) {
        int idx = static_cast<int>(rng() % static_cast<uint64_t>(gamma_len));
        s.gamma_star[idx] = coef(rng);
    }
    if (s.gamma_star.isZero(0.0)) s.gamma_star[0] = 1.0;
    return s;
}

Eigen::MatrixXd generate_pure_components(const SyntheticSpec& spec) {
    spec.validate();
    const int nw = spec.grid.size();
    Eigen::MatrixXd comps(nw, static_cast<Eigen::Index>(spec.components.size()));
    for (size_t m = 0; m < spec.components.size(); ++m) {
        const auto& c = spec.components[m];
        KernelSpec ks{KernelFamily::lorentzian, c.width};
        for (int l = 0; l < nw; ++l)
            comps(l, static_cast<Eigen::Index>(m)) =
                c.amplitude * kernel_value(ks, spec.grid[l], c.center);
    }
    return comps;
}

SpectrumTensor generate_tensor(const SyntheticSpec& spec, GroundTruth* truth) {
    spec.validate();
    const int nw = spec.grid.size();
    const int n_comp = static_cast<int>(spec.components.size());
    Eigen::MatrixXd comps = generate_pure_components(spec);

    std::mt19937_64 rng(spec.seed);
    std::gamma_distribution<double> gam(spec.dirichlet_concentration, 1.0);
    Eigen::MatrixXd weights(spec.n, n_comp);
    for (int k = 0; k < spec.n; ++k) {
        double sum = 0.0;
        for (int m = 0; m < n_comp; ++m) {
            weights(k, m) = gam(rng);
            sum += weights(k, m);
        }
        if (sum > 0) weights.row(k) /= sum;
    }

    std::uniform_real_distribution<double> logu(std::log(spec.gain_lo), std::log(spec.gain_hi));
    Eigen::MatrixXd gains(spec.p, spec.d);
    for (int i = 0; i < spec.p; ++i)
        for (int j = 0; j < spec.d; ++j) gains(i, j) = std::exp(logu(rng));

    std::normal_distribution<double> noise(0.0, 1.0);
    SpectrumTensor out;
    out.grid = spec.grid;
    out.values = Tensor4(spec.n, spec.p, spec.d, nw);
    out.meta.resize(static_cast<size_t>(spec.n));
    for (int k = 0; k < spec.n; ++k) out.meta[static_cast<size_t>(k)].id = "s" + std::to_string(k);

    for (int k = 0; k < spec.n; ++k) {
        Eigen::VectorXd mix = comps * weights.row(k).transpose();
        for (int i = 0; i < spec.p; ++i)
            for (int j = 0; j < spec.d; ++j) {
                double* sp = out.values.spectrum(k, i, j);
                for (int l = 0; l < nw; ++l) {
                    double v = gains(i, j) * mix[l];
                    if (spec.sigma_spec > 0) v += spec.sigma_spec * noise(rng);
                    sp[l] = std::max(0.0, v);  // spectra are nonnegative
                }
            }
    }
    if (truth) {
        truth->mixing_weights = weights;
        truth->gains = gains;
        truth->alpha_star = spec.alpha_star;
        truth->beta_star = spec.beta_star;
        truth->gamma_star = spec.gamma_star;
    }
    return out;
}

ResponseVector generate_response(const SyntheticSpec& spec, const Tensor4& xtilde) {
    if (spec.alpha_star.size() != xtilde.p() || spec.beta_star.size() != xtilde.d() ||
        spec.gamma_star.size() != xtilde.num_wavenumbers() || xtilde.n() != spec.n)
        throw std::invalid_argument("generate_response: planted model dim mismatch");
    RankOneModel planted{spec.alpha_star, spec.beta_star, spec.gamma_star};
    Eigen::VectorXd y = predict_all(planted, xtilde);
    if (spec.sigma_resp > 0) {
        std::mt19937_64 rng(spec.seed ^ 0xda942042e4dd58b5ULL);
        std::normal_distribution<double> noise(0.0, spec.sigma_resp);
        for (Eigen::Index k = 0; k < y.size(); ++k) y[k] += noise(rng);
    }
    ResponseVector out;
    out.values = y;
    return out;
}

}  // namespace spectensor
