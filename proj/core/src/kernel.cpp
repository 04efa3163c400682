#include "spectensor/kernel.hpp"

#include <cmath>

namespace spectensor {

SpectralGrid SpectralGrid::uniform(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("SpectralGrid::uniform: count must be >= 1");
    std::vector<double> pts(static_cast<size_t>(count));
    if (count == 1) {
        pts[0] = lo;
    } else {
        double step = (hi - lo) / (count - 1);
        for (int i = 0; i < count; ++i) pts[static_cast<size_t>(i)] = lo + step * i;
    }
    return SpectralGrid(std::move(pts));
}

double kernel_value(const KernelSpec& spec, double t, double s) {
    spec.validate();
    double u = (t - s) / spec.bandwidth;
    return 1.0 / (1.0 + u * u);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const SpectralGrid& grid) {
    spec.validate();
    grid.validate();
    const int n = grid.size();
    Eigen::MatrixXd K(n, n);
    for (int a = 0; a < n; ++a) {
        K(a, a) = 1.0;
        for (int b = a + 1; b < n; ++b) {
            double v = kernel_value(spec, grid[a], grid[b]);
            K(a, b) = v;
            K(b, a) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    double lmax = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-8 * lmax)
        throw std::runtime_error("kernel_matrix: matrix failed the PSD tolerance");
    return K;
}

double gram_entry_closed_form(const KernelSpec& spec, double a, double b) {
    double u = (a - b) / (2.0 * spec.bandwidth);
    return 0.5 * M_PI * spec.bandwidth / (1.0 + u * u);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth,
                     bool& ok) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    if (depth <= 0) {
        ok = false;
        return left + right;
    }
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1, ok) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1, ok);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double tol, int max_depth) {
    if (!(lo < hi)) throw std::invalid_argument("integrate_adaptive: lo must be < hi");
    double m = 0.5 * (lo + hi);
    double fa = f(lo), fb = f(hi), fm = f(m);
    double whole = simpson(lo, fa, hi, fb, fm);
    bool ok = true;
    double v = adaptive_step(f, lo, fa, hi, fb, m, fm, whole, tol, max_depth, ok);
    if (!ok)
        throw std::runtime_error("integrate_adaptive: tolerance " + std::to_string(tol) +
                                 " not reached within depth limit");
    return v;
}

GramMatrix gram_matrix(const KernelSpec& spec, const SpectralGrid& grid,
                       const GramDomain& domain) {
    spec.validate();
    grid.validate();
    const int n = grid.size();
    Eigen::MatrixXd G(n, n);
    auto entry = [&](double a, double b) {
        if (domain.mode == GramDomain::Mode::closed_form_real_line)
            return gram_entry_closed_form(spec, a, b);
        auto f = [&](double t) {
            return kernel_value(spec, t, a) * kernel_value(spec, t, b);
        };
        return integrate_adaptive(f, domain.lo, domain.hi, 1e-12 * spec.bandwidth);
    };
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            double v = entry(grid[a], grid[b]);
            G(a, b) = v;
            G(b, a) = v;
        }
    return {G, domain};
}

}  // namespace spectensor
