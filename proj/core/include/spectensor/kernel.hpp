#ifndef SPECTENSOR_KERNEL_HPP
#define SPECTENSOR_KERNEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectensor {

/// Ordered wavenumber locations (cm^-1 for Raman, index units for NMR).
struct SpectralGrid {
    std::vector<double> points;

    SpectralGrid() = default;
    explicit SpectralGrid(std::vector<double> pts) : points(std::move(pts)) { validate(); }

    int size() const { return static_cast<int>(points.size()); }
    double operator[](int i) const { return points[static_cast<size_t>(i)]; }

    void validate() const {
        if (points.empty())
            throw std::invalid_argument("SpectralGrid: empty grid");
        for (size_t i = 1; i < points.size(); ++i)
            if (!(points[i] > points[i - 1]))
                throw std::invalid_argument("SpectralGrid: points must be strictly increasing");
    }

    /// Uniform grid with `count` points over [lo, hi].
    static SpectralGrid uniform(double lo, double hi, int count);
};

enum class KernelFamily { lorentzian };

struct KernelSpec {
    KernelFamily family = KernelFamily::lorentzian;
    double bandwidth = 1.0;  // W, same units as the grid

    void validate() const {
        if (!(bandwidth > 0.0))
            throw std::invalid_argument("KernelSpec: bandwidth must be positive");
    }
};

/// Lorentzian line shape 1 / (1 + ((t-s)/W)^2); symmetric, values in (0, 1].
double kernel_value(const KernelSpec& spec, double t, double s);

/// N x N matrix K with K(l', l) = kernel_value(t_{l'}, t_l). Unit diagonal.
/// Rejects matrices whose smallest eigenvalue is below -1e-8 relative to the largest.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const SpectralGrid& grid);

struct GramDomain {
    enum class Mode { closed_form_real_line, quadrature_interval };
    Mode mode = Mode::closed_form_real_line;
    double lo = 0.0, hi = 0.0;  // used only in quadrature mode

    static GramDomain real_line() { return {}; }
    static GramDomain interval(double lo, double hi) {
        if (!(lo < hi)) throw std::invalid_argument("GramDomain: lo must be < hi");
        return {Mode::quadrature_interval, lo, hi};
    }
};

/// Matrix of pairwise L^2 inner products of kernel functions anchored at grid points.
struct GramMatrix {
    Eigen::MatrixXd entries;
    GramDomain domain;
};

/// Closed form of integral over the real line of two Lorentzians of bandwidth W
/// centered at a and b: (pi*W/2) * 1 / (1 + ((a-b)/(2W))^2).
double gram_entry_closed_form(const KernelSpec& spec, double a, double b);

GramMatrix gram_matrix(const KernelSpec& spec, const SpectralGrid& grid,
                       const GramDomain& domain = GramDomain::real_line());

/// Adaptive Simpson quadrature; throws if the requested tolerance is not reached.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-10, int max_depth = 60);

}  // namespace spectensor

#endif
