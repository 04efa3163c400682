#include "spectensor/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spectensor/io.hpp"

namespace spectensor {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 55;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Axes {
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;

    void include(double x, double y) {
        if (!seeded_) {
            xlo = xhi = x;
            ylo = yhi = y;
            seeded_ = true;
            return;
        }
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
    }
    void finalize() {
        if (!(xhi > xlo)) {
            xlo -= 0.5;
            xhi += 0.5;
        }
        if (!(yhi > ylo)) {
            ylo -= 0.5;
            yhi += 0.5;
        }
        double xp = 0.05 * (xhi - xlo), yp = 0.05 * (yhi - ylo);
        xlo -= xp;
        xhi += xp;
        ylo -= yp;
        yhi += yp;
    }
    double px(double x) const {
        return kMarginL + (x - xlo) / (xhi - xlo) * (kWidth - kMarginL - kMarginR);
    }
    double py(double y) const {
        return kHeight - kMarginB - (y - ylo) / (yhi - ylo) * (kHeight - kMarginT - kMarginB);
    }

  private:
    bool seeded_ = false;
};

class Canvas {
  public:
    Canvas(const std::string& title, const std::string& xlabel, const std::string& ylabel)
        : title_(title), xlabel_(xlabel), ylabel_(ylabel) {}

    void frame(const Axes& ax) {
        rect(kMarginL, kMarginT, kWidth - kMarginL - kMarginR, kHeight - kMarginT - kMarginB,
             "none", "#444444");
        for (int t = 0; t <= 4; ++t) {
            double fx = ax.xlo + (ax.xhi - ax.xlo) * t / 4.0;
            double fy = ax.ylo + (ax.yhi - ax.ylo) * t / 4.0;
            text(ax.px(fx), kHeight - kMarginB + 18, num(fx), "middle", 11);
            text(kMarginL - 8, ax.py(fy) + 4, num(fy), "end", 11);
        }
        text(kWidth / 2, kHeight - 12, xlabel_, "middle", 13);
        body_ << "<text x=\"16\" y=\"" << num(kHeight / 2)
              << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
              << num(kHeight / 2) << ")\" font-family=\"sans-serif\">" << ylabel_
              << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double width = 1.0, const std::string& dash = "") {
        body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
              << "\" y2=\"" << num(y2) << "\" stroke=\"" << color << "\" stroke-width=\""
              << num(width) << "\"";
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
        body_ << "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
              << "\" fill=\"" << fill << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke) {
        body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
              << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
              << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double width = 1.2) {
        if (pts.empty()) return;
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
              << num(width) << "\" points=\"";
        for (const auto& [x, y] : pts) body_ << num(x) << ',' << num(y) << ' ';
        body_ << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor,
              int size) {
        body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
              << "\" text-anchor=\"" << anchor << "\" font-family=\"sans-serif\">" << s
              << "</text>\n";
    }

    void caption(const std::string& s) { text(kWidth / 2, kHeight / 2, s, "middle", 14); }

    void write(const std::string& path) {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
            << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
            << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"" << num(kWidth / 2)
            << "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\">"
            << title_ << "</text>\n";
        out << body_.str() << "</svg>\n";
        atomic_write_text(path, out.str());
    }

  private:
    std::string title_, xlabel_, ylabel_;
    std::ostringstream body_;
};

}  // namespace

void emit_scatter_pred_vs_actual(const std::string& path, const Eigen::VectorXd& actual,
                                 const Eigen::VectorXd& predicted) {
    Canvas c("Estimated vs observed response", "observed (normalized)",
             "estimated (normalized)");
    if (actual.size() == 0 || actual.size() != predicted.size()) {
        c.caption("no data");
        c.write(path);
        return;
    }
    Axes ax;
    for (Eigen::Index k = 0; k < actual.size(); ++k) ax.include(actual[k], predicted[k]);
    ax.include(ax.xlo, ax.xlo);
    ax.include(ax.xhi, ax.xhi);
    ax.finalize();
    c.frame(ax);
    double lo = std::max(ax.xlo, ax.ylo), hi = std::min(ax.xhi, ax.yhi);
    c.line(ax.px(lo), ax.py(lo), ax.px(hi), ax.py(hi), "#999999", 1.0, "4,3");
    for (Eigen::Index k = 0; k < actual.size(); ++k)
        c.circle(ax.px(actual[k]), ax.py(predicted[k]), 3.5, "#2166ac");
    c.write(path);
}

void emit_error_scatter(const std::string& path, const Eigen::VectorXd& model_errors,
                        const Eigen::VectorXd& baseline_errors) {
    Canvas c("Per-batch test error vs prediction-by-mean", "mean-predictor error",
             "model error");
    if (model_errors.size() == 0 || model_errors.size() != baseline_errors.size()) {
        c.caption("no data");
        c.write(path);
        return;
    }
    Axes ax;
    for (Eigen::Index k = 0; k < model_errors.size(); ++k)
        ax.include(baseline_errors[k], model_errors[k]);
    ax.include(0, 0);
    ax.finalize();
    c.frame(ax);
    double hi = std::min(ax.xhi, ax.yhi);
    c.line(ax.px(0), ax.py(0), ax.px(hi), ax.py(hi), "#999999", 1.0, "4,3");
    for (Eigen::Index k = 0; k < model_errors.size(); ++k)
        c.circle(ax.px(baseline_errors[k]), ax.py(model_errors[k]), 3.5, "#b2182b");
    c.write(path);
}

void emit_coeff_boxplot(const std::string& path, const Eigen::MatrixXd& samples,
                        const std::vector<std::string>& labels) {
    Canvas c("Coefficient distribution", "coefficient", "value");
    if (samples.rows() == 0 || samples.cols() == 0) {
        c.caption("no data");
        c.write(path);
        return;
    }
    const int nv = static_cast<int>(samples.cols());
    Axes ax;
    for (int v = 0; v < nv; ++v) {
        ax.include(v + 0.5, samples.col(v).minCoeff());
        ax.include(v + 0.5, samples.col(v).maxCoeff());
    }
    ax.include(0, ax.ylo);
    ax.include(nv, ax.yhi);
    ax.finalize();
    c.frame(ax);
    for (int v = 0; v < nv; ++v) {
        std::vector<double> col(samples.col(v).data(), samples.col(v).data() + samples.rows());
        std::sort(col.begin(), col.end());
        auto q = [&](double f) {
            double pos = f * (col.size() - 1);
            size_t lo = static_cast<size_t>(pos);
            size_t hi2 = std::min(lo + 1, col.size() - 1);
            return col[lo] * (1 - (pos - lo)) + col[hi2] * (pos - lo);
        };
        double q1 = q(0.25), q2 = q(0.5), q3 = q(0.75);
        double xc = ax.px(v + 0.5);
        double halfw = 0.3 * (ax.px(1) - ax.px(0));
        c.line(xc, ax.py(col.front()), xc, ax.py(col.back()), "#444444");
        c.rect(xc - halfw, ax.py(q3), 2 * halfw, ax.py(q1) - ax.py(q3), "#d1e5f0", "#2166ac");
        c.line(xc - halfw, ax.py(q2), xc + halfw, ax.py(q2), "#b2182b", 1.5);
        std::string lab = v < static_cast<int>(labels.size())
                              ? labels[static_cast<size_t>(v)]
                              : std::to_string(v);
        c.text(xc, kHeight - kMarginB + 32, lab, "middle", 11);
    }
    c.write(path);
}

void emit_spectrum_fit(const std::string& path, const SpectralGrid& grid,
                       const Eigen::VectorXd& observed, const Eigen::VectorXd& fitted,
                       const Eigen::VectorXd& coeffs) {
    Canvas c("Spectrum fit", "wavenumber", "intensity");
    if (grid.size() == 0 || observed.size() != grid.size()) {
        c.caption("no data");
        c.write(path);
        return;
    }
    Axes ax;
    for (int l = 0; l < grid.size(); ++l) {
        ax.include(grid[l], observed[l]);
        if (fitted.size() == grid.size()) ax.include(grid[l], fitted[l]);
        if (coeffs.size() == grid.size()) ax.include(grid[l], coeffs[l]);
    }
    ax.include(ax.xlo, 0);
    ax.finalize();
    c.frame(ax);
    std::vector<std::pair<double, double>> obs, fitp;
    for (int l = 0; l < grid.size(); ++l) {
        obs.emplace_back(ax.px(grid[l]), ax.py(observed[l]));
        if (fitted.size() == grid.size()) fitp.emplace_back(ax.px(grid[l]), ax.py(fitted[l]));
    }
    c.polyline(obs, "#888888", 1.0);
    c.polyline(fitp, "#000000", 1.4);
    if (coeffs.size() == grid.size())
        for (int l = 0; l < grid.size(); ++l)
            if (coeffs[l] != 0.0)
                c.line(ax.px(grid[l]), ax.py(0), ax.px(grid[l]), ax.py(coeffs[l]), "#2166ac",
                       1.2);
    c.write(path);
}

void emit_scores(const std::string& path, const SpectralGrid& grid,
                 const Eigen::VectorXd& scores, const std::vector<int>& kept_indices) {
    Canvas c("Wavenumber scores", "wavenumber", "score");
    if (grid.size() == 0 || scores.size() != grid.size()) {
        c.caption("no data");
        c.write(path);
        return;
    }
    Axes ax;
    for (int l = 0; l < grid.size(); ++l) ax.include(grid[l], scores[l]);
    ax.include(ax.xlo, 0);
    ax.finalize();
    c.frame(ax);
    for (int l = 0; l < grid.size(); ++l)
        c.line(ax.px(grid[l]), ax.py(0), ax.px(grid[l]), ax.py(scores[l]), "#bbbbbb", 1.0);
    for (int idx : kept_indices)
        if (idx >= 0 && idx < grid.size())
            c.line(ax.px(grid[idx]), ax.py(0), ax.px(grid[idx]), ax.py(scores[idx]),
                   "#b2182b", 1.6);
    c.write(path);
}

void emit_band_summary(const std::string& path, const std::vector<BandStat>& bands) {
    Canvas c("Band summary", "response band", "covariate");
    if (bands.empty()) {
        c.caption("no data");
        c.write(path);
        return;
    }
    Axes ax;
    for (const auto& b : bands) {
        ax.include(b.lo, b.mean);
        ax.include(b.hi, b.mean);
        ax.include(b.lo, b.median);
    }
    ax.finalize();
    c.frame(ax);
    for (const auto& b : bands) {
        if (b.count == 0) continue;
        c.line(ax.px(b.lo), ax.py(b.mean), ax.px(b.hi), ax.py(b.mean), "#8b0000", 2.5);
        c.line(ax.px(b.lo), ax.py(b.median), ax.px(b.hi), ax.py(b.median), "#f4a582", 2.5);
    }
    c.write(path);
}

}  // namespace spectensor
