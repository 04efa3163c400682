#include "spectensor/cv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "spectensor/baselines.hpp"

namespace spectensor {

std::vector<CVBatch> make_cv_batches(int n_samples, const std::vector<std::string>& groups,
                                     int n_batches, int per_group_test, int total_test,
                                     uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("make_cv_batches: need >= 2 samples");
    if (n_batches < 1) throw std::invalid_argument("make_cv_batches: n_batches must be >= 1");
    bool stratified = !groups.empty();
    if (stratified && static_cast<int>(groups.size()) != n_samples)
        throw std::invalid_argument("make_cv_batches: group metadata length mismatch");

    std::map<std::string, std::vector<int>> by_group;
    if (stratified)
        for (int k = 0; k < n_samples; ++k) by_group[groups[static_cast<size_t>(k)]].push_back(k);
    else
        for (int k = 0; k < n_samples; ++k) by_group[""].push_back(k);

    if (stratified) {
        for (const auto& [g, members] : by_group)
            if (static_cast<int>(members.size()) < per_group_test)
                throw std::invalid_argument("make_cv_batches: group '" + g +
                                            "' smaller than its test count");
    } else if (total_test < 1 || total_test >= n_samples) {
        throw std::invalid_argument("make_cv_batches: infeasible test size");
    }

    std::mt19937_64 rng(seed);
    std::vector<CVBatch> batches;
    batches.reserve(static_cast<size_t>(n_batches));
    for (int b = 0; b < n_batches; ++b) {
        CVBatch batch;
        batch.id = b;
        batch.seed = seed;
        std::vector<uint8_t> in_test(static_cast<size_t>(n_samples), 0);
        if (stratified) {
            for (auto& [g, members] : by_group) {
                std::vector<int> pool = members;
                std::shuffle(pool.begin(), pool.end(), rng);
                for (int t = 0; t < per_group_test; ++t) in_test[static_cast<size_t>(pool[t])] = 1;
            }
        } else {
            std::vector<int> pool(static_cast<size_t>(n_samples));
            for (int k = 0; k < n_samples; ++k) pool[static_cast<size_t>(k)] = k;
            std::shuffle(pool.begin(), pool.end(), rng);
            for (int t = 0; t < total_test; ++t) in_test[static_cast<size_t>(pool[t])] = 1;
        }
        for (int k = 0; k < n_samples; ++k)
            (in_test[static_cast<size_t>(k)] ? batch.test : batch.train).push_back(k);
        batches.push_back(std::move(batch));
    }
    return batches;
}

double error_metric(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual,
                    ErrorMetric metric) {
    if (pred.size() != actual.size() || pred.size() == 0)
        throw std::invalid_argument("error_metric: empty or mismatched inputs");
    Eigen::VectorXd dev = (pred - actual).cwiseAbs();
    if (metric == ErrorMetric::mean_ad) return dev.mean();
    std::vector<double> v(dev.data(), dev.data() + dev.size());
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

Tensor4 slice_samples(const Tensor4& t, const std::vector<int>& idx) {
    Tensor4 out(static_cast<int>(idx.size()), t.p(), t.d(), t.num_wavenumbers());
    for (size_t a = 0; a < idx.size(); ++a)
        for (int i = 0; i < t.p(); ++i)
            for (int j = 0; j < t.d(); ++j)
                out.spectrum_vec(static_cast<int>(a), i, j) = t.spectrum_vec(idx[a], i, j);
    return out;
}

Eigen::VectorXd slice_vec(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (size_t a = 0; a < idx.size(); ++a) out[static_cast<Eigen::Index>(a)] = v[idx[a]];
    return out;
}

bool kappa_less(const RegParams& a, const RegParams& b) {
    if (a.kappa_alpha != b.kappa_alpha) return a.kappa_alpha < b.kappa_alpha;
    if (a.kappa_beta != b.kappa_beta) return a.kappa_beta < b.kappa_beta;
    if (a.kappa_gamma != b.kappa_gamma) return a.kappa_gamma < b.kappa_gamma;
    return a.kappa_gram < b.kappa_gram;
}

struct GridBatchErrors {
    double train = std::numeric_limits<double>::quiet_NaN();
    double test = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    Eigen::VectorXd alpha, beta;
};

struct CVRun {
    std::vector<std::vector<GridBatchErrors>> model;  // [grid][batch]
    std::vector<BatchErrors> base;                    // baselines per batch
    int failures = 0;
};

CVRun run_all_fits(const CVDataset& data, const std::vector<RegParams>& grid,
                   const std::vector<CVBatch>& batches, ErrorMetric metric,
                   const FitOptions& fit_opts) {
    CVRun run;
    run.model.assign(grid.size(), std::vector<GridBatchErrors>(batches.size()));
    run.base.resize(batches.size());

    bool have_ratio = data.ratio_covariate.size() == data.y.size();

    for (size_t b = 0; b < batches.size(); ++b) {
        const CVBatch& batch = batches[b];
        if (batch.test.empty() || batch.train.empty())
            throw std::invalid_argument("run_cv: batch with empty train or test side");

        Eigen::VectorXd y_tr = slice_vec(data.y, batch.train);
        Eigen::VectorXd y_te = slice_vec(data.y, batch.test);

        BatchErrors& be = run.base[b];
        be.batch_id = batch.id;
        MeanPredictor mp = MeanPredictor::fit(y_tr);
        Eigen::VectorXd mp_tr = Eigen::VectorXd::Constant(y_tr.size(), mp.predict());
        Eigen::VectorXd mp_te = Eigen::VectorXd::Constant(y_te.size(), mp.predict());
        be.train_mean = error_metric(mp_tr, y_tr, metric);
        be.test_mean = error_metric(mp_te, y_te, metric);

        if (have_ratio) {
            Eigen::VectorXd r_tr = slice_vec(data.ratio_covariate, batch.train);
            Eigen::VectorXd r_te = slice_vec(data.ratio_covariate, batch.test);
            RatioRegressionModel rm = fit_ratio_regression(r_tr, y_tr);
            Eigen::VectorXd p_tr(r_tr.size()), p_te(r_te.size());
            for (Eigen::Index k = 0; k < r_tr.size(); ++k) p_tr[k] = rm.predict(r_tr[k]);
            for (Eigen::Index k = 0; k < r_te.size(); ++k) p_te[k] = rm.predict(r_te[k]);
            be.train_ratio = error_metric(p_tr, y_tr, metric);
            be.test_ratio = error_metric(p_te, y_te, metric);
            be.has_ratio = true;
        }

        RankOneData train_data;
        train_data.xtilde = slice_samples(data.xtilde, batch.train);
        train_data.y = y_tr;
        train_data.gram = data.gram;
        Tensor4 test_x = slice_samples(data.xtilde, batch.test);

        for (size_t g = 0; g < grid.size(); ++g) {
            GridBatchErrors& e = run.model[g][b];
            try {
                auto [model, report] = fit_alternating(train_data, grid[g], fit_opts);
                e.train = error_metric(predict_all(model, train_data.xtilde), y_tr, metric);
                e.test = error_metric(predict_all(model, test_x), y_te, metric);
                e.alpha = model.alpha;
                e.beta = model.beta;
                e.ok = true;
            } catch (const std::exception&) {
                ++run.failures;
            }
        }
    }
    return run;
}

CVReport assemble(const CVDataset&, const std::vector<RegParams>& grid,
                  const std::vector<CVBatch>& batches, ErrorMetric metric, const CVRun& run,
                  bool adaptive) {
    CVReport rep;
    rep.policy = adaptive ? "adaptive" : "fixed";
    rep.metric = metric;
    rep.fit_failures = run.failures;
    rep.batches = run.base;

    size_t fixed_choice = 0;
    if (!adaptive) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t g = 0; g < grid.size(); ++g) {
            double sum = 0.0;
            int cnt = 0;
            for (size_t b = 0; b < batches.size(); ++b)
                if (run.model[g][b].ok) {
                    sum += run.model[g][b].test;
                    ++cnt;
                }
            if (cnt == 0) continue;
            double mean = sum / cnt;
            if (mean < best ||
                (mean == best && kappa_less(grid[g], grid[fixed_choice]))) {
                best = mean;
                fixed_choice = g;
            }
        }
        rep.selected = grid[fixed_choice];
    }

    double sm = 0, smean = 0, sratio = 0;
    int cm = 0, cratio = 0;
    for (size_t b = 0; b < batches.size(); ++b) {
        BatchErrors& be = rep.batches[b];
        size_t choice = fixed_choice;
        if (adaptive) {
            double best = std::numeric_limits<double>::infinity();
            bool found = false;
            for (size_t g = 0; g < grid.size(); ++g) {
                const GridBatchErrors& e = run.model[g][b];
                if (!e.ok) continue;
                if (!found || e.test < best ||
                    (e.test == best && kappa_less(grid[g], grid[choice]))) {
                    best = e.test;
                    choice = g;
                    found = true;
                }
            }
        }
        const GridBatchErrors& e = run.model[choice][b];
        be.chosen = grid[choice];
        if (e.ok) {
            be.train_model = e.train;
            be.test_model = e.test;
            be.alpha = e.alpha;
            be.beta = e.beta;
            sm += e.test;
            ++cm;
        } else {
            be.train_model = be.test_model = std::numeric_limits<double>::quiet_NaN();
        }
        smean += be.test_mean;
        if (be.has_ratio) {
            sratio += be.test_ratio;
            ++cratio;
        }
    }
    rep.mean_test_model = cm > 0 ? sm / cm : std::numeric_limits<double>::quiet_NaN();
    rep.mean_test_mean = batches.empty() ? 0.0 : smean / batches.size();
    rep.mean_test_ratio =
        cratio > 0 ? sratio / cratio : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace

std::vector<RegParams> default_param_grid() {
    // reduced design: kappa_alpha tied to kappa_beta
    const double ab[] = {1e-4, 1e-2};
    const double g[] = {1e-4, 1e-2, 1.0, 10.0};
    const double fuse[] = {1e-4, 1e-1};
    std::vector<RegParams> grid;
    for (double a : ab)
        for (double c : g)
            for (double f : fuse) grid.push_back({a, a, c, f});
    return grid;
}

CVReport run_cv_fixed(const CVDataset& data, const std::vector<RegParams>& grid,
                      const std::vector<CVBatch>& batches, ErrorMetric metric,
                      const FitOptions& fit_opts) {
    if (grid.empty()) throw std::invalid_argument("run_cv_fixed: empty parameter grid");
    CVRun run = run_all_fits(data, grid, batches, metric, fit_opts);
    return assemble(data, grid, batches, metric, run, false);
}

CVReport run_cv_adaptive(const CVDataset& data, const std::vector<RegParams>& grid,
                         const std::vector<CVBatch>& batches, ErrorMetric metric,
                         const FitOptions& fit_opts) {
    if (grid.empty()) throw std::invalid_argument("run_cv_adaptive: empty parameter grid");
    CVRun run = run_all_fits(data, grid, batches, metric, fit_opts);
    return assemble(data, grid, batches, metric, run, true);
}

std::vector<int> screen_outliers(const Eigen::VectorXd& per_sample_mean_error, double c) {
    std::vector<double> v(per_sample_mean_error.data(),
                          per_sample_mean_error.data() + per_sample_mean_error.size());
    if (v.empty()) return {};
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        double pos = q * (sorted.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, sorted.size() - 1);
        double frac = pos - lo;
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    double med = quantile(0.5);
    double iqr = quantile(0.75) - quantile(0.25);
    double cut = med + c * iqr;
    std::vector<int> out;
    for (size_t k = 0; k < v.size(); ++k)
        if (v[k] > cut) out.push_back(static_cast<int>(k));
    return out;
}

std::vector<BandStat> band_summary(const Eigen::VectorXd& covariate,
                                   const Eigen::VectorXd& response, int n_bands) {
    if (n_bands < 1) throw std::invalid_argument("band_summary: n_bands must be >= 1");
    if (covariate.size() != response.size() || covariate.size() == 0)
        throw std::invalid_argument("band_summary: empty or mismatched inputs");
    double lo = response.minCoeff(), hi = response.maxCoeff();
    if (!(hi > lo)) throw std::invalid_argument("band_summary: constant response");
    double width = (hi - lo) / n_bands;

    std::vector<std::vector<double>> buckets(static_cast<size_t>(n_bands));
    for (Eigen::Index k = 0; k < response.size(); ++k) {
        int b = std::min(n_bands - 1, static_cast<int>((response[k] - lo) / width));
        buckets[static_cast<size_t>(b)].push_back(covariate[k]);
    }
    std::vector<BandStat> out(static_cast<size_t>(n_bands));
    for (int b = 0; b < n_bands; ++b) {
        BandStat& s = out[static_cast<size_t>(b)];
        s.lo = lo + b * width;
        s.hi = b == n_bands - 1 ? hi : lo + (b + 1) * width;
        auto& vals = buckets[static_cast<size_t>(b)];
        s.count = static_cast<int>(vals.size());
        if (!vals.empty()) {
            double sum = 0.0;
            for (double x : vals) sum += x;
            s.mean = sum / vals.size();
            std::sort(vals.begin(), vals.end());
            size_t n = vals.size();
            s.median = n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        }
    }
    return out;
}

}  // namespace spectensor
