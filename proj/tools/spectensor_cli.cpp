// Command-line surface for the spectensor pipeline:
//   simulate -> fit-rep -> score -> fit -> predict / cv / baseline / plot
// Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectensor/baselines.hpp"
#include "spectensor/cv.hpp"
#include "spectensor/io.hpp"
#include "spectensor/kernel.hpp"
#include "spectensor/preprocess.hpp"
#include "spectensor/rank_one.hpp"
#include "spectensor/selection.hpp"
#include "spectensor/sparse_rep.hpp"
#include "spectensor/svg_plot.hpp"
#include "spectensor/synth.hpp"

using nlohmann::json;
using namespace spectensor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConv = 3;

uint64_t default_seed() {
    const char* env = std::getenv("SPECTENSOR_SEED");
    if (!env) return 0;
    return std::strtoull(env, nullptr, 10);
}

SpectralGrid parse_grid(const std::string& spec_str) {
    double lo, hi;
    int count;
    if (std::sscanf(spec_str.c_str(), "%lf:%lf:%d", &lo, &hi, &count) == 3)
        return SpectralGrid::uniform(lo, hi, count);
    // otherwise a file with one wavenumber per line
    std::ifstream in(spec_str);
    if (!in) throw DataError("grid: cannot parse '" + spec_str + "' as lo:hi:count or open it as a file");
    std::vector<double> pts;
    double v;
    while (in >> v) pts.push_back(v);
    return SpectralGrid(std::move(pts));
}

struct Selection {
    std::string mode = "weighted";
    Eigen::VectorXd scores;
    std::vector<int> kept_indices;
    SpectralGrid kept_grid;
    SpectralGrid full_grid;
};

void write_selection(const std::string& path, const Selection& s) {
    json j;
    j["schema"] = "spectensor-selection-v1";
    j["mode"] = s.mode;
    j["scores"] = std::vector<double>(s.scores.data(), s.scores.data() + s.scores.size());
    j["kept_indices"] = s.kept_indices;
    j["kept_grid"] = s.kept_grid.points;
    j["full_grid"] = s.full_grid.points;
    atomic_write_text(path, j.dump(2) + "\n");
}

Selection read_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("selection: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("selection: parse error: " + std::string(e.what()));
    }
    Selection s;
    try {
        s.mode = j.value("mode", "weighted");
        auto sc = j.at("scores").get<std::vector<double>>();
        s.scores = Eigen::Map<Eigen::VectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
        s.kept_indices = j.at("kept_indices").get<std::vector<int>>();
        s.kept_grid = SpectralGrid(j.at("kept_grid").get<std::vector<double>>());
        s.full_grid = SpectralGrid(j.at("full_grid").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw DataError("selection: schema violation: " + std::string(e.what()));
    }
    return s;
}

NormalizationMode parse_norm(const std::string& s) {
    if (s == "none") return NormalizationMode::none;
    if (s == "max") return NormalizationMode::max_amplitude;
    if (s == "energy") return NormalizationMode::source_energy;
    throw DataError("unknown normalization '" + s + "' (expected none|max|energy)");
}

Eigen::MatrixXd max_amplitude_scales(const Tensor4& t) {
    Eigen::MatrixXd scales = Eigen::MatrixXd::Ones(t.p(), t.d());
    for (int i = 0; i < t.p(); ++i)
        for (int j = 0; j < t.d(); ++j) {
            double mx = 0.0;
            for (int k = 0; k < t.n(); ++k)
                for (int l = 0; l < t.num_wavenumbers(); ++l)
                    mx = std::max(mx, t(k, i, j, l));
            if (mx > 0.0) scales(i, j) = mx;
        }
    return scales;
}

void apply_scales(Tensor4& t, const Eigen::MatrixXd& scales) {
    for (int i = 0; i < t.p(); ++i)
        for (int j = 0; j < t.d(); ++j) {
            double inv = 1.0 / scales(i, j);
            for (int k = 0; k < t.n(); ++k) {
                double* sp = t.spectrum(k, i, j);
                for (int l = 0; l < t.num_wavenumbers(); ++l) sp[l] *= inv;
            }
        }
}

struct PreparedData {
    Tensor4 xtilde;
    Eigen::MatrixXd gram;
    ResponseVector y;
    Eigen::MatrixXd norm_scales;  // max-amplitude mode only
    NormalizationMode norm = NormalizationMode::max_amplitude;
};

// selection -> Gram on the kept grid -> xtilde -> normalization -> response
PreparedData prepare(const DatasetBundle& coeffs, const Selection& sel,
                     NormalizationMode norm) {
    if (!coeffs.kernel) throw DataError("coefficients manifest lacks a kernel record");
    if (coeffs.responses.size() == 0) throw DataError("coefficients manifest lacks responses");

    PreparedData out;
    out.norm = norm;
    Tensor4 kept = restrict_tensor(coeffs.values, sel.kept_indices);
    out.gram = gram_matrix(*coeffs.kernel, sel.kept_grid).entries;
    out.xtilde = transform_xtilde(kept, out.gram);
    if (norm == NormalizationMode::max_amplitude) {
        out.norm_scales = max_amplitude_scales(out.xtilde);
        apply_scales(out.xtilde, out.norm_scales);
    } else if (norm == NormalizationMode::source_energy) {
        out.xtilde = normalize_source_energy(out.xtilde);
    }
    out.y = normalize_response(coeffs.responses);
    return out;
}

int cmd_simulate(int n, int p, int d, const std::string& grid_spec, double sigma_spec,
                 double sigma_resp, uint64_t seed, const std::string& out) {
    SpectralGrid grid = parse_grid(grid_spec);
    SyntheticSpec spec =
        SyntheticSpec::default_spec(n, p, d, grid, grid.size(), seed);
    spec.sigma_spec = sigma_spec;
    spec.sigma_resp = sigma_resp;

    GroundTruth truth;
    SpectrumTensor tensor = generate_tensor(spec, &truth);
    // response from the planted rank-one map applied to the raw spectra
    ResponseVector y = generate_response(spec, tensor.values);

    DatasetBundle bundle;
    bundle.values = tensor.values;
    bundle.grid = tensor.grid;
    bundle.meta = tensor.meta;
    bundle.kind = "raw";
    bundle.responses = y.values;
    write_dataset(out, bundle);

    json gt;
    gt["alpha_star"] = std::vector<double>(truth.alpha_star.data(),
                                           truth.alpha_star.data() + truth.alpha_star.size());
    gt["beta_star"] = std::vector<double>(truth.beta_star.data(),
                                          truth.beta_star.data() + truth.beta_star.size());
    gt["gamma_star"] = std::vector<double>(truth.gamma_star.data(),
                                           truth.gamma_star.data() + truth.gamma_star.size());
    gt["sigma_spec"] = sigma_spec;
    gt["sigma_resp"] = sigma_resp;
    gt["seed"] = seed;
    std::filesystem::path gt_path = std::filesystem::path(out).parent_path() / "ground_truth.json";
    atomic_write_text(gt_path.string(), gt.dump(2) + "\n");
    std::cout << "wrote " << out << " (n=" << n << " p=" << p << " d=" << d
              << " N'=" << grid.size() << ")\n";
    return kExitOk;
}

int cmd_fit_rep(const std::string& data_path, double bandwidth, double lambda_h,
                double lambda_1, double tol, int max_iter, int threads,
                const std::string& out) {
    DatasetBundle data = read_dataset(data_path);
    KernelSpec kspec{KernelFamily::lorentzian, bandwidth};
    Eigen::MatrixXd K = kernel_matrix(kspec, data.grid);

    SpectrumTensor tensor{data.values, data.grid, data.meta};
    SparseRepParams params{lambda_h, lambda_1, tol, max_iter};
    CoeffTensor coeffs = fit_all(tensor, K, params, threads);

    int non_conv = 0;
    for (uint8_t c : coeffs.converged)
        if (!c) ++non_conv;

    DatasetBundle outb;
    outb.values = coeffs.values;
    outb.grid = coeffs.grid;
    outb.meta = coeffs.meta;
    outb.kind = "coefficients";
    outb.responses = data.responses;
    outb.kernel = kspec;
    outb.converged = coeffs.converged;
    write_dataset(out, outb);
    std::cout << "wrote " << out << "; " << coeffs.converged.size() - non_conv << "/"
              << coeffs.converged.size() << " spectra converged\n";
    if (non_conv > 0) {
        std::cerr << "warning: " << non_conv << " spectra hit the sweep limit\n";
        return kExitNoConv;
    }
    return kExitOk;
}

int cmd_score(const std::string& coeffs_path, const std::string& mode, int keep,
              const std::string& out) {
    DatasetBundle data = read_dataset(coeffs_path);
    CoeffTensor coeffs{data.values, data.grid, data.meta, data.converged};
    ScoreMode sm = mode == "frequency" ? ScoreMode::frequency : ScoreMode::weighted;
    Eigen::VectorXd scores = compute_scores(coeffs, sm);
    SelectedSubset sub = select_top(scores, data.grid, keep);

    Selection sel;
    sel.mode = mode;
    sel.scores = scores;
    sel.kept_indices = sub.kept_indices;
    sel.kept_grid = sub.reduced;
    sel.full_grid = data.grid;
    write_selection(out, sel);
    std::cout << "wrote " << out << " (kept " << keep << " of " << data.grid.size() << ")\n";
    return kExitOk;
}

int cmd_preprocess(const std::string& data_path, double truncate_upper, int subsample,
                   const std::string& normalize, bool center_response,
                   const std::string& out) {
    DatasetBundle data = read_dataset(data_path);
    SpectrumTensor tensor{data.values, data.grid, data.meta};
    if (std::isfinite(truncate_upper)) tensor = truncate_grid(tensor, truncate_upper);
    if (subsample > 1) tensor = subsample_grid(tensor, subsample);
    NormalizationMode nm = parse_norm(normalize);
    if (nm == NormalizationMode::max_amplitude)
        tensor.values = normalize_max_amplitude(tensor.values);
    else if (nm == NormalizationMode::source_energy)
        tensor.values = normalize_source_energy(tensor.values);

    DatasetBundle outb;
    outb.values = tensor.values;
    outb.grid = tensor.grid;
    outb.meta = tensor.meta;
    outb.kind = data.kind;
    outb.kernel = data.kernel;
    outb.normalization = {nm, "coefficients"};
    if (data.responses.size() != 0) {
        if (center_response) {
            ResponseVector y = normalize_response(data.responses);
            outb.responses = y.values;
        } else {
            outb.responses = data.responses;
        }
    }
    write_dataset(out, outb);
    std::cout << "wrote " << out << " (N'=" << tensor.grid.size() << ")\n";
    return kExitOk;
}

int cmd_fit(const std::string& coeffs_path, const std::string& selection_path,
            double ka, double kb, double kg, double kG, const std::string& normalize,
            int restarts, int max_outer, double tol_outer, uint64_t seed,
            const std::string& out) {
    DatasetBundle coeffs = read_dataset(coeffs_path);
    Selection sel = read_selection(selection_path);
    PreparedData prep = prepare(coeffs, sel, parse_norm(normalize));

    RankOneData data{prep.xtilde, prep.y.values, prep.gram};
    RegParams reg{ka, kb, kg, kG};
    FitOptions opts;
    opts.restarts = restarts;
    opts.max_outer = max_outer;
    opts.tol_outer = tol_outer;
    opts.seed = seed;
    auto [model, report] = fit_alternating(data, reg, opts);

    ModelManifest mm;
    mm.kind = "rank_one";
    mm.model = model;
    mm.reg = reg;
    mm.kept_indices = sel.kept_indices;
    mm.kept_grid = sel.kept_grid;
    mm.kernel = *coeffs.kernel;
    mm.normalization = {prep.norm, "xtilde"};
    mm.norm_scales = prep.norm_scales;
    mm.response_center = prep.y.center;
    mm.response_scale = prep.y.scale;
    mm.converged = report.converged;
    mm.final_objective = report.final_objective;
    mm.sweeps = report.sweeps;
    write_model(out, mm);

    Eigen::VectorXd pred = predict_all(model, prep.xtilde);
    double train_err = error_metric(pred, prep.y.values);
    std::cout << "wrote " << out << "; objective " << report.final_objective
              << ", train median AD " << train_err << "\n";
    return report.converged ? kExitOk : kExitNoConv;
}

Eigen::VectorXd model_predictions(const ModelManifest& mm, const DatasetBundle& coeffs) {
    if (mm.kind == "mean")
        return Eigen::VectorXd::Constant(coeffs.values.n(), mm.mean_value);
    CoeffTensor ct{coeffs.values, coeffs.grid, coeffs.meta, coeffs.converged};
    if (mm.kind == "ratio") {
        RatioCovariates rc = extract_ratio_covariate(ct, mm.kernel,
                                                     mm.ratio.peak_num_wavenumber,
                                                     mm.ratio.peak_den_wavenumber);
        Eigen::VectorXd pred(rc.values.size());
        for (Eigen::Index k = 0; k < pred.size(); ++k) pred[k] = mm.ratio.predict(rc.values[k]);
        return pred;
    }
    // rank_one
    Tensor4 kept = restrict_tensor(coeffs.values, mm.kept_indices);
    Eigen::MatrixXd gram = gram_matrix(mm.kernel, mm.kept_grid).entries;
    Tensor4 xt = transform_xtilde(kept, gram);
    if (mm.normalization.mode == NormalizationMode::max_amplitude) {
        if (mm.norm_scales.size() == 0)
            throw DataError("model manifest lacks the recorded normalization scales");
        apply_scales(xt, mm.norm_scales);
    } else if (mm.normalization.mode == NormalizationMode::source_energy) {
        xt = normalize_source_energy(xt);
    }
    return predict_all(mm.model, xt);
}

int cmd_predict(const std::string& model_path, const std::string& coeffs_path,
                const std::string& out) {
    ModelManifest mm = read_model(model_path);
    DatasetBundle coeffs = read_dataset(coeffs_path);
    Eigen::VectorXd pred = model_predictions(mm, coeffs);

    std::ostringstream csv;
    csv << "sample,id,prediction,prediction_raw\n";
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
        std::string id = k < static_cast<Eigen::Index>(coeffs.meta.size())
                             ? coeffs.meta[static_cast<size_t>(k)].id
                             : "s" + std::to_string(k);
        csv << k << ',' << id << ',' << format_double(pred[k]) << ','
            << format_double(pred[k] * mm.response_scale + mm.response_center) << '\n';
    }
    atomic_write_text(out, csv.str());
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

std::vector<RegParams> load_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("grid file: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("grid file: parse error: " + std::string(e.what()));
    }
    std::vector<RegParams> grid;
    for (const auto& row : j) {
        RegParams r;
        r.kappa_alpha = row.at("alpha").get<double>();
        r.kappa_beta = row.at("beta").get<double>();
        r.kappa_gamma = row.at("gamma").get<double>();
        r.kappa_gram = row.at("gram").get<double>();
        grid.push_back(r);
    }
    if (grid.empty()) throw DataError("grid file: empty grid");
    return grid;
}

std::vector<CVBatch> group_exclusive_batches(const std::vector<SampleMeta>& meta,
                                             int n_batches, int total_test, uint64_t seed) {
    std::vector<std::string> names;
    for (const auto& m : meta) names.push_back(m.group);
    std::vector<std::string> distinct = names;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::mt19937_64 rng(seed);
    std::vector<CVBatch> batches;
    for (int b = 0; b < n_batches; ++b) {
        std::vector<std::string> order = distinct;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<uint8_t> in_test(meta.size(), 0);
        int count = 0;
        for (const auto& g : order) {
            if (count >= total_test) break;
            for (size_t k = 0; k < meta.size(); ++k)
                if (meta[k].group == g) {
                    in_test[k] = 1;
                    ++count;
                }
        }
        CVBatch batch;
        batch.id = b;
        batch.seed = seed;
        for (size_t k = 0; k < meta.size(); ++k)
            (in_test[k] ? batch.test : batch.train).push_back(static_cast<int>(k));
        if (batch.train.empty() || batch.test.empty())
            throw DataError("group-exclusive batches: degenerate split");
        batches.push_back(std::move(batch));
    }
    return batches;
}

int cmd_cv(const std::string& coeffs_path, const std::string& selection_path,
           const std::string& policy, int n_batches, int test_per_group, int test_count,
           const std::string& metric_name, double peak_num, double peak_den,
           const std::string& normalize, const std::string& grid_file, bool group_exclusive,
           uint64_t seed, const std::string& out) {
    DatasetBundle coeffs = read_dataset(coeffs_path);
    Selection sel = read_selection(selection_path);
    PreparedData prep = prepare(coeffs, sel, parse_norm(normalize));

    CVDataset data;
    data.xtilde = prep.xtilde;
    data.y = prep.y.values;
    data.gram = prep.gram;
    CoeffTensor ct{coeffs.values, coeffs.grid, coeffs.meta, coeffs.converged};
    try {
        RatioCovariates rc = extract_ratio_covariate(ct, *coeffs.kernel, peak_num, peak_den);
        data.ratio_covariate = rc.values;
        data.ratio_usable = rc.usable;
    } catch (const std::invalid_argument& e) {
        std::cerr << "warning: ratio baseline disabled (" << e.what() << ")\n";
    }

    std::vector<std::string> groups;
    bool have_groups = false;
    for (const auto& m : coeffs.meta)
        if (!m.group.empty()) have_groups = true;
    if (have_groups)
        for (const auto& m : coeffs.meta) groups.push_back(m.group);

    std::vector<CVBatch> batches =
        group_exclusive ? group_exclusive_batches(coeffs.meta, n_batches, test_count, seed)
                        : make_cv_batches(coeffs.values.n(), groups, n_batches,
                                          test_per_group, test_count, seed);

    std::vector<RegParams> grid =
        grid_file.empty() ? default_param_grid() : load_grid_file(grid_file);
    ErrorMetric metric = metric_name == "mean" ? ErrorMetric::mean_ad : ErrorMetric::median_ad;

    CVReport rep = policy == "adaptive"
                       ? run_cv_adaptive(data, grid, batches, metric)
                       : run_cv_fixed(data, grid, batches, metric);
    write_cv_report_csv(out + ".csv", rep);
    write_cv_report_json(out + ".json", rep);
    std::cout << "policy " << rep.policy << ": mean test model " << rep.mean_test_model
              << ", mean-predictor " << rep.mean_test_mean;
    if (!std::isnan(rep.mean_test_ratio)) std::cout << ", ratio " << rep.mean_test_ratio;
    std::cout << "\nwrote " << out << ".csv and " << out << ".json\n";
    if (rep.fit_failures > 0) {
        std::cerr << "warning: " << rep.fit_failures << " fits failed and were excluded\n";
        return kExitNoConv;
    }
    return kExitOk;
}

int cmd_baseline(const std::string& kind, const std::string& coeffs_path, double peak_num,
                 double peak_den, const std::string& out) {
    DatasetBundle coeffs = read_dataset(coeffs_path);
    if (coeffs.responses.size() == 0) throw DataError("baseline: manifest lacks responses");
    ResponseVector y = normalize_response(coeffs.responses);

    ModelManifest mm;
    mm.response_center = y.center;
    mm.response_scale = y.scale;
    if (coeffs.kernel) mm.kernel = *coeffs.kernel;
    Eigen::VectorXd pred;
    if (kind == "mean") {
        mm.kind = "mean";
        mm.mean_value = MeanPredictor::fit(y.values).predict();
        pred = Eigen::VectorXd::Constant(y.values.size(), mm.mean_value);
    } else if (kind == "ratio") {
        if (!coeffs.kernel) throw DataError("baseline ratio: manifest lacks a kernel record");
        mm.kind = "ratio";
        CoeffTensor ct{coeffs.values, coeffs.grid, coeffs.meta, coeffs.converged};
        RatioCovariates rc = extract_ratio_covariate(ct, *coeffs.kernel, peak_num, peak_den);
        mm.ratio = fit_ratio_regression(rc.values, y.values);
        mm.ratio.peak_num_wavenumber = peak_num;
        mm.ratio.peak_den_wavenumber = peak_den;
        pred.resize(rc.values.size());
        for (Eigen::Index k = 0; k < pred.size(); ++k) pred[k] = mm.ratio.predict(rc.values[k]);
        if (mm.ratio.fallback_to_mean)
            std::cerr << "warning: degenerate ratio covariate, fell back to the mean predictor\n";
    } else {
        throw CLI::ValidationError("baseline kind must be mean or ratio");
    }
    write_model(out, mm);
    std::cout << "wrote " << out << "; train median AD "
              << error_metric(pred, y.values) << "\n";
    return kExitOk;
}

int cmd_band_summary(const std::string& coeffs_path, double peak_num, double peak_den,
                     int n_bands, const std::string& out) {
    DatasetBundle coeffs = read_dataset(coeffs_path);
    if (!coeffs.kernel) throw DataError("band-summary: manifest lacks a kernel record");
    if (coeffs.responses.size() == 0) throw DataError("band-summary: manifest lacks responses");
    ResponseVector y = normalize_response(coeffs.responses);

    CoeffTensor ct{coeffs.values, coeffs.grid, coeffs.meta, coeffs.converged};
    Eigen::VectorXd a1 = extract_peak_average(ct, *coeffs.kernel, peak_num);
    Eigen::VectorXd a2 = extract_peak_average(ct, *coeffs.kernel, peak_den);
    RatioCovariates rc = extract_ratio_covariate(ct, *coeffs.kernel, peak_num, peak_den);

    std::ostringstream csv;
    csv << "series,band_lo,band_hi,count,mean,median\n";
    auto emit = [&](const std::string& name, const Eigen::VectorXd& cov) {
        for (const auto& b : band_summary(cov, y.values, n_bands))
            csv << name << ',' << format_double(b.lo) << ',' << format_double(b.hi) << ','
                << b.count << ',' << format_double(b.mean) << ',' << format_double(b.median)
                << '\n';
    };
    emit("peak_num", a1);
    emit("peak_den", a2);
    emit("ratio", rc.values);
    atomic_write_text(out, csv.str());
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

Eigen::VectorXd read_prediction_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("predictions: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("predictions: empty file");
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // third comma-separated field
        size_t c1 = line.find(','), c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw DataError("predictions: malformed row '" + line + "'");
        size_t c3 = line.find(',', c2 + 1);
        std::string field = c3 == std::string::npos ? line.substr(c2 + 1)
                                                    : line.substr(c2 + 1, c3 - c2 - 1);
        vals.push_back(std::stod(field));
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

int cmd_plot(const std::string& kind, const std::string& in_path, const std::string& pred_path,
             const std::string& data_path, const std::string& coeffs_path,
             const std::string& which, int sample, int source, int detector, double peak_num,
             double peak_den, int n_bands, const std::string& out) {
    if (kind == "scatter_pred_vs_actual") {
        Eigen::VectorXd pred = read_prediction_column(pred_path);
        DatasetBundle data = read_dataset(data_path);
        if (data.responses.size() != pred.size())
            throw DataError("plot: prediction/response length mismatch");
        ResponseVector y = normalize_response(data.responses);
        emit_scatter_pred_vs_actual(out, y.values, pred);
    } else if (kind == "error_scatter") {
        CVReport rep = read_cv_report_json(in_path);
        Eigen::VectorXd model(static_cast<Eigen::Index>(rep.batches.size()));
        Eigen::VectorXd base(model.size());
        for (size_t b = 0; b < rep.batches.size(); ++b) {
            model[static_cast<Eigen::Index>(b)] = rep.batches[b].test_model;
            base[static_cast<Eigen::Index>(b)] = rep.batches[b].test_mean;
        }
        emit_error_scatter(out, model, base);
    } else if (kind == "coeff_boxplot") {
        CVReport rep = read_cv_report_json(in_path);
        Eigen::MatrixXd mat;
        std::vector<std::string> labels;
        for (size_t b = 0; b < rep.batches.size(); ++b) {
            const Eigen::VectorXd& v =
                which == "beta" ? rep.batches[b].beta : rep.batches[b].alpha;
            if (v.size() == 0) continue;
            if (mat.size() == 0) mat.resize(0, v.size());
            mat.conservativeResize(mat.rows() + 1, Eigen::NoChange);
            mat.row(mat.rows() - 1) = v.transpose();
        }
        for (Eigen::Index c = 0; c < mat.cols(); ++c)
            labels.push_back((which == "beta" ? "b" : "a") + std::to_string(c));
        emit_coeff_boxplot(out, mat, labels);
    } else if (kind == "spectrum_fit") {
        DatasetBundle coeffs = read_dataset(coeffs_path);
        if (!coeffs.kernel) throw DataError("plot: coefficients manifest lacks a kernel record");
        Eigen::MatrixXd K = kernel_matrix(*coeffs.kernel, coeffs.grid);
        Eigen::VectorXd x = coeffs.values.spectrum_vec(sample, source, detector);
        Eigen::VectorXd fitted = K * x;
        Eigen::VectorXd observed = fitted;
        if (!data_path.empty()) {
            DatasetBundle raw = read_dataset(data_path);
            observed = raw.values.spectrum_vec(sample, source, detector);
        }
        emit_spectrum_fit(out, coeffs.grid, observed, fitted, x);
    } else if (kind == "scores") {
        Selection sel = read_selection(in_path);
        emit_scores(out, sel.full_grid, sel.scores, sel.kept_indices);
    } else if (kind == "band_summary") {
        DatasetBundle coeffs = read_dataset(coeffs_path);
        if (!coeffs.kernel) throw DataError("plot: coefficients manifest lacks a kernel record");
        if (coeffs.responses.size() == 0) throw DataError("plot: manifest lacks responses");
        ResponseVector y = normalize_response(coeffs.responses);
        CoeffTensor ct{coeffs.values, coeffs.grid, coeffs.meta, coeffs.converged};
        RatioCovariates rc = extract_ratio_covariate(ct, *coeffs.kernel, peak_num, peak_den);
        emit_band_summary(out, band_summary(rc.values, y.values, n_bands));
    } else {
        throw CLI::ValidationError("unknown plot kind '" + kind + "'");
    }
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse kernel representation and rank-one tensor regression for spectroscopy"};
    app.require_subcommand(1);

    uint64_t seed = default_seed();
    int threads = 1;
    std::string out;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic spectroscopy dataset");
    int sim_n = 37, sim_p = 5, sim_d = 10;
    std::string sim_grid = "954:1700:544";
    double sim_sspec = 0.01, sim_sresp = 0.0;
    sim->add_option("--n", sim_n, "samples");
    sim->add_option("--p", sim_p, "source positions");
    sim->add_option("--d", sim_d, "detector positions");
    sim->add_option("--grid", sim_grid, "lo:hi:count or a grid file");
    sim->add_option("--sigma-spec", sim_sspec, "spectral noise level");
    sim->add_option("--sigma-resp", sim_sresp, "response noise level");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--threads", threads, "worker threads");
    sim->add_option("--out", out, "output manifest path")->required();

    // fit-rep
    auto* frep = app.add_subcommand("fit-rep", "Fit the sparse kernel representation per spectrum");
    std::string frep_data;
    double frep_w = 15.0, frep_lh = 0.01, frep_l1 = 0.01, frep_tol = 1e-7;
    int frep_maxit = 10000;
    frep->add_option("--data", frep_data, "raw dataset manifest")->required();
    frep->add_option("--bandwidth", frep_w, "Lorentzian bandwidth W");
    frep->add_option("--lambda-h", frep_lh, "RKHS-norm penalty");
    frep->add_option("--lambda-1", frep_l1, "l1 penalty");
    frep->add_option("--tol", frep_tol, "KKT tolerance");
    frep->add_option("--max-iter", frep_maxit, "sweep limit");
    frep->add_option("--seed", seed, "RNG seed");
    frep->add_option("--threads", threads, "worker threads");
    frep->add_option("--out", out, "output manifest path")->required();

    // score
    auto* score = app.add_subcommand("score", "Score wavenumbers and keep the top N");
    std::string score_coeffs, score_mode = "weighted";
    int score_keep = 40;
    score->add_option("--coeffs", score_coeffs, "coefficients manifest")->required();
    score->add_option("--mode", score_mode, "weighted|frequency")
        ->check(CLI::IsMember({"weighted", "frequency"}));
    score->add_option("--keep", score_keep, "number of wavenumbers to keep");
    score->add_option("--seed", seed, "RNG seed");
    score->add_option("--threads", threads, "worker threads");
    score->add_option("--out", out, "output selection path")->required();

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "Grid truncation, subsampling, normalization");
    std::string prep_data, prep_norm = "none";
    double prep_upper = std::numeric_limits<double>::infinity();
    int prep_sub = 1;
    bool prep_center = false;
    prep->add_option("--data", prep_data, "dataset manifest")->required();
    prep->add_option("--truncate-upper", prep_upper, "drop wavenumbers above this");
    prep->add_option("--subsample", prep_sub, "keep every m-th wavenumber");
    prep->add_option("--normalize", prep_norm, "none|max|energy")
        ->check(CLI::IsMember({"none", "max", "energy"}));
    prep->add_flag("--center-response", prep_center, "center/rescale the response");
    prep->add_option("--seed", seed, "RNG seed");
    prep->add_option("--threads", threads, "worker threads");
    prep->add_option("--out", out, "output manifest path")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit the rank-one regression model");
    std::string fit_coeffs, fit_sel, fit_norm = "max";
    double fit_ka = 1e-4, fit_kb = 1e-4, fit_kg = 1e-2, fit_kG = 1e-2;
    int fit_restarts = 1, fit_max_outer = 200;
    double fit_tol_outer = 1e-6;
    fit->add_option("--coeffs", fit_coeffs, "coefficients manifest")->required();
    fit->add_option("--selection", fit_sel, "selection file from `score`")->required();
    fit->add_option("--kappa-alpha", fit_ka, "source-weight penalty");
    fit->add_option("--kappa-beta", fit_kb, "detector-weight penalty");
    fit->add_option("--kappa-gamma", fit_kg, "spectral l1 penalty");
    fit->add_option("--kappa-gram", fit_kG, "fused (Gram-weighted) penalty");
    fit->add_option("--normalize", fit_norm, "none|max|energy applied to xtilde")
        ->check(CLI::IsMember({"none", "max", "energy"}));
    fit->add_option("--restarts", fit_restarts, "random restarts");
    fit->add_option("--max-outer", fit_max_outer, "outer sweep cap");
    fit->add_option("--tol-outer", fit_tol_outer, "relative objective decrease tolerance");
    fit->add_option("--seed", seed, "RNG seed");
    fit->add_option("--threads", threads, "worker threads");
    fit->add_option("--out", out, "output model path")->required();

    // predict
    auto* pred = app.add_subcommand("predict", "Predict responses with a saved model");
    std::string pred_model, pred_coeffs;
    pred->add_option("--model", pred_model, "model manifest")->required();
    pred->add_option("--coeffs", pred_coeffs, "coefficients manifest")->required();
    pred->add_option("--seed", seed, "RNG seed");
    pred->add_option("--threads", threads, "worker threads");
    pred->add_option("--out", out, "output CSV path")->required();

    // cv
    auto* cv = app.add_subcommand("cv", "Cross-validated evaluation against the baselines");
    std::string cv_coeffs, cv_sel, cv_policy = "fixed", cv_metric = "median",
                cv_norm = "max", cv_grid_file;
    int cv_batches = 50, cv_tpg = 2, cv_tc = 6, cv_bands = 3;
    double cv_pnum = 954.0, cv_pden = 1450.0;
    bool cv_group_excl = false;
    (void)cv_bands;
    cv->add_option("--coeffs", cv_coeffs, "coefficients manifest")->required();
    cv->add_option("--selection", cv_sel, "selection file")->required();
    cv->add_option("--policy", cv_policy, "fixed|adaptive")
        ->check(CLI::IsMember({"fixed", "adaptive"}));
    cv->add_option("--batches", cv_batches, "number of CV batches");
    cv->add_option("--test-per-group", cv_tpg, "test samples per group (stratified)");
    cv->add_option("--test-count", cv_tc, "test samples per batch (unstratified)");
    cv->add_option("--metric", cv_metric, "median|mean")
        ->check(CLI::IsMember({"median", "mean"}));
    cv->add_option("--peak-num", cv_pnum, "ratio-baseline numerator peak");
    cv->add_option("--peak-den", cv_pden, "ratio-baseline denominator peak");
    cv->add_option("--normalize", cv_norm, "none|max|energy applied to xtilde")
        ->check(CLI::IsMember({"none", "max", "energy"}));
    cv->add_option("--grid-file", cv_grid_file, "JSON file with kappa grid points");
    cv->add_flag("--group-exclusive", cv_group_excl,
                 "keep all samples of a group on one side of each split");
    cv->add_option("--seed", seed, "RNG seed");
    cv->add_option("--threads", threads, "worker threads");
    cv->add_option("--out", out, "output path prefix")->required();

    // baseline
    auto* base = app.add_subcommand("baseline", "Fit a baseline predictor");
    std::string base_kind, base_coeffs;
    double base_pnum = 954.0, base_pden = 1450.0;
    base->add_option("kind", base_kind, "mean|ratio")
        ->required()
        ->check(CLI::IsMember({"mean", "ratio"}));
    base->add_option("--coeffs", base_coeffs, "coefficients manifest")->required();
    base->add_option("--peak-num", base_pnum, "numerator peak wavenumber");
    base->add_option("--peak-den", base_pden, "denominator peak wavenumber");
    base->add_option("--seed", seed, "RNG seed");
    base->add_option("--threads", threads, "worker threads");
    base->add_option("--out", out, "output model path")->required();

    // band-summary
    auto* band = app.add_subcommand("band-summary", "Per-band covariate summaries");
    std::string band_coeffs;
    double band_pnum = 954.0, band_pden = 1450.0;
    int band_n = 3;
    band->add_option("--coeffs", band_coeffs, "coefficients manifest")->required();
    band->add_option("--peak-num", band_pnum, "numerator peak wavenumber");
    band->add_option("--peak-den", band_pden, "denominator peak wavenumber");
    band->add_option("--bands", band_n, "number of response bands");
    band->add_option("--seed", seed, "RNG seed");
    band->add_option("--threads", threads, "worker threads");
    band->add_option("--out", out, "output CSV path")->required();

    // plot
    auto* plot = app.add_subcommand("plot", "Emit an SVG diagnostic plot");
    std::string plot_kind, plot_in, plot_pred, plot_data, plot_coeffs, plot_which = "alpha";
    int plot_sample = 0, plot_source = 0, plot_detector = 0, plot_bands = 3;
    double plot_pnum = 954.0, plot_pden = 1450.0;
    plot->add_option("--kind", plot_kind,
                     "scatter_pred_vs_actual|error_scatter|coeff_boxplot|spectrum_fit|"
                     "scores|band_summary")
        ->required();
    plot->add_option("--in", plot_in, "report or selection input");
    plot->add_option("--pred", plot_pred, "predictions CSV");
    plot->add_option("--data", plot_data, "raw dataset manifest");
    plot->add_option("--coeffs", plot_coeffs, "coefficients manifest");
    plot->add_option("--which", plot_which, "alpha|beta for coeff_boxplot");
    plot->add_option("--sample", plot_sample, "sample index for spectrum_fit");
    plot->add_option("--source", plot_source, "source index for spectrum_fit");
    plot->add_option("--detector", plot_detector, "detector index for spectrum_fit");
    plot->add_option("--peak-num", plot_pnum, "numerator peak wavenumber");
    plot->add_option("--peak-den", plot_pden, "denominator peak wavenumber");
    plot->add_option("--bands", plot_bands, "number of response bands");
    plot->add_option("--seed", seed, "RNG seed");
    plot->add_option("--threads", threads, "worker threads");
    plot->add_option("--out", out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_n, sim_p, sim_d, sim_grid, sim_sspec, sim_sresp, seed, out);
        if (frep->parsed())
            return cmd_fit_rep(frep_data, frep_w, frep_lh, frep_l1, frep_tol, frep_maxit,
                               threads, out);
        if (score->parsed()) return cmd_score(score_coeffs, score_mode, score_keep, out);
        if (prep->parsed())
            return cmd_preprocess(prep_data, prep_upper, prep_sub, prep_norm, prep_center, out);
        if (fit->parsed())
            return cmd_fit(fit_coeffs, fit_sel, fit_ka, fit_kb, fit_kg, fit_kG, fit_norm,
                           fit_restarts, fit_max_outer, fit_tol_outer, seed, out);
        if (pred->parsed()) return cmd_predict(pred_model, pred_coeffs, out);
        if (cv->parsed())
            return cmd_cv(cv_coeffs, cv_sel, cv_policy, cv_batches, cv_tpg, cv_tc, cv_metric,
                          cv_pnum, cv_pden, cv_norm, cv_grid_file, cv_group_excl, seed, out);
        if (base->parsed()) return cmd_baseline(base_kind, base_coeffs, base_pnum, base_pden, out);
        if (band->parsed())
            return cmd_band_summary(band_coeffs, band_pnum, band_pden, band_n, out);
        if (plot->parsed())
            return cmd_plot(plot_kind, plot_in, plot_pred, plot_data, plot_coeffs, plot_which,
                            plot_sample, plot_source, plot_detector, plot_pnum, plot_pden,
                            plot_bands, out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::runtime_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitNoConv;
    }
    return kExitUsage;
}
