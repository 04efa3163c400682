#include "spectensor/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace spectensor {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("atomic_write_text: cannot open " + tmp.string());
        out << content;
        if (!out) throw DataError("atomic_write_text: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

std::string mode_name(NormalizationMode m) {
    switch (m) {
        case NormalizationMode::none: return "none";
        case NormalizationMode::max_amplitude: return "max_amplitude";
        case NormalizationMode::source_energy: return "source_energy";
    }
    return "none";
}

NormalizationMode mode_from_name(const std::string& s) {
    if (s == "none") return NormalizationMode::none;
    if (s == "max_amplitude") return NormalizationMode::max_amplitude;
    if (s == "source_energy") return NormalizationMode::source_energy;
    throw DataError("unknown normalization mode '" + s + "'");
}

json kernel_to_json(const KernelSpec& k) {
    return {{"family", "lorentzian"}, {"bandwidth", k.bandwidth}};
}

KernelSpec kernel_from_json(const json& j) {
    if (j.at("family").get<std::string>() != "lorentzian")
        throw DataError("unknown kernel family");
    KernelSpec k;
    k.bandwidth = j.at("bandwidth").get<double>();
    k.validate();
    return k;
}

std::string data_file_for(const fs::path& manifest) {
    fs::path p = manifest;
    p.replace_extension(".csv");
    return p.filename().string();
}

json vec_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vec_from_json(const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const auto& x : arr) v[i++] = x.get<double>();
    return v;
}

}  // namespace

void write_dataset(const std::string& manifest_path, const DatasetBundle& bundle) {
    const Tensor4& t = bundle.values;
    if (t.num_wavenumbers() != bundle.grid.size())
        throw DataError("write_dataset: grid/value dim mismatch");
    if (bundle.responses.size() != 0 && bundle.responses.size() != t.n())
        throw DataError("write_dataset: responses length mismatch");

    fs::path mpath(manifest_path);
    std::string csv_name = data_file_for(mpath);

    json j;
    j["schema"] = "spectensor-dataset-v1";
    j["kind"] = bundle.kind;
    j["dims"] = {{"n", t.n()}, {"p", t.p()}, {"d", t.d()}, {"num_wavenumbers", t.num_wavenumbers()}};
    j["grid"] = json::array();
    for (int l = 0; l < bundle.grid.size(); ++l) j["grid"].push_back(bundle.grid[l]);
    j["data_file"] = csv_name;
    j["normalization"] = {{"mode", mode_name(bundle.normalization.mode)},
                          {"applied_to", bundle.normalization.applied_to}};
    json samples = json::array();
    for (int k = 0; k < t.n(); ++k) {
        SampleMeta m = k < static_cast<int>(bundle.meta.size()) ? bundle.meta[static_cast<size_t>(k)]
                                                                : SampleMeta{"s" + std::to_string(k), ""};
        samples.push_back({{"id", m.id}, {"group", m.group}});
    }
    j["samples"] = samples;
    if (bundle.responses.size() != 0) j["responses"] = vec_to_json(bundle.responses);
    if (bundle.kernel) j["kernel"] = kernel_to_json(*bundle.kernel);
    if (!bundle.converged.empty()) {
        json conv = json::array();
        for (uint8_t c : bundle.converged) conv.push_back(static_cast<int>(c));
        j["converged"] = conv;
    }

    std::ostringstream csv;
    csv << "sample,source,detector,wavenumber_index,value\n";
    for (int k = 0; k < t.n(); ++k)
        for (int i = 0; i < t.p(); ++i)
            for (int jj = 0; jj < t.d(); ++jj)
                for (int l = 0; l < t.num_wavenumbers(); ++l)
                    csv << k << ',' << i << ',' << jj << ',' << l << ','
                        << format_double(t(k, i, jj, l)) << '\n';

    fs::path csv_path = mpath;
    csv_path.replace_extension(".csv");
    atomic_write_text(csv_path.string(), csv.str());
    atomic_write_text(manifest_path, j.dump(2) + "\n");
}

DatasetBundle read_dataset(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("read_dataset: cannot open manifest " + manifest_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("read_dataset: manifest parse error: " + std::string(e.what()));
    }

    DatasetBundle b;
    try {
        b.kind = j.at("kind").get<std::string>();
        int n = j.at("dims").at("n").get<int>();
        int p = j.at("dims").at("p").get<int>();
        int d = j.at("dims").at("d").get<int>();
        int nw = j.at("dims").at("num_wavenumbers").get<int>();
        std::vector<double> pts;
        for (const auto& x : j.at("grid")) pts.push_back(x.get<double>());
        b.grid = SpectralGrid(std::move(pts));
        if (b.grid.size() != nw) throw DataError("read_dataset: grid/dims mismatch");
        b.values = Tensor4(n, p, d, nw);
        if (j.contains("normalization")) {
            b.normalization.mode = mode_from_name(j["normalization"].at("mode"));
            b.normalization.applied_to = j["normalization"].value("applied_to", "xtilde");
        }
        if (j.contains("samples"))
            for (const auto& s : j["samples"])
                b.meta.push_back({s.value("id", ""), s.value("group", "")});
        if (!b.meta.empty() && static_cast<int>(b.meta.size()) != n)
            throw DataError("read_dataset: samples length mismatch");
        if (j.contains("responses")) {
            b.responses = vec_from_json(j["responses"]);
            if (b.responses.size() != n) throw DataError("read_dataset: responses length mismatch");
        }
        if (j.contains("kernel")) b.kernel = kernel_from_json(j["kernel"]);
        if (j.contains("converged"))
            for (const auto& c : j["converged"]) b.converged.push_back(c.get<int>() ? 1 : 0);
    } catch (const json::exception& e) {
        throw DataError("read_dataset: manifest schema violation: " + std::string(e.what()));
    }

    fs::path csv_path = fs::path(manifest_path).parent_path() /
                        j.at("data_file").get<std::string>();
    std::ifstream csv(csv_path);
    if (!csv) throw DataError("read_dataset: cannot open data file " + csv_path.string());

    std::string line;
    if (!std::getline(csv, line) || line != "sample,source,detector,wavenumber_index,value")
        throw DataError("read_dataset: bad CSV header in " + csv_path.string());

    Tensor4& t = b.values;
    std::vector<uint8_t> seen(t.size(), 0);
    size_t row = 1;
    while (std::getline(csv, line)) {
        ++row;
        if (line.empty()) continue;
        int k, i, jj, l;
        double v;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf", &k, &i, &jj, &l, &v) != 5)
            throw DataError("read_dataset: malformed row " + std::to_string(row));
        if (k < 0 || k >= t.n() || i < 0 || i >= t.p() || jj < 0 || jj >= t.d() || l < 0 ||
            l >= t.num_wavenumbers())
            throw DataError("read_dataset: index out of range at row " + std::to_string(row));
        if (!std::isfinite(v))
            throw DataError("read_dataset: non-finite value at row " + std::to_string(row));
        t(k, i, jj, l) = v;
        size_t flat = ((static_cast<size_t>(k) * t.p() + i) * t.d() + jj) *
                          t.num_wavenumbers() + l;
        seen[flat] = 1;
    }
    for (int k = 0; k < t.n(); ++k)
        for (int i = 0; i < t.p(); ++i)
            for (int jj = 0; jj < t.d(); ++jj)
                for (int l = 0; l < t.num_wavenumbers(); ++l) {
                    size_t flat = ((static_cast<size_t>(k) * t.p() + i) * t.d() + jj) *
                                      t.num_wavenumbers() + l;
                    if (!seen[flat])
                        throw DataError("read_dataset: missing values in slice (sample=" +
                                        std::to_string(k) + ", source=" + std::to_string(i) +
                                        ", detector=" + std::to_string(jj) + ")");
                }
    return b;
}

void write_model(const std::string& path, const ModelManifest& m) {
    json j;
    j["schema"] = "spectensor-model-v1";
    j["kind"] = m.kind;
    j["kernel"] = kernel_to_json(m.kernel);
    j["normalization"] = {{"mode", mode_name(m.normalization.mode)},
                          {"applied_to", m.normalization.applied_to}};
    j["response"] = {{"center", m.response_center}, {"scale", m.response_scale}};
    if (m.kind == "rank_one") {
        j["alpha"] = vec_to_json(m.model.alpha);
        j["beta"] = vec_to_json(m.model.beta);
        j["gamma"] = vec_to_json(m.model.gamma);
        j["kappa"] = {{"alpha", m.reg.kappa_alpha},
                      {"beta", m.reg.kappa_beta},
                      {"gamma", m.reg.kappa_gamma},
                      {"gram", m.reg.kappa_gram}};
        j["kept_indices"] = m.kept_indices;
        json pts = json::array();
        for (int l = 0; l < m.kept_grid.size(); ++l) pts.push_back(m.kept_grid[l]);
        j["kept_grid"] = pts;
        j["fit"] = {{"converged", m.converged},
                    {"objective", m.final_objective},
                    {"sweeps", m.sweeps}};
        if (m.norm_scales.size() != 0) {
            json rows = json::array();
            for (Eigen::Index i = 0; i < m.norm_scales.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index jj = 0; jj < m.norm_scales.cols(); ++jj)
                    row.push_back(m.norm_scales(i, jj));
                rows.push_back(row);
            }
            j["norm_scales"] = rows;
        }
    } else if (m.kind == "ratio") {
        j["ratio"] = {{"peak_num", m.ratio.peak_num_wavenumber},
                      {"peak_den", m.ratio.peak_den_wavenumber},
                      {"intercept", m.ratio.intercept},
                      {"slope", m.ratio.slope},
                      {"fallback_to_mean", m.ratio.fallback_to_mean},
                      {"fallback_mean", m.ratio.fallback_mean}};
    } else if (m.kind == "mean") {
        j["mean"] = m.mean_value;
    } else {
        throw DataError("write_model: unknown model kind '" + m.kind + "'");
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

ModelManifest read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_model: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("read_model: parse error: " + std::string(e.what()));
    }
    ModelManifest m;
    try {
        m.kind = j.at("kind").get<std::string>();
        m.kernel = kernel_from_json(j.at("kernel"));
        m.normalization.mode = mode_from_name(j.at("normalization").at("mode"));
        m.normalization.applied_to = j["normalization"].value("applied_to", "xtilde");
        m.response_center = j.at("response").at("center").get<double>();
        m.response_scale = j.at("response").at("scale").get<double>();
        if (m.kind == "rank_one") {
            m.model.alpha = vec_from_json(j.at("alpha"));
            m.model.beta = vec_from_json(j.at("beta"));
            m.model.gamma = vec_from_json(j.at("gamma"));
            m.reg.kappa_alpha = j.at("kappa").at("alpha").get<double>();
            m.reg.kappa_beta = j.at("kappa").at("beta").get<double>();
            m.reg.kappa_gamma = j.at("kappa").at("gamma").get<double>();
            m.reg.kappa_gram = j.at("kappa").at("gram").get<double>();
            m.kept_indices = j.at("kept_indices").get<std::vector<int>>();
            std::vector<double> pts;
            for (const auto& x : j.at("kept_grid")) pts.push_back(x.get<double>());
            m.kept_grid = SpectralGrid(std::move(pts));
            m.converged = j.at("fit").at("converged").get<bool>();
            m.final_objective = j.at("fit").at("objective").get<double>();
            m.sweeps = j.at("fit").at("sweeps").get<int>();
            if (j.contains("norm_scales")) {
                const auto& rows = j["norm_scales"];
                Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
                Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
                m.norm_scales.resize(nr, nc);
                for (Eigen::Index i = 0; i < nr; ++i)
                    for (Eigen::Index jj = 0; jj < nc; ++jj)
                        m.norm_scales(i, jj) = rows[i][jj].get<double>();
            }
        } else if (m.kind == "ratio") {
            m.ratio.peak_num_wavenumber = j.at("ratio").at("peak_num").get<double>();
            m.ratio.peak_den_wavenumber = j.at("ratio").at("peak_den").get<double>();
            m.ratio.intercept = j.at("ratio").at("intercept").get<double>();
            m.ratio.slope = j.at("ratio").at("slope").get<double>();
            m.ratio.fallback_to_mean = j.at("ratio").at("fallback_to_mean").get<bool>();
            m.ratio.fallback_mean = j.at("ratio").at("fallback_mean").get<double>();
        } else if (m.kind == "mean") {
            m.mean_value = j.at("mean").get<double>();
        } else {
            throw DataError("read_model: unknown model kind '" + m.kind + "'");
        }
    } catch (const json::exception& e) {
        throw DataError("read_model: schema violation: " + std::string(e.what()));
    }
    return m;
}

namespace {

const char* metric_name(ErrorMetric m) {
    return m == ErrorMetric::median_ad ? "median_ad" : "mean_ad";
}

}  // namespace

void write_cv_report_csv(const std::string& path, const CVReport& rep) {
    std::ostringstream out;
    out << "batch,method,train_error,test_error,kappa_alpha,kappa_beta,kappa_gamma,kappa_gram\n";
    for (const auto& b : rep.batches) {
        out << b.batch_id << ",rank_one," << format_double(b.train_model) << ','
            << format_double(b.test_model) << ',' << format_double(b.chosen.kappa_alpha) << ','
            << format_double(b.chosen.kappa_beta) << ',' << format_double(b.chosen.kappa_gamma)
            << ',' << format_double(b.chosen.kappa_gram) << '\n';
        out << b.batch_id << ",mean," << format_double(b.train_mean) << ','
            << format_double(b.test_mean) << ",,,,\n";
        if (b.has_ratio)
            out << b.batch_id << ",ratio," << format_double(b.train_ratio) << ','
                << format_double(b.test_ratio) << ",,,,\n";
    }
    atomic_write_text(path, out.str());
}

void write_cv_report_json(const std::string& path, const CVReport& rep) {
    json j;
    j["schema"] = "spectensor-cv-report-v1";
    j["policy"] = rep.policy;
    j["metric"] = metric_name(rep.metric);
    j["fit_failures"] = rep.fit_failures;
    j["mean_test_model"] = rep.mean_test_model;
    j["mean_test_mean"] = rep.mean_test_mean;
    j["mean_test_ratio"] = rep.mean_test_ratio;
    j["selected"] = {{"alpha", rep.selected.kappa_alpha},
                     {"beta", rep.selected.kappa_beta},
                     {"gamma", rep.selected.kappa_gamma},
                     {"gram", rep.selected.kappa_gram}};
    json batches = json::array();
    for (const auto& b : rep.batches) {
        json jb = {{"batch", b.batch_id},
                   {"train_model", b.train_model},
                   {"test_model", b.test_model},
                   {"train_mean", b.train_mean},
                   {"test_mean", b.test_mean},
                   {"chosen",
                    {{"alpha", b.chosen.kappa_alpha},
                     {"beta", b.chosen.kappa_beta},
                     {"gamma", b.chosen.kappa_gamma},
                     {"gram", b.chosen.kappa_gram}}}};
        if (b.has_ratio) {
            jb["train_ratio"] = b.train_ratio;
            jb["test_ratio"] = b.test_ratio;
        }
        if (b.alpha.size() != 0) jb["alpha"] = vec_to_json(b.alpha);
        if (b.beta.size() != 0) jb["beta"] = vec_to_json(b.beta);
        batches.push_back(jb);
    }
    j["batches"] = batches;
    atomic_write_text(path, j.dump(2) + "\n");
}

CVReport read_cv_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_cv_report_json: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("read_cv_report_json: parse error: " + std::string(e.what()));
    }
    CVReport rep;
    rep.policy = j.value("policy", "fixed");
    rep.metric = j.value("metric", "median_ad") == std::string("mean_ad")
                     ? ErrorMetric::mean_ad
                     : ErrorMetric::median_ad;
    rep.fit_failures = j.value("fit_failures", 0);
    rep.mean_test_model = j.value("mean_test_model", 0.0);
    rep.mean_test_mean = j.value("mean_test_mean", 0.0);
    // NaN round-trips as JSON null
    rep.mean_test_ratio = j.contains("mean_test_ratio") && j["mean_test_ratio"].is_number()
                              ? j["mean_test_ratio"].get<double>()
                              : std::numeric_limits<double>::quiet_NaN();
    for (const auto& jb : j.value("batches", json::array())) {
        BatchErrors b;
        b.batch_id = jb.value("batch", 0);
        b.train_model = jb.value("train_model", 0.0);
        b.test_model = jb.value("test_model", 0.0);
        b.train_mean = jb.value("train_mean", 0.0);
        b.test_mean = jb.value("test_mean", 0.0);
        if (jb.contains("train_ratio")) {
            b.train_ratio = jb["train_ratio"].get<double>();
            b.test_ratio = jb["test_ratio"].get<double>();
            b.has_ratio = true;
        }
        if (jb.contains("alpha")) b.alpha = vec_from_json(jb["alpha"]);
        if (jb.contains("beta")) b.beta = vec_from_json(jb["beta"]);
        rep.batches.push_back(b);
    }
    return rep;
}

void write_predictions_csv(const std::string& path, const std::vector<SampleMeta>& meta,
                           const Eigen::VectorXd& pred) {
    std::ostringstream out;
    out << "sample,id,prediction\n";
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
        std::string id = k < static_cast<Eigen::Index>(meta.size())
                             ? meta[static_cast<size_t>(k)].id
                             : "s" + std::to_string(k);
        out << k << ',' << id << ',' << format_double(pred[k]) << '\n';
    }
    atomic_write_text(path, out.str());
}

}  // namespace spectensor
