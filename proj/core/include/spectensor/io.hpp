#ifndef SPECTENSOR_IO_HPP
#define SPECTENSOR_IO_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include "spectensor/baselines.hpp"
#include "spectensor/cv.hpp"
#include "spectensor/preprocess.hpp"
#include "spectensor/rank_one.hpp"
#include "spectensor/selection.hpp"
#include "spectensor/tensor.hpp"

namespace spectensor {

/// Schema or content problem in an on-disk artifact.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Write-temp-then-rename; interrupted runs never leave partial artifacts.
void atomic_write_text(const std::string& path, const std::string& content);

struct NormalizationRecord {
    NormalizationMode mode = NormalizationMode::none;
    std::string applied_to = "xtilde";  // "coefficients" or "xtilde"
};

/// A tensor dataset: JSON manifest sidecar plus a CSV long-format data file
/// with header sample,source,detector,wavenumber_index,value.
struct DatasetBundle {
    Tensor4 values;
    SpectralGrid grid;
    std::vector<SampleMeta> meta;
    std::string kind = "raw";  // raw | coefficients | xtilde
    Eigen::VectorXd responses;  // optional, length n when present
    std::optional<KernelSpec> kernel;
    NormalizationRecord normalization;
    std::vector<uint8_t> converged;  // optional per-(k,i,j) flags
};

/// Writes `<manifest_path>` (JSON) and the data CSV next to it.
void write_dataset(const std::string& manifest_path, const DatasetBundle& bundle);

/// Reads and validates a dataset; unsorted CSV rows are accepted and
/// canonicalized. Errors name the offending row/field or missing slice.
DatasetBundle read_dataset(const std::string& manifest_path);

/// Self-contained model description: enough for bit-exact prediction.
struct ModelManifest {
    std::string kind = "rank_one";  // rank_one | ratio | mean
    RankOneModel model;
    RegParams reg;
    std::vector<int> kept_indices;
    SpectralGrid kept_grid;
    KernelSpec kernel;
    NormalizationRecord normalization;
    Eigen::MatrixXd norm_scales;  // p x d divisors recorded for max_amplitude mode
    RatioRegressionModel ratio;  // kind == ratio
    double mean_value = 0.0;     // kind == mean
    double response_center = 0.0, response_scale = 1.0;
    bool converged = false;
    double final_objective = 0.0;
    int sweeps = 0;
};

void write_model(const std::string& path, const ModelManifest& m);
ModelManifest read_model(const std::string& path);

/// One row per batch x method, plus a JSON summary for the plot command.
void write_cv_report_csv(const std::string& path, const CVReport& rep);
void write_cv_report_json(const std::string& path, const CVReport& rep);
CVReport read_cv_report_json(const std::string& path);

void write_predictions_csv(const std::string& path, const std::vector<SampleMeta>& meta,
                           const Eigen::VectorXd& pred);

std::string format_double(double v);  // 17 significant digits, round-trip safe

}  // namespace spectensor

#endif
