#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wsdse/layer_explorer.hpp"
#include "wsdse/model.hpp"
#include "wsdse/network_explorer.hpp"
#include "wsdse/predictor.hpp"

namespace wsdse::io {

// Model container: a JSON manifest describing the architecture plus a raw
// blob of little-endian f32 values, layer-concatenated in manifest order,
// weights then bias per weighted layer. Loaders validate shape chains and
// reject NaN/Inf; malformed files are errors, never repaired.

ModelSpec load_model(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& blob_path);
void save_model(const ModelSpec& model, const std::filesystem::path& manifest_path,
                const std::filesystem::path& blob_path);

// IDX containers (dtype 0x08 unsigned byte only). Images: ndim 3
// (count, height, width), pixels scaled to [0,1] by /255. Labels: ndim 1.
std::vector<Tensor> load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path);
void save_idx_images(const std::vector<Tensor>& images, const std::filesystem::path& path);
void save_idx_labels(const std::vector<int>& labels, int count,
                     const std::filesystem::path& path);

// CSV: '.' decimal separator, LF line endings, mandatory header row.

/// columns: layer,k,b_index,al_pp,cr,inertia
void save_curve_csv(const SensitivityCurve& curve, const std::filesystem::path& path);
SensitivityCurve load_curve_csv(const std::filesystem::path& path);

/// columns: ktuple,al_pp,al_source,cr,inertia_sum
void save_results_csv(const std::vector<EvalRecord>& records,
                      const std::filesystem::path& path);
std::vector<EvalRecord> load_results_csv(const std::filesystem::path& path);

void save_front_csv(const ParetoFront& front, const std::filesystem::path& path);

/// {"schema_version":"1","layer1":[...],...} with per-layer AL/CR detail
void save_candidates_json(const std::vector<CandidateSet>& sets,
                          const std::filesystem::path& path);
std::vector<CandidateSet> load_candidates_json(const std::filesystem::path& path);

/// {"schema_version":"1","alphas":[...],"intercept":null,...}
void save_predictor_json(const PredictionModel& model, const std::filesystem::path& path);
PredictionModel load_predictor_json(const std::filesystem::path& path);

void save_baseline_json(double accuracy, std::size_t n_samples,
                        const std::filesystem::path& path);
double load_baseline_json(const std::filesystem::path& path);

void save_comparison_json(const FrontComparison& cmp, const std::filesystem::path& path);

/// Deterministic formatting used by every CSV writer: shortest decimal
/// string that round-trips the double exactly.
std::string format_double(double v);

} // namespace wsdse::io
