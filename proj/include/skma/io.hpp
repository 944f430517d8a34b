#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "skma/engine.hpp"
#include "skma/synth.hpp"

// File formats. All numeric output is printed with 12 significant digits;
// every writer goes through a temp-file-plus-rename so consumers never see
// a partial file. Cluster labels are 1-based in every format.
//
// Curve CSV (long format): header `curve_id,dim,x,value`, one row per
// observed sample, `dim` 0-based; missing samples are encoded by omitting
// the row. Truth CSV: `curve_id,true_label,true_a,true_b`.

namespace skma::io {

std::string format_g12(double v);

void write_file_atomic(const std::string& path, const std::string& content);

std::vector<SampledCurve> read_curves_csv(const std::string& path);
void write_curves_csv(const std::string& path,
                      const std::vector<SampledCurve>& curves);

void write_truth_csv(const std::string& path, const LabeledDataset& data);
// id -> 0-based label
std::vector<std::pair<std::string, std::size_t>> read_truth_csv(
    const std::string& path);

void write_warps_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<AffineWarp>& warps);
void write_weight_csv(const std::string& path, const WeightFunction& w);
void write_profile_csv(const std::string& path, const CriterionProfile& g);
void write_templates_csv(const std::string& path,
                         const std::vector<Template>& templates);
void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& history);
void write_diagnostics_csv(const std::string& path, const DiagnosticsReport& report);
void write_diagnostics_summary_csv(const std::string& path,
                                   const DiagnosticsReport& report);
void write_benchmark_csv(const std::string& path,
                         const std::vector<BenchmarkEntry>& entries);

nlohmann::json engine_config_to_json(const EngineConfig& cfg);
EngineConfig engine_config_from_json(const nlohmann::json& j);
nlohmann::json sim_spec_to_json(const SimSpec& spec);
SimSpec sim_spec_from_json(const nlohmann::json& j);

// FitResult document, schema "sparse-kma/v1".
void write_fit_json(const std::string& path, const FitResult& result,
                    const nlohmann::json& config_echo);

struct FitLabels {
  std::vector<std::string> ids;
  std::vector<std::size_t> labels;  // 0-based
  std::size_t k = 0;
};
FitLabels read_fit_labels(const std::string& path);

void write_manifest(const std::string& path, const nlohmann::json& manifest);

}  // namespace skma::io
