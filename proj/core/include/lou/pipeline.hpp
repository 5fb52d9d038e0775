#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "lou/calibration.hpp"
#include "lou/market_data.hpp"
#include "lou/montecarlo.hpp"

namespace lou {

std::string_view tool_version();

// Hex SHA-256 of a byte string or a file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct PipelineConfig {
  ModelKind model = ModelKind::kLinear;
  SimConfig sim;
  double lambda = kDefaultLambda;
  double quad_tol = 1e-9;
  int error_seeds = 0;
  int smile_points = 41;         // per maturity
  double smile_margin = 0.05;    // log-moneyness beyond the quoted range
  bool pdf = false;
  double pdf_tau = 1.0;
  double pdf_x_min = -1.5;
  double pdf_x_max = 1.5;
  int pdf_points = 301;
  std::optional<ModelParams> params;  // set: skip calibration
};

struct RunManifest {
  std::string command = "run";
  std::string version;
  std::filesystem::path market_path;
  std::string market_sha256;
  std::optional<std::filesystem::path> params_path;
  std::string params_sha256;
  PipelineConfig config;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(std::string_view text);

// File name -> contents for every artefact a run emits.
using ReportBundle = std::map<std::string, std::string>;

struct PipelineResult {
  std::vector<SmileFit> fits;
  std::optional<CalibrationResult> calibration;
  ModelParams params;
  ReportBundle files;
};

PipelineResult run_pipeline(const MarketDataset& data, const PipelineConfig& config);

// Loads inputs named by the manifest, checks their digests and runs.
PipelineResult run_from_manifest(const RunManifest& manifest);

void write_bundle(const ReportBundle& files, const std::filesystem::path& out_dir);

// Per-maturity stats and parameter tables, as aligned text and CSV.
std::string format_stats_text(const std::vector<SmileStats>& stats);
std::string format_stats_csv(const std::vector<SmileStats>& stats);
std::string format_params_text(const CalibrationResult& result);
std::string format_params_csv(const CalibrationResult& result);

}  // namespace lou
