#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "floodgate/dataset.hpp"
#include "floodgate/estimators.hpp"
#include "floodgate/models.hpp"
#include "floodgate/surrogate.hpp"

namespace floodgate {
struct GroundTruth;
struct CoverageReport;
struct WidthCurve;
}  // namespace floodgate

namespace floodgate::io {

/// Shortest decimal rendering that round-trips the exact double.
std::string format_double(double v);
/// Strict parse; rejects trailing garbage, NaN, and infinities.
double parse_double(const std::string& token, std::size_t row_for_errors);

// Dataset files. CSV layout: a `# floodgate-dataset format_version=1` comment
// line, a `x_1,...,x_d[,y][,f][,batch]` header, then rows of shortest
// round-trip decimals. The JSON container additionally carries provenance.
// save/load dispatch on the .csv/.json extension.
void save_dataset(const EvaluatedDataset& data, const std::filesystem::path& path);
EvaluatedDataset load_dataset(const std::filesystem::path& path);

// Forcing files: `day,precip_mm,pet_mm[,obs_flow_mm]`.
void save_forcing(const ForcingSeries& forcing, const std::filesystem::path& path);
ForcingSeries load_forcing(const std::filesystem::path& path);

// Serialized KRR model: versioned JSON container with centers, weights,
// gamma, lambda, intercept, and the input scaling box.
void save_krr(const KrrSurrogate& model, const std::filesystem::path& path);
KrrSurrogate load_krr(const std::filesystem::path& path);

// Interval results: CSV for plotting, JSON with full diagnostics (including
// the 3x3 covariance).
void save_intervals_csv(std::span<const IntervalResult> results,
                        const std::filesystem::path& path);
void save_intervals_json(std::span<const IntervalResult> results,
                         const std::filesystem::path& path);

// Ground truth: `input,s_total,stderr,source` rows.
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

// Coverage / width-curve reports.
void save_coverage_csv(const CoverageReport& report, const std::filesystem::path& path);
void save_coverage_json(const CoverageReport& report, const std::filesystem::path& path);
void save_width_curve_csv(const WidthCurve& curve, const std::filesystem::path& path);

/// Every CLI run writes one of these beside its outputs; config + seeds are
/// sufficient to reproduce the run exactly.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::string config_json;  // resolved configuration, canonical dump
  std::string config_hash;  // fnv1a-64 of config_json, hex
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> evaluation_counts;
  double wallclock_seconds = 0.0;
  std::string created_at;  // ISO-8601 UTC
};
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);
std::string iso8601_utc_now();

}  // namespace floodgate::io
