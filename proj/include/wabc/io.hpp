#pragma once

#include "wabc/aao.hpp"
#include "wabc/abc.hpp"
#include "wabc/bezier.hpp"
#include "wabc/point_cloud.hpp"
#include "wabc/theory.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace wabc {

using json = nlohmann::json;

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double v);

/// CSV with header f1,...,fM and one point per row.
std::string cloud_to_csv(const PointCloud& cloud);
PointCloud cloud_from_csv(const std::string& text);

void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_cloud_csv(const std::filesystem::path& path);

json model_to_json(const BezierModel& model);
BezierModel model_from_json(const json& j);

json hyperparams_to_json(const PriorHyperParams& hp);
PriorHyperParams hyperparams_from_json(const json& j);

json fit_report_to_json(const FitReport& report, bool with_timing = true);
FitReport fit_report_from_json(const json& j);

json aao_result_to_json(const AaoResult& result, bool with_timing = true);

json bias_scan_to_json(const BiasScanReport& report);
json acceptance_scan_to_json(const AcceptanceScanReport& report);

std::string read_text(const std::filesystem::path& path);
/// Writes the file, creating parent directories; throws DataError when unwritable.
void write_text(const std::filesystem::path& path, const std::string& text);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace wabc
