#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ipid/discretization.hpp"
#include "ipid/estimation.hpp"
#include "ipid/metrics.hpp"
#include "ipid/signals.hpp"

namespace ipid::io {

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

// Measurement streams: fixed 31-column layout
// (t, pose 12 row-major, v, omega, a, alpha, f, tau), full precision so a
// write/read round trip is bit exact.
void write_measurement_csv(const std::filesystem::path& path, const MeasurementSeries& series);
MeasurementSeries read_measurement_csv(const std::filesystem::path& path);

void write_points_csv(const std::filesystem::path& path, const PointMassModel& model);

nlohmann::json shape_to_json(const ShapeSpec& shape);
ShapeSpec shape_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const InertialParams& params);
InertialParams params_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const EstimateReport& report);

nlohmann::json error_report_to_json(const ErrorReport& report);

void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace ipid::io
