#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "bubbledyn/experiment.hpp"

namespace bubbledyn {

/// Directory layout of one run:
///   series.csv          t,avg_x,energy,norm,max_entropy
///   local_x.csv         t followed by <X_s> for every canonical site s
///   snapshot_t<T>.csv   height rows of width comma-separated <X>, row y = 0 first
///   result.json         shape stats, fate, provenance, snapshot index
/// Numbers are written with 17 significant digits, so read_result gives back
/// exactly what was written.
void write_result(const QuenchResult& result, const std::filesystem::path& dir);
QuenchResult read_result(const std::filesystem::path& dir);

std::string snapshot_filename(double t);

nlohmann::json shape_stats_json(const ShapeStats& stats);

/// Writes `doc` with two-space indentation, creating parent directories.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace bubbledyn
