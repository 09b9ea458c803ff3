#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "idpoint/diagnostics.hpp"

namespace idpoint {

/// {"name", "meta", "entries": [{name, estimate, se, replicates, target,
/// target_provenance, tolerance, verdict, warning, extra}]}. Nonfinite numbers
/// and missing targets serialize as null.
nlohmann::json to_json(const DiagnosticReport& report);
nlohmann::json to_json(const ReportEntry& entry);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
void write_report_json(const std::filesystem::path& path, const DiagnosticReport& report);

/// Flat CSV: name,estimate,se,replicates,target,target_provenance,verdict.
void write_report_csv(const std::filesystem::path& path, const DiagnosticReport& report);

}  // namespace idpoint
