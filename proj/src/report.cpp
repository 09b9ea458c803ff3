#include "idpoint/report.hpp"

#include <cmath>
#include <fstream>

#include "idpoint/csv.hpp"
#include "idpoint/errors.hpp"

namespace idpoint {
namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

nlohmann::json to_json(const ReportEntry& entry) {
  nlohmann::json j;
  j["name"] = entry.name;
  j["estimate"] = number(entry.estimate);
  j["se"] = number(entry.se);
  j["replicates"] = entry.replicates;
  j["target"] = entry.target ? number(*entry.target) : nlohmann::json(nullptr);
  j["target_provenance"] = entry.target_provenance;
  j["tolerance"] = number(entry.tolerance);
  j["verdict"] = entry.verdict;
  if (!entry.warning.empty()) j["warning"] = entry.warning;
  if (!entry.extra.empty()) {
    nlohmann::json extra = nlohmann::json::object();
    for (const auto& [k, v] : entry.extra) extra[k] = number(v);
    j["extra"] = extra;
  }
  return j;
}

nlohmann::json to_json(const DiagnosticReport& report) {
  nlohmann::json j;
  j["name"] = report.name;
  j["meta"] = report.meta;
  j["all_passed"] = report.all_passed();
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) entries.push_back(to_json(e));
  j["entries"] = entries;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  auto out = open_for_write(path);
  out << value.dump(2) << '\n';
}

void write_report_json(const std::filesystem::path& path, const DiagnosticReport& report) {
  write_json(path, to_json(report));
}

void write_report_csv(const std::filesystem::path& path, const DiagnosticReport& report) {
  auto out = open_for_write(path);
  out << "name,estimate,se,replicates,target,target_provenance,verdict\n";
  for (const auto& e : report.entries) {
    out << quoted(e.name) << ',' << format_double(e.estimate) << ',' << format_double(e.se) << ',' << e.replicates
        << ',' << (e.target ? format_double(*e.target) : std::string()) << ',' << quoted(e.target_provenance) << ','
        << e.verdict << '\n';
  }
}

}  // namespace idpoint
