#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idpoint/arrays.hpp"
#include "idpoint/diagnostics.hpp"
#include "idpoint/levy_measure.hpp"
#include "idpoint/point_process.hpp"

namespace idpoint {

/// Sectioned key-value file:
///
///   [section]
///   key = value   ; comment
///
/// Keys are addressed as "section.key".
class Config {
public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config parse_string(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  bool has_section(const std::string& section) const;
  const std::string& text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::uint64_t integer(const std::string& key) const;
  std::uint64_t integer_or(const std::string& key, std::uint64_t fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::size_t> integers(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Resolves a path value relative to the config file's directory.
  std::filesystem::path path(const std::string& key) const;

  /// "key=value" lines in key order; the input to the config hash.
  std::string canonical() const;
  const std::string& source() const { return source_; }

private:
  std::map<std::string, std::string> values_;
  std::string source_;
  std::filesystem::path base_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

enum class ExperimentKind { Sample, Cluster, Diagnose, Blocks, Converge };
ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> out;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Sample;
  std::uint64_t seed = 0;
  std::size_t replicates = 1000;
  unsigned threads = 0;
  std::filesystem::path out = "out";
  std::vector<std::size_t> n_grid{1000};
  std::vector<std::size_t> m_grid{1};
  Config raw;
};

/// Validates the [experiment] section; a missing seed or an unknown kind is a
/// ConfigError naming the field.
ExperimentConfig experiment_from(Config config, const Overrides& overrides = {});

LevyMeasure measure_from(const Config& config, const std::string& section = "measure");
RadonIntensity intensity_from(const Config& config, const std::string& section = "intensity");
MarkDistribution marks_from(const Config& config, const std::string& section = "marks");
ClusterLaw clusters_from(const Config& config, const std::string& section = "clusters");
ArrayModel model_from(const Config& config, const std::string& section = "model");
MixingProfile profile_from(const Config& config, const std::string& section);
/// [bank] file = path, or the standard bank.
std::vector<TestFunction> bank_from(const Config& config);

}  // namespace idpoint
