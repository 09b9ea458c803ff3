#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "idpoint/arrays.hpp"
#include "idpoint/config.hpp"
#include "idpoint/diagnostics.hpp"
#include "idpoint/levy_measure.hpp"
#include "idpoint/series.hpp"
#include "idpoint/statistics.hpp"

namespace idpoint {

std::string version();

struct RunManifest {
  std::string name;
  std::string config_hash;
  std::string version;
  double wall_seconds = 0.0;
  unsigned threads = 0;
  std::map<std::string, std::uint64_t> seeds;
  /// Output files relative to the output directory, sorted.
  std::vector<std::string> files;
};

nlohmann::json to_json(const RunManifest& manifest);

/// Executes the experiment, writes its CSV/JSON outputs and manifest.json
/// into config.out, and returns the manifest.
RunManifest run(const ExperimentConfig& config);

struct ConvergeResult {
  DiagnosticReport report;
  std::vector<double> array_sums;
  std::vector<double> target_sums;
  KsResult ks;
};

/// Draws S_n from the array and the target's series sum, each `replicates`
/// times, and compares them by a two-sample KS test. The verdict passes when
/// the KS distance is below `max_distance` and the test does not reject.
/// The target must be a Levy measure with a finite small-jump mean.
ConvergeResult converge_experiment(const ArrayModel& model, const LevyMeasure& target, std::size_t n,
                                   std::size_t replicates, Seed seed, unsigned threads = 0,
                                   const Truncation& truncation = {}, double max_distance = 0.05);

/// Type-7 quantiles of both samples at the standard probability grid, as CSV
/// rows "p,array,target".
void write_quantile_table(const std::filesystem::path& path, const std::vector<double>& a,
                          const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Canned recipes

struct RecipeOptions {
  Seed seed{20160523};
  unsigned threads = 0;
  /// Multiplies every replicate budget (floors keep estimators usable).
  double budget_scale = 1.0;
  std::filesystem::path out = "recipes";
};

struct RecipeResult {
  DiagnosticReport report;
  /// Extra files written by the recipe, relative to its directory.
  std::vector<std::string> files;
};

struct Recipe {
  std::string name;
  std::string version;
  std::string description;
  /// Receives the recipe's own output directory.
  std::function<RecipeResult(const RecipeOptions&, const std::filesystem::path&)> body;
};

const std::vector<Recipe>& recipes();
const Recipe& find_recipe(const std::string& name);

/// Runs the recipe into options.out / name, writing report.json, report.csv
/// and manifest.json next to its own files.
RunManifest run_recipe(const Recipe& recipe, const RecipeOptions& options, DiagnosticReport* report = nullptr);

/// Replicate count after scaling, never below `floor`.
std::size_t scaled(std::size_t base, double scale, std::size_t floor = 200);

}  // namespace idpoint
