#include "idpoint/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "idpoint/errors.hpp"

namespace idpoint {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& value) {
  for (std::size_t i = 0; i < value.size(); ++i) {
    if ((value[i] == ';' || value[i] == '#') && (i == 0 || value[i - 1] == ' ' || value[i - 1] == '\t')) {
      return trim(value.substr(0, i));
    }
  }
  return trim(value);
}

double to_number(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("field '" + key + "' must be a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_integer(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && ptr == text.data() + text.size()) return v;
  // Accept integral scientific notation such as 1e5.
  const double d = to_number(key, text);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
    throw ConfigError("field '" + key + "' must be a nonnegative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string key(const std::string& section, const std::string& name) { return section + "." + name; }

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Config c;
  c.source_ = source;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      c.values_[section] = strip_comment(body.data());
      continue;
    }
    for (const auto& [name, leaf] : body) c.values_[key(section, name)] = strip_comment(leaf.data());
  }
  return c;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  Config c = parse(in, path.string());
  c.base_ = path.parent_path();
  return c;
}

bool Config::has_section(const std::string& section) const {
  const std::string prefix = section + ".";
  auto it = values_.lower_bound(prefix);
  return it != values_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

const std::string& Config::text(const std::string& k) const {
  auto it = values_.find(k);
  if (it == values_.end()) throw ConfigError("missing required field '" + k + "'");
  return it->second;
}

std::string Config::text_or(const std::string& k, const std::string& fallback) const {
  return has(k) ? text(k) : fallback;
}

double Config::number(const std::string& k) const { return to_number(k, text(k)); }

double Config::number_or(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

std::uint64_t Config::integer(const std::string& k) const { return to_integer(k, text(k)); }

std::uint64_t Config::integer_or(const std::string& k, std::uint64_t fallback) const {
  return has(k) ? integer(k) : fallback;
}

bool Config::flag_or(const std::string& k, bool fallback) const {
  if (!has(k)) return fallback;
  const std::string& v = text(k);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("field '" + k + "' must be a boolean, got '" + v + "'");
}

std::vector<double> Config::numbers(const std::string& k) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(k))) out.push_back(to_number(k, item));
  if (out.empty()) throw ConfigError("field '" + k + "' must be a nonempty list");
  return out;
}

std::vector<std::size_t> Config::integers(const std::string& k) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text(k))) out.push_back(to_integer(k, item));
  if (out.empty()) throw ConfigError("field '" + k + "' must be a nonempty list");
  return out;
}

std::filesystem::path Config::path(const std::string& k) const {
  std::filesystem::path p = text(k);
  return p.is_absolute() || base_.empty() ? p : base_ / p;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "sample") return ExperimentKind::Sample;
  if (name == "cluster") return ExperimentKind::Cluster;
  if (name == "diagnose") return ExperimentKind::Diagnose;
  if (name == "blocks") return ExperimentKind::Blocks;
  if (name == "converge") return ExperimentKind::Converge;
  throw ConfigError("field 'experiment.kind' must be one of sample, cluster, diagnose, blocks, converge; got '" + name +
                    "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Sample: return "sample";
    case ExperimentKind::Cluster: return "cluster";
    case ExperimentKind::Diagnose: return "diagnose";
    case ExperimentKind::Blocks: return "blocks";
    case ExperimentKind::Converge: return "converge";
  }
  return "unknown";
}

ExperimentConfig experiment_from(Config config, const Overrides& overrides) {
  if (overrides.seed) config.set("experiment.seed", std::to_string(*overrides.seed));
  if (overrides.threads) config.set("experiment.threads", std::to_string(*overrides.threads));
  if (overrides.out) config.set("experiment.out", overrides.out->string());

  ExperimentConfig e;
  e.kind = parse_experiment_kind(config.text("experiment.kind"));
  e.seed = config.integer("experiment.seed");
  e.replicates = config.integer_or("experiment.replicates", e.replicates);
  if (e.replicates < 2) throw ConfigError("field 'experiment.replicates' must be at least 2");
  e.threads = static_cast<unsigned>(config.integer_or("experiment.threads", 0));
  if (overrides.out) {
    e.out = *overrides.out;
  } else if (config.has("experiment.out")) {
    e.out = config.path("experiment.out");
  }
  if (config.has("experiment.n_grid")) e.n_grid = config.integers("experiment.n_grid");
  if (config.has("experiment.m_grid")) e.m_grid = config.integers("experiment.m_grid");
  for (auto n : e.n_grid) {
    if (n == 0) throw ConfigError("field 'experiment.n_grid' entries must be positive");
  }
  // Thread budget does not change results, so it stays out of the hash input.
  config.set("experiment.threads", "*");
  config.set("experiment.out", "*");
  e.raw = std::move(config);
  return e;
}

LevyMeasure measure_from(const Config& c, const std::string& s) {
  const std::string kind = c.text(key(s, "kind"));
  if (kind == "stable") return LevyMeasure::stable(c.number(key(s, "alpha")), c.number_or(key(s, "gamma"), 1.0));
  if (kind == "gamma") return LevyMeasure::gamma(c.number(key(s, "alpha")));
  if (kind == "product") {
    return LevyMeasure::product_convolution(intensity_from(c, c.text_or(key(s, "intensity"), "intensity")),
                                            marks_from(c, c.text_or(key(s, "marks"), "marks")));
  }
  if (kind == "tabulated") return LevyMeasure::tabulated(TabulatedTail::load_csv(c.path(key(s, "file"))));
  throw ConfigError("field '" + key(s, "kind") + "' names unknown measure '" + kind +
                    "' (expected stable, gamma, product, tabulated)");
}

RadonIntensity intensity_from(const Config& c, const std::string& s) {
  const std::string kind = c.text(key(s, "kind"));
  const double scale = c.number_or(key(s, "scale"), 1.0);
  if (kind == "power_tail") return RadonIntensity::power_tail(c.number(key(s, "alpha")), scale);
  if (kind == "tabulated") return RadonIntensity::tabulated(TabulatedTail::load_csv(c.path(key(s, "file"))), scale);
  throw ConfigError("field '" + key(s, "kind") + "' names unknown intensity '" + kind +
                    "' (expected power_tail, tabulated)");
}

MarkDistribution marks_from(const Config& c, const std::string& s) {
  const std::string kind = c.text(key(s, "kind"));
  if (kind == "point_mass") return MarkDistribution(MarkDistribution::PointMass{c.number(key(s, "w"))});
  if (kind == "lognormal") {
    return MarkDistribution(MarkDistribution::LogNormal{c.number_or(key(s, "mu"), 0.0), c.number(key(s, "sigma"))});
  }
  if (kind == "geometric_sum") return MarkDistribution(MarkDistribution::GeometricWeightsSum{c.number(key(s, "theta"))});
  if (kind == "empirical") return MarkDistribution(MarkDistribution::Empirical{c.numbers(key(s, "values"))});
  throw ConfigError("field '" + key(s, "kind") + "' names unknown mark law '" + kind +
                    "' (expected point_mass, lognormal, geometric_sum, empirical)");
}

ClusterLaw clusters_from(const Config& c, const std::string& s) {
  const std::string kind = c.text_or(key(s, "kind"), "single");
  if (kind == "single") return ClusterLaw::single_point(c.number_or(key(s, "q"), 1.0));
  if (kind == "deterministic") return ClusterLaw(ClusterLaw::Deterministic{c.numbers(key(s, "points"))});
  if (kind == "geometric") return ClusterLaw(ClusterLaw::GeometricWeights{c.number(key(s, "theta"))});
  if (kind == "file") return ClusterLaw::load_csv(c.path(key(s, "file")));
  throw ConfigError("field '" + key(s, "kind") + "' names unknown cluster law '" + kind +
                    "' (expected single, deterministic, geometric, file)");
}

ArrayModel model_from(const Config& c, const std::string& s) {
  const std::string kind = c.text(key(s, "kind"));
  const double alpha = c.number(key(s, "alpha"));
  if (kind == "iid") return ArrayModel(ArrayModel::IidHeavyTail{alpha});
  if (kind == "moving_sum") return ArrayModel(ArrayModel::MDependentMovingSum{alpha, c.integer(key(s, "m"))});
  if (kind == "linear") {
    return ArrayModel(ArrayModel::LinearProcess{
        alpha, CoefficientLaw{c.number_or(key(s, "theta"), 0.5), c.number_or(key(s, "sigma"), 0.0)},
        c.integer_or(key(s, "cutoff"), 0)});
  }
  if (kind == "volatility") {
    const std::string law = c.text_or(key(s, "volatility"), "moving_max");
    if (law == "moving_max") {
      return ArrayModel(ArrayModel::StochasticVolatility{
          alpha, VolatilityLaw{VolatilityLaw::MovingMax{c.integer_or(key(s, "m"), 2), c.number_or(key(s, "s"), 0.5)}}});
    }
    if (law == "log_gaussian") {
      return ArrayModel(ArrayModel::StochasticVolatility{
          alpha, VolatilityLaw{VolatilityLaw::LogGaussian{c.number(key(s, "r")), c.number_or(key(s, "s"), 0.5)}}});
    }
    throw ConfigError("field '" + key(s, "volatility") + "' must be moving_max or log_gaussian");
  }
  if (kind == "associated") return ArrayModel(ArrayModel::AssociatedGaussian{alpha, c.number(key(s, "r"))});
  throw ConfigError("field '" + key(s, "kind") + "' names unknown model '" + kind +
                    "' (expected iid, moving_sum, linear, volatility, associated)");
}

MixingProfile profile_from(const Config& c, const std::string& s) {
  const std::string kind = c.text_or(key(s, "profile"), "harmonic");
  if (kind == "harmonic") return MixingProfile::harmonic();
  if (kind == "zero") return MixingProfile::zero();
  if (kind == "geometric") return MixingProfile::geometric(c.number(key(s, "q")));
  if (kind == "power") return MixingProfile::power(c.number(key(s, "p")));
  throw ConfigError("field '" + key(s, "profile") + "' must be harmonic, zero, geometric or power");
}

std::vector<TestFunction> bank_from(const Config& c) {
  if (c.has("bank.file")) return load_test_bank(c.path("bank.file"));
  return standard_test_bank();
}

}  // namespace idpoint
