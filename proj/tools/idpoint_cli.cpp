// idpoint: run experiments from config files and canned recipes.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "idpoint/config.hpp"
#include "idpoint/errors.hpp"
#include "idpoint/parallel.hpp"
#include "idpoint/quadrature.hpp"
#include "idpoint/report.hpp"
#include "idpoint/runner.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kDomain = 3,
  kNumeric = 4,
  kVerdict = 5,
};

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << '\n';
  return code;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("-c,--config", c.config, "experiment config file");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("-s,--seed", c.seed, "master seed (overrides experiment.seed)");
  cmd->add_option("-t,--threads", c.threads, "worker threads (default: $IDPOINT_THREADS or all cores)");
  cmd->add_option("-o,--out", c.out, "output directory");
}

int run_experiment(const std::string& kind, const Common& common) {
  idpoint::Config config = idpoint::Config::load(common.config);
  if (!config.has("experiment.kind")) {
    config.set("experiment.kind", kind);
  } else if (config.text("experiment.kind") != kind) {
    throw idpoint::ConfigError("field 'experiment.kind' is '" + config.text("experiment.kind") +
                               "' but the subcommand is '" + kind + "'");
  }
  idpoint::Overrides overrides;
  overrides.seed = common.seed;
  overrides.threads = common.threads;
  if (common.out) overrides.out = *common.out;
  const idpoint::ExperimentConfig experiment = idpoint::experiment_from(std::move(config), overrides);
  const idpoint::RunManifest manifest = idpoint::run(experiment);
  std::cout << idpoint::to_json(manifest).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinitely divisible laws, cluster point processes and triangular-array diagnostics"};
  app.set_version_flag("--version", idpoint::version());
  app.require_subcommand(1);

  Common common;
  const char* kinds[] = {"sample", "cluster", "diagnose", "blocks", "converge"};
  const char* help[] = {
      "draw series sums of a Levy measure, or rows of an array model",
      "sample Poisson cluster or product-model configurations and check Laplace functionals",
      "run the condition estimators on an array model over n and m grids",
      "tabulate the block construction over an n grid",
      "compare array partial sums with the series sum of a target measure",
  };
  std::vector<CLI::App*> experiment_cmds;
  for (std::size_t i = 0; i < 5; ++i) {
    auto* cmd = app.add_subcommand(kinds[i], help[i]);
    add_common(cmd, common, true);
    experiment_cmds.push_back(cmd);
  }

  auto* rec = app.add_subcommand("recipes", "list or run the canned verification recipes");
  std::string action = "list";
  std::vector<std::string> names;
  double scale = 1.0;
  bool strict = false;
  rec->add_option("action", action, "list | run")->check(CLI::IsMember({"list", "run"}));
  rec->add_option("names", names, "recipe names, or 'all'");
  rec->add_option("--scale", scale, "replicate budget multiplier")->check(CLI::PositiveNumber);
  rec->add_flag("--strict", strict, "exit with status 5 when any verdict fails");
  add_common(rec, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kConfig);
  }

  try {
    for (std::size_t i = 0; i < experiment_cmds.size(); ++i) {
      if (*experiment_cmds[i]) return run_experiment(kinds[i], common);
    }
    if (action == "list") {
      for (const auto& r : idpoint::recipes()) std::cout << r.name << '\t' << r.version << '\t' << r.description << '\n';
      return kOk;
    }
    if (names.empty()) throw idpoint::ConfigError("recipes run needs at least one recipe name or 'all'");
    idpoint::RecipeOptions options;
    if (common.seed) options.seed = idpoint::Seed(*common.seed);
    if (common.threads) options.threads = *common.threads;
    if (common.out) options.out = *common.out;
    options.budget_scale = scale;
    std::vector<const idpoint::Recipe*> selected;
    for (const auto& n : names) {
      if (n == "all") {
        for (const auto& r : idpoint::recipes()) selected.push_back(&r);
      } else {
        selected.push_back(&idpoint::find_recipe(n));
      }
    }
    bool all_passed = true;
    for (const auto* r : selected) {
      idpoint::DiagnosticReport report;
      const auto manifest = idpoint::run_recipe(*r, options, &report);
      all_passed = all_passed && report.all_passed();
      std::cout << r->name << '\t' << (report.all_passed() ? "pass" : "fail") << '\t' << manifest.wall_seconds
                << "s\t" << (options.out / r->name).string() << '\n';
    }
    return strict && !all_passed ? kVerdict : kOk;
  } catch (const idpoint::ConfigError& e) {
    return report_error("config", e.what(), kConfig);
  } catch (const idpoint::PreconditionError& e) {
    return report_error("precondition", e.what(), kDomain);
  } catch (const idpoint::DomainError& e) {
    return report_error("domain", e.what(), kDomain);
  } catch (const idpoint::QuadratureError& e) {
    return report_error("quadrature", e.what(), kNumeric);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what(), kFailure);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kFailure);
  }
}
