#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "idpoint/arrays.hpp"
#include "idpoint/config.hpp"
#include "idpoint/diagnostics.hpp"
#include "idpoint/errors.hpp"
#include "idpoint/levy_measure.hpp"
#include "idpoint/point_process.hpp"
#include "idpoint/runner.hpp"
#include "idpoint/series.hpp"
#include "idpoint/statistics.hpp"
#include "idpoint/test_function.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace idpoint;

namespace {

py::array_t<double> as_array(std::vector<double> v) {
  auto* heap = new std::vector<double>(std::move(v));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<double>*>(p); });
  return py::array_t<double>(static_cast<py::ssize_t>(heap->size()), heap->data(), owner);
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

MarkDistribution marks(const std::string& kind, double a, double b) {
  if (kind == "point_mass") return MarkDistribution(MarkDistribution::PointMass{a});
  if (kind == "lognormal") return MarkDistribution(MarkDistribution::LogNormal{a, b});
  if (kind == "geometric_sum") return MarkDistribution(MarkDistribution::GeometricWeightsSum{a});
  throw ConfigError("unknown mark law '" + kind + "'");
}

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Infinitely divisible laws, cluster point processes and triangular-array diagnostics";
  m.attr("__version__") = version();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<LevyMeasure>(m, "LevyMeasure")
      .def_static("stable", &LevyMeasure::stable, "alpha"_a, "gamma"_a = 1.0)
      .def_static("gamma", &LevyMeasure::gamma, "alpha"_a)
      .def_static(
          "product",
          [](double alpha, const std::string& mark, double a, double b) {
            return LevyMeasure::product_convolution(RadonIntensity::power_tail(alpha), marks(mark, a, b));
          },
          "alpha"_a, "marks"_a = "point_mass", "a"_a = 1.0, "b"_a = 0.0,
          "Power-tail intensity with marks point_mass(a), lognormal(a, b) or geometric_sum(a).")
      .def("tail", &LevyMeasure::tail, "x"_a)
      .def("tail_inverse", [](const LevyMeasure& self, double y) { return self.tail_inverse(y); }, "y"_a)
      .def("small_jump_mean", &LevyMeasure::small_jump_mean)
      .def("__repr__", &LevyMeasure::describe);

  m.def(
      "fk_sums",
      [](const LevyMeasure& measure, std::uint64_t seed, std::size_t replicates, std::size_t max_terms,
         double point_floor, unsigned threads) {
        std::vector<double> v;
        {
          py::gil_scoped_release release;
          v = fk_sums(measure, Seed(seed), replicates, Truncation{max_terms, point_floor}, threads);
        }
        return as_array(std::move(v));
      },
      "measure"_a, "seed"_a, "replicates"_a, "max_terms"_a = 10000, "point_floor"_a = 1e-8, "threads"_a = 0);

  m.def(
      "laplace_analytic",
      [](double alpha, const std::string& mark, double a, double b, const std::string& shape, double lo, double hi,
         double height) {
        const TestFunction f = shape == "hat" ? TestFunction::hat(lo, hi, height) : TestFunction::indicator(lo, hi, height);
        return laplace_analytic(ProductModel{RadonIntensity::power_tail(alpha), marks(mark, a, b)}, f);
      },
      "alpha"_a, "marks"_a, "a"_a, "b"_a, "shape"_a, "lo"_a, "hi"_a, "height"_a = 1.0);

  m.def(
      "iid_row",
      [](double alpha, std::size_t n, std::uint64_t seed) {
        return as_array(generate_row(ArrayModel(ArrayModel::IidHeavyTail{alpha}), n, Seed(seed)));
      },
      "alpha"_a, "n"_a, "seed"_a);
  m.def(
      "linear_row",
      [](double alpha, double theta, std::size_t n, std::uint64_t seed) {
        return as_array(
            generate_row(ArrayModel(ArrayModel::LinearProcess{alpha, CoefficientLaw{theta, 0.0}}), n, Seed(seed)));
      },
      "alpha"_a, "theta"_a, "n"_a, "seed"_a);

  m.def(
      "block_scheme",
      [](std::size_t n, const std::string& profile) {
        const MixingProfile p = profile == "harmonic" ? MixingProfile::harmonic() : MixingProfile::zero();
        const BlockScheme b = block_scheme(n, p);
        return py::dict("n"_a = b.n, "rho"_a = b.rho, "epsilon"_a = b.epsilon, "delta"_a = b.delta, "eta"_a = b.eta,
                        "r"_a = b.r, "k"_a = b.k, "m"_a = b.m, "k_alpha_m"_a = b.k_alpha_m);
      },
      "n"_a, "profile"_a = "harmonic");

  m.def(
      "ks_two_sample",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b, double level) {
        const KsResult r = ks_two_sample(as_vector(a), as_vector(b), level);
        return py::dict("statistic"_a = r.statistic, "p_value"_a = r.p_value, "reject"_a = r.reject);
      },
      "a"_a, "b"_a, "level"_a = 0.01);

  m.def(
      "run_config",
      [](const std::string& text, const std::string& out, std::optional<std::uint64_t> seed,
         std::optional<unsigned> threads) {
        Overrides o;
        o.seed = seed;
        o.threads = threads;
        o.out = out;
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = run(experiment_from(Config::parse_string(text), o));
        }
        return json_to_py(to_json(manifest));
      },
      "text"_a, "out"_a, "seed"_a = py::none(), "threads"_a = py::none(),
      "Runs an experiment from config text and returns its manifest.");

  m.def("recipes", [] {
    std::vector<std::string> names;
    for (const auto& r : recipes()) names.push_back(r.name);
    return names;
  });
}
