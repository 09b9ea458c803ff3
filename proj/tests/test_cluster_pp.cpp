#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "idpoint/errors.hpp"
#include "idpoint/point_process.hpp"
#include "idpoint/statistics.hpp"

using namespace idpoint;

namespace {

std::vector<double> counts_above(const ProcessSampler& sampler, double lo, std::size_t replicates, Seed seed) {
  std::vector<double> out;
  out.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    Stream s(seed.derive(r));
    out.push_back(static_cast<double>(sampler(s).count(lo, INFINITY)));
  }
  return out;
}

}  // namespace

TEST_CASE("Poisson sampling") {
  const auto nu = RadonIntensity::power_tail(1.0);
  SUBCASE("count above one is Poisson(1)") {
    const auto c = counts_above([&](Stream& s) { return poisson_sample(nu, 1.0, s); }, 1.0, 100000, Seed(1));
    CHECK(oracle::within_3se(oracle::mean(c), 1.0, oracle::se(c)));
    CHECK(oracle::within_3se(oracle::variance(c), 1.0, oracle::variance_se(c)));
  }
  SUBCASE("far window is empty") {
    Stream s(Seed(2));
    for (int i = 0; i < 1000; ++i) CHECK(poisson_sample(nu, 1e13, s).size() == 0);
  }
  SUBCASE("disjoint windows are uncorrelated") {
    std::vector<double> a, b, prod;
    for (std::uint64_t r = 0; r < 50000; ++r) {
      Stream s(Seed(3).derive(r));
      const auto p = poisson_sample(nu, 1.0, s);
      a.push_back(static_cast<double>(p.count(1.0, 2.0)));
      b.push_back(static_cast<double>(p.count(2.0, INFINITY)));
    }
    const double ma = oracle::mean(a), mb = oracle::mean(b);
    for (std::size_t i = 0; i < a.size(); ++i) prod.push_back((a[i] - ma) * (b[i] - mb));
    CHECK(oracle::within_3se(oracle::mean(prod), 0.0, oracle::se(prod)));
  }
}

TEST_CASE("cluster sampling") {
  const auto nu = RadonIntensity::power_tail(0.5);
  SUBCASE("single-point clusters give the Poisson process") {
    const ClusterModel model{nu, ClusterLaw::single_point()};
    const auto c = counts_above([&](Stream& s) { return cluster_sample(model, 1.0, s); }, 1.0, 50000, Seed(4));
    const auto p = counts_above([&](Stream& s) { return poisson_sample(nu, 1.0, s); }, 1.0, 50000, Seed(5));
    const double joint = std::hypot(oracle::se(c), oracle::se(p));
    CHECK(oracle::within_3se(oracle::mean(c), oracle::mean(p), joint));
    const double joint_var = std::hypot(oracle::variance_se(c), oracle::variance_se(p));
    CHECK(oracle::within_3se(oracle::variance(c), oracle::variance(p), joint_var));
  }
  SUBCASE("two-point clusters double the dispersion") {
    const ClusterModel model{nu, ClusterLaw(ClusterLaw::Deterministic{{1.0, 1.0}})};
    const auto c = counts_above([&](Stream& s) { return cluster_sample(model, 1.0, s); }, 1.0, 50000, Seed(6));
    for (double x : c) CHECK(static_cast<long>(x) % 2 == 0);
    // Mean 2 nu(1, inf) = 2, variance 4 nu(1, inf) = 4.
    CHECK(oracle::within_3se(oracle::mean(c), 2.0, oracle::se(c)));
    CHECK(oracle::within_3se(oracle::variance(c), 4.0, oracle::variance_se(c)));
  }
  SUBCASE("empty clusters") {
    const ClusterModel model{nu, ClusterLaw::empty()};
    Stream s(Seed(7));
    for (int i = 0; i < 100; ++i) CHECK(cluster_sample(model, 0.1, s).size() == 0);
  }
  SUBCASE("cluster points above one are refused") {
    const ClusterModel model{nu, ClusterLaw(ClusterLaw::Deterministic{{1.5}})};
    Stream s(Seed(8));
    auto many = [&] {
      for (int i = 0; i < 100; ++i) cluster_sample(model, 0.01, s);
    };
    CHECK_THROWS_AS(many(), DomainError);
  }
}

TEST_CASE("summed clusters") {
  const auto nu = RadonIntensity::power_tail(0.5);
  SUBCASE("unit marks keep the centers") {
    const ClusterModel model{nu, ClusterLaw::single_point(1.0)};
    Stream s(Seed(9));
    const auto real = cluster_realization(model, 0.5, s);
    CHECK(sum_points(real).sums == real.centers);
  }
  SUBCASE("point-mass marks scale the tail by E W^alpha") {
    const ProductModel model{nu, MarkDistribution(MarkDistribution::PointMass{2.0})};
    for (double x : {1.0, 4.0, 16.0}) {
      std::vector<double> c;
      for (std::uint64_t r = 0; r < 20000; ++r) {
        Stream s(Seed(10).derive(r));
        c.push_back(static_cast<double>(product_sums(model, 1.0, s).configuration(1.0).count(x, INFINITY)));
      }
      const double target = std::sqrt(2.0) * std::pow(x, -0.5);
      CHECK(oracle::within_3se(oracle::mean(c), target, oracle::se(c)));
      CHECK(oracle::within_3se(oracle::variance(c), target, oracle::variance_se(c)));
    }
  }
  SUBCASE("geometric clusters sum to 1 / (1 - theta) times the center") {
    const ClusterModel model{nu, ClusterLaw(ClusterLaw::GeometricWeights{0.5})};
    Stream s(Seed(11));
    const auto real = cluster_realization(model, 0.5, s);
    const auto sums = sum_points(real).sums;
    REQUIRE(sums.size() == real.centers.size());
    for (std::size_t i = 0; i < sums.size(); ++i) CHECK(sums[i] == doctest::Approx(2.0 * real.centers[i]).epsilon(1e-7));
  }
}

TEST_CASE("Laplace functional by simulation") {
  const auto nu = RadonIntensity::power_tail(0.5);
  const ProcessSampler poisson = [&](Stream& s) { return poisson_sample(nu, 0.5, s); };
  SUBCASE("zero function") {
    const auto e = laplace_mc(poisson, TestFunction::zero(), 1000, Seed(1));
    CHECK(e.value == 1.0);
    CHECK(e.se == 0.0);
  }
  SUBCASE("indicator above one") {
    const auto e = laplace_mc(poisson, TestFunction::indicator(1.0, INFINITY, 1.0), 50000, Seed(2));
    const double exact = std::exp(-(1.0 - std::exp(-1.0)));
    CHECK(exact == doctest::Approx(0.53146).epsilon(1e-5));
    CHECK(oracle::within_3se(e.value, exact, e.se));
  }
  SUBCASE("superposition multiplies Laplace functionals") {
    const auto half = nu.scaled(0.5);
    const ProcessSampler part = [&](Stream& s) { return poisson_sample(half, 0.5, s); };
    const ProcessSampler both = [&](Stream& s) {
      const std::vector<PointConfiguration> parts{poisson_sample(half, 0.5, s), poisson_sample(half, 0.5, s)};
      return PointConfiguration::superpose(parts);
    };
    const auto f = TestFunction::hat(0.5, 2.0, 1.0);
    const auto a = laplace_mc(part, f, 40000, Seed(3));
    const auto b = laplace_mc(part, f, 40000, Seed(4));
    const auto ab = laplace_mc(both, f, 40000, Seed(5));
    const double product_se = std::hypot(a.value * b.se, b.value * a.se);
    CHECK(oracle::within_3se(ab.value, a.value * b.value, std::hypot(ab.se, product_se)));
    CHECK(oracle::within_3se(ab.value, laplace_analytic(nu, f), ab.se));
  }
}

TEST_CASE("Laplace functional in closed form") {
  const auto nu = RadonIntensity::power_tail(0.5);
  const auto ind = TestFunction::indicator(1.0, INFINITY, 1.0);
  CHECK(laplace_analytic(ProductModel{nu, MarkDistribution(MarkDistribution::PointMass{2.0})}, TestFunction::zero()) ==
        1.0);
  const double pm2 = laplace_analytic(ProductModel{nu, MarkDistribution(MarkDistribution::PointMass{2.0})}, ind);
  CHECK(pm2 == doctest::Approx(std::exp(-(1.0 - std::exp(-1.0)) * std::sqrt(2.0))).epsilon(1e-9));
  CHECK(pm2 == doctest::Approx(0.40905).epsilon(1e-4));
  for (const auto& f : standard_test_bank()) {
    const double unit = laplace_analytic(ProductModel{nu, MarkDistribution(MarkDistribution::PointMass{1.0})}, f);
    CHECK(unit == doctest::Approx(laplace_analytic(nu, f)).epsilon(1e-10));
    // Independent oracle: Simpson in log space over the support.
    const double hi = std::isfinite(f.hi) ? f.hi : 1e12;
    const double integral = oracle::simpson_log(
        [&](double y) { return (1.0 - std::exp(-f(y))) * 0.5 * std::pow(y, -1.5); }, f.lo, hi, 400000);
    CHECK(laplace_analytic(nu, f) == doctest::Approx(std::exp(-integral)).epsilon(2e-5));
  }
  // Log-normal marks: E over W outside, Simpson in z and y.
  const ProductModel ln{RadonIntensity::power_tail(0.7), MarkDistribution(MarkDistribution::LogNormal{0.0, 0.5})};
  const auto hat = TestFunction::hat(1.0, 4.0, 2.0);
  const double outer = oracle::simpson(
      [&](double z) {
        const double w = std::exp(0.5 * z);
        const double inner = oracle::simpson(
            [&](double y) { return (1.0 - std::exp(-hat(w * y))) * 0.7 * std::pow(y, -1.7); }, 1.0 / w, 4.0 / w, 4000);
        return inner * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
      },
      -9.0, 9.0, 2000);
  CHECK(laplace_analytic(ln, hat) == doctest::Approx(std::exp(-outer)).epsilon(1e-6));
}

TEST_CASE("cluster models match their Laplace functional on the bank") {
  const ClusterModel model{RadonIntensity::power_tail(0.7), ClusterLaw(ClusterLaw::GeometricWeights{0.5})};
  const auto bank = standard_test_bank();
  const ProcessSampler sampler = [&](Stream& s) { return cluster_sample(model, 0.5, s); };
  const auto mc = laplace_mc(sampler, bank, 40000, Seed(31));
  for (std::size_t i = 0; i < bank.size(); ++i) {
    CAPTURE(bank[i].name);
    CHECK(oracle::within_3se(mc[i].value, laplace_analytic(model, bank[i]), mc[i].se));
  }

  // k independent copies with intensity nu / k superpose to one copy with nu.
  const ClusterModel third{model.intensity.scaled(1.0 / 3.0), model.clusters};
  const ProcessSampler split = [&](Stream& s) {
    std::vector<PointConfiguration> parts;
    for (int k = 0; k < 3; ++k) parts.push_back(cluster_sample(third, 0.5, s));
    return PointConfiguration::superpose(parts);
  };
  const auto merged = laplace_mc(split, bank, 40000, Seed(32));
  for (std::size_t i = 0; i < bank.size(); ++i) {
    CAPTURE(bank[i].name);
    CHECK(oracle::within_3se(merged[i].value, mc[i].value, std::hypot(merged[i].se, mc[i].se)));
  }
}

TEST_CASE("test bank fixture matches the built-in bank") {
  const auto fixture = load_test_bank(IDPOINT_DATA_DIR "/test_bank_v1.csv");
  const auto bank = standard_test_bank();
  REQUIRE(fixture.size() == bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    CHECK(fixture[i].name == bank[i].name);
    CHECK(fixture[i].shape == bank[i].shape);
    CHECK(fixture[i].lo == bank[i].lo);
    CHECK(fixture[i].hi == bank[i].hi);
    CHECK(fixture[i].height == bank[i].height);
    CHECK(fixture[i].edge == bank[i].edge);
  }
}

TEST_CASE("test functions") {
  const auto f = TestFunction::indicator(1.0, 3.0, 2.0, 0.5);
  CHECK(f(0.9) == 0.0);
  CHECK(f(1.25) == doctest::Approx(1.0));
  CHECK(f(2.0) == 2.0);
  CHECK(f.lipschitz() == doctest::Approx(4.0));
  const auto h = TestFunction::hat(1.0, 3.0, 1.0);
  CHECK(h(2.0) == 1.0);
  CHECK(h(1.5) == doctest::Approx(0.5));
  // Lipschitz bound holds on a grid.
  for (const auto& g : standard_test_bank()) {
    if (!std::isfinite(g.lipschitz())) continue;
    for (double x = 0.1; x < 12.0; x += 0.01) CHECK(std::abs(g(x + 0.01) - g(x)) <= g.lipschitz() * 0.01 + 1e-12);
  }
}
