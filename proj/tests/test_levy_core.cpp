#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "doctest.h"
#include "oracles.hpp"

#include "idpoint/errors.hpp"
#include "idpoint/levy_measure.hpp"
#include "idpoint/quadrature.hpp"
#include "idpoint/tabulated_tail.hpp"

using namespace idpoint;

namespace {

// Finite measure with mass `mass` spread over (1, 2].
LevyMeasure finite_on_one_two(double mass) {
  return LevyMeasure::tabulated(TabulatedTail({1.0, 1.5, 2.0}, {mass, 0.5 * mass, 0.0}));
}

}  // namespace

TEST_CASE("stable tail is a power law") {
  const auto s = LevyMeasure::stable(0.5, 1.0);
  CHECK(s.tail(4.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tail(s, 0.25) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("product convolution tail matches double quadrature") {
  const auto p = LevyMeasure::product_convolution(RadonIntensity::power_tail(0.5),
                                                  MarkDistribution(MarkDistribution::PointMass{2.0}));
  // rho(1, inf) = int 1{2y > 1} 0.5 y^-1.5 dy, integrated in log space.
  const double oracle = oracle::simpson_log([](double y) { return 0.5 * std::pow(y, -1.5); }, 0.5, 1e12, 200000);
  CHECK(p.tail(1.0) == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(p.tail(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const auto ln = LevyMeasure::product_convolution(RadonIntensity::power_tail(0.7),
                                                   MarkDistribution(MarkDistribution::LogNormal{0.0, 0.5}));
  // E[W^0.7] = exp(0.7^2 * 0.25 / 2).
  CHECK(ln.tail(2.0) == doctest::Approx(std::exp(0.49 * 0.125) * std::pow(2.0, -0.7)).epsilon(1e-8));
}

TEST_CASE("gamma tail equals alpha E1") {
  const auto g = LevyMeasure::gamma(2.0);
  const double oracle = 2.0 * oracle::simpson_log([](double t) { return std::exp(-t) / t; }, 1.0, 60.0);
  CHECK(g.tail(1.0) == doctest::Approx(0.438768).epsilon(1e-5));
  CHECK(g.tail(1.0) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(g.tail(800.0) == 0.0);
}

TEST_CASE("tail inverse") {
  SUBCASE("stable is analytic") {
    CHECK(LevyMeasure::stable(0.5, 1.0).tail_inverse(4.0) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(std::isinf(LevyMeasure::stable(0.5, 1.0).tail_inverse(0.0)));
  }
  SUBCASE("gamma round trip") {
    const auto g = LevyMeasure::gamma(1.0);
    CHECK(g.tail_inverse(g.tail(1.0)) == doctest::Approx(1.0).epsilon(1e-9));
    for (double y : {1e-3, 0.01, 0.1, 1.0, 2.0, 5.0, 10.0, 30.0}) {
      const double x = g.tail_inverse(y);
      CHECK(boost::math::expint(1, x) == doctest::Approx(y).epsilon(1e-8));
      // The hint narrows the search but must not change the answer.
      CHECK(g.tail_inverse(y, x * 3.0) == doctest::Approx(x).epsilon(1e-9));
    }
  }
  SUBCASE("beyond the total mass of a finite measure") {
    const auto f = finite_on_one_two(1.0);
    CHECK(f.tail_inverse(1e300) == 0.0);
    CHECK(f.tail_inverse(1.0) == 0.0);
  }
  SUBCASE("negative level is a domain error") { CHECK_THROWS_AS(LevyMeasure::gamma(1.0).tail_inverse(-1.0), DomainError); }
}

TEST_CASE("small-jump mean") {
  CHECK(small_jump_mean(LevyMeasure::stable(0.5, 1.0)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::isinf(small_jump_mean(LevyMeasure::stable(1.2, 1.0))));
  CHECK(small_jump_mean(LevyMeasure::gamma(3.0)) == doctest::Approx(3.0 * (1.0 - std::exp(-1.0))).epsilon(1e-8));
  CHECK(small_jump_mean(LevyMeasure::gamma(3.0)) == doctest::Approx(1.8964).epsilon(1e-4));
}

TEST_CASE("Levy validity") {
  const auto a = validate_levy(LevyMeasure::stable(0.7, 1.0));
  CHECK(a.is_levy);
  CHECK(a.small_jump_finite);
  const auto b = validate_levy(LevyMeasure::stable(1.5, 1.0));
  CHECK(b.is_levy);
  CHECK_FALSE(b.small_jump_finite);

  // nu(dy) = 2.5 y^-3.5 dy with unit marks: int x^2 rho(dx) diverges at the origin.
  const auto c = validate_levy(LevyMeasure::product_convolution(RadonIntensity::power_tail(2.5),
                                                                MarkDistribution(MarkDistribution::PointMass{1.0})));
  CHECK_FALSE(c.is_levy);
  CHECK(c.levy_integral.divergent);

  // A table holds H constant below its first node, so no mass sits near 0.
  std::vector<double> xs, hs;
  for (double x = 1e-3; x < 10.0; x *= 1.25) {
    xs.push_back(x);
    hs.push_back(std::pow(x, -3.0) - 1e-3);
  }
  xs.push_back(10.0);
  hs.push_back(0.0);
  CHECK(validate_levy(LevyMeasure::tabulated(TabulatedTail(xs, hs))).is_levy);
}

TEST_CASE("centering constants") {
  SUBCASE("stable sum approaches the closed integral") {
    const auto s = LevyMeasure::stable(0.5, 1.0);
    const double oracle = oracle::simpson_log([](double x) { return x / (1 + x * x) * 0.5 * std::pow(x, -1.5); },
                                              1e-14, 1e14, 400000);
    CHECK(oracle == doctest::Approx(std::numbers::pi / std::sqrt(2.0) / 2.0).epsilon(1e-6));
    CHECK(centering_total(s).value == doctest::Approx(1.1107).epsilon(1e-4));
    CHECK(centering_total(s).value == doctest::Approx(oracle).epsilon(1e-7));
    const auto c = centering_constants(s, 20000);
    const double partial = std::accumulate(c.begin(), c.end(), 0.0);
    // The tail of the series beyond i is about int_0^{i^-2} 0.5 x^-0.5 dx = 1 / i.
    CHECK(partial == doctest::Approx(oracle - 1.0 / 20000.0).epsilon(1e-5));
  }
  SUBCASE("finite measure has no constants past its mass") {
    const auto c = centering_constants(finite_on_one_two(2.5), 10);
    REQUIRE(c.size() == 10);
    for (std::size_t i = 3; i < 10; ++i) CHECK(c[i] == 0.0);
    CHECK(c[0] > 0.0);
  }
  SUBCASE("gamma partial sum") {
    const auto g = LevyMeasure::gamma(1.0);
    const double oracle =
        oracle::simpson_log([](double x) { return std::exp(-x) / (1 + x * x); }, 1e-16, 60.0, 400000);
    CHECK(oracle == doctest::Approx(0.62145).epsilon(1e-4));
    const auto c = centering_constants(g, 50);
    // Points below H^-1(50) ~ e^-50 carry negligible mass.
    CHECK(std::accumulate(c.begin(), c.end(), 0.0) == doctest::Approx(oracle).epsilon(1e-7));
  }
}

TEST_CASE("tabulated tail") {
  const TabulatedTail t({1.0, 2.0, 4.0}, {4.0, 1.0, 0.0});
  CHECK(t(0.5) == 4.0);
  CHECK(t(2.0) == doctest::Approx(1.0));
  // log-log interpolation between (1, 4) and (2, 1) is 4 x^-2.
  CHECK(t(std::sqrt(2.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t(5.0) == 0.0);
  CHECK(t.inverse(2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(t.inverse(4.0) == 0.0);
  CHECK_THROWS_AS(TabulatedTail({1.0, 2.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("quadrature") {
  const Integral a = integrate([](double x) { return std::exp(-x); }, 0.0, std::numeric_limits<double>::infinity());
  CHECK(a.converged);
  CHECK(a.value == doctest::Approx(1.0).epsilon(1e-10));
  const Integral b = integrate([](double x) { return 1.0 / x; }, 1.0, std::numeric_limits<double>::infinity());
  CHECK(b.divergent);
  const std::vector<double> kink{0.3};
  const Integral c = integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, kink);
  CHECK(c.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-8));
  const Integral d =
      integrate_oscillatory([](double x) { return 1.0 / x; }, 1.0, 1.0, Oscillator::Sin);
  // Si(inf) - Si(1) = pi/2 - 0.946083070367183.
  CHECK(d.value == doctest::Approx(std::numbers::pi / 2 - 0.946083070367183).epsilon(1e-7));
}
