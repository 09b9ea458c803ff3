#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "oracles.hpp"

#include "idpoint/errors.hpp"
#include "idpoint/levy_measure.hpp"
#include "idpoint/series.hpp"
#include "idpoint/statistics.hpp"

using namespace idpoint;

TEST_CASE("Poisson arrivals") {
  std::vector<double> first, tenth;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    const auto g = poisson_arrivals(Seed(11).derive(r), 10);
    REQUIRE(g.size() == 10);
    CHECK(std::is_sorted(g.begin(), g.end()));
    first.push_back(g.front());
    tenth.push_back(g.back());
  }
  CHECK(oracle::within_3se(oracle::mean(first), 1.0, oracle::se(first)));
  CHECK(oracle::within_3se(oracle::variance(first), 1.0, oracle::variance_se(first)));
  CHECK(oracle::within_3se(oracle::mean(tenth), 10.0, oracle::se(tenth)));
  CHECK(poisson_arrivals(Seed(5), 50) == poisson_arrivals(Seed(5), 50));
  CHECK(poisson_arrivals(Seed(5), 50) != poisson_arrivals(Seed(6), 50));
}

TEST_CASE("series points") {
  SUBCASE("gamma total has mean alpha") {
    const auto g = LevyMeasure::gamma(1.5);
    std::vector<double> totals;
    for (std::uint64_t r = 0; r < 20000; ++r) totals.push_back(fk_points(g, Seed(3).derive(r)).total);
    CHECK(oracle::within_3se(oracle::mean(totals), 1.5, oracle::se(totals)));
  }
  SUBCASE("stable points are nonincreasing") {
    const auto s = LevyMeasure::stable(0.5, 1.0);
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto p = fk_points(s, Seed(4).derive(r));
      CHECK(std::is_sorted(p.points.rbegin(), p.points.rend()));
      CHECK(p.truncation_index == p.points.size());
      CHECK(p.truncation_bound >= 0.0);
    }
  }
  SUBCASE("finite measure gives a Poisson number of points") {
    // Mass 1 on (1, 2]; the direct oracle thins nothing, so the count is Poisson(1).
    const auto f = LevyMeasure::tabulated(TabulatedTail({1.0, 2.0}, {1.0, 0.0}));
    std::vector<double> counts;
    for (std::uint64_t r = 0; r < 50000; ++r) {
      const auto p = fk_points(f, Seed(5).derive(r));
      for (double u : p.points) CHECK_FALSE((u < 1.0 || u > 2.0));
      counts.push_back(static_cast<double>(p.points.size()));
    }
    CHECK(oracle::within_3se(oracle::mean(counts), 1.0, oracle::se(counts)));
    CHECK(oracle::within_3se(oracle::variance(counts), 1.0, oracle::variance_se(counts)));
  }
  SUBCASE("divergent small jumps are refused") {
    CHECK_THROWS_AS(fk_points(LevyMeasure::stable(1.2, 1.0), Seed(1)), PreconditionError);
  }
}

TEST_CASE("series sum of the gamma measure is gamma distributed") {
  const auto sums = fk_sums(LevyMeasure::gamma(2.0), Seed(2), 200000);
  const auto ks = ks_one_sample(sums, [](double x) { return x <= 0 ? 0.0 : boost::math::gamma_p(2.0, x); });
  CHECK(ks.statistic < 0.01);
  CHECK_FALSE(ks.reject);
}

TEST_CASE("series sum of the stable measure has the stable tail index") {
  const auto sums = fk_sums(LevyMeasure::stable(0.7, 1.0), Seed(3), 100000, Truncation{200, 1e-8});
  const double alpha = hill_tail_index(sums, 0.01);
  CHECK(alpha >= 0.6);
  CHECK(alpha <= 0.8);
}

TEST_CASE("empty measure sums to zero") {
  const auto empty = LevyMeasure::tabulated(TabulatedTail({1.0, 2.0}, {0.0, 0.0}));
  for (std::uint64_t r = 0; r < 100; ++r) CHECK(fk_sum(empty, Seed(r)) == 0.0);
}

TEST_CASE("series sum is reproducible and thread invariant") {
  const auto g = LevyMeasure::gamma(1.0);
  const auto a = fk_sums(g, Seed(9), 2000, {}, 1);
  const auto b = fk_sums(g, Seed(9), 2000, {}, 4);
  CHECK(a == b);
  CHECK(a[17] == fk_sum(g, Seed(9).derive(17)));
}

TEST_CASE("Levy paths") {
  const auto g = LevyMeasure::gamma(1.5);
  SUBCASE("uniform jump times halve the mean at t = 1/2") {
    std::vector<double> half, whole;
    for (std::uint64_t r = 0; r < 20000; ++r) {
      const LevyPath path = fk_path(g, TimeLaw::uniform(), Seed(6).derive(r));
      half.push_back(path.at(0.5));
      whole.push_back(path.terminal());
      const auto grid = path.grid(16);
      for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k].second >= grid[k - 1].second);
    }
    CHECK(oracle::within_3se(oracle::mean(half), 0.75, oracle::se(half)));
    CHECK(oracle::within_3se(oracle::mean(whole), 1.5, oracle::se(whole)));
  }
  SUBCASE("atom at one") {
    const LevyPath path = fk_path(g, TimeLaw::point(1.0), Seed(8));
    CHECK(path.at(0.999) == 0.0);
    CHECK(path.terminal() == fk_sum(g, Seed(8)));
  }
}

TEST_CASE("centered series") {
  SUBCASE("adding back the constants recovers the plain sum") {
    const auto s = LevyMeasure::stable(0.5, 1.0);
    const Truncation t{500, 1e-12};
    const auto c = centering_constants(s, t.max_terms);
    const double shift = std::accumulate(c.begin(), c.end(), 0.0);
    for (std::uint64_t r = 0; r < 50; ++r) {
      const double centered = fk_centered_sum(s, Seed(r), t);
      CHECK(centered + shift == doctest::Approx(fk_sum(s, Seed(r), t)).epsilon(1e-10));
    }
  }
  SUBCASE("alpha above one stays finite and settles as terms grow") {
    const auto s = LevyMeasure::stable(1.5, 1.0);
    const std::vector<double> probs{0.25, 0.75};
    std::vector<double> iqr;
    for (std::size_t terms : {1000, 4000}) {
      const auto v = fk_centered_sums(s, Seed(12), 4000, Truncation{terms, 1e-12});
      for (double x : v) CHECK(std::isfinite(x));
      const auto q = quantiles(v, probs);
      iqr.push_back(q[1] - q[0]);
    }
    CHECK(iqr[1] == doctest::Approx(iqr[0]).epsilon(0.05));
  }
  SUBCASE("finite measure subtracts its whole centering") {
    const auto f = LevyMeasure::tabulated(TabulatedTail({1.0, 2.0}, {2.5, 0.0}));
    const Truncation t{20, 1e-8};
    const auto c = centering_constants(f, t.max_terms);
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto p = fk_points(f, Seed(r), t);
      const double used = std::accumulate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(p.points.size()), 0.0);
      CHECK(fk_centered_sum(f, Seed(r), t) == doctest::Approx(p.total - used).epsilon(1e-12));
    }
  }
}

TEST_CASE("characteristic function") {
  const auto g = LevyMeasure::gamma(1.0);
  CHECK(id_char_function(g, 0.0) == std::complex<double>(1.0, 0.0));
  const auto phi = id_char_function(g, 1.0);
  CHECK(phi.real() == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(phi.imag() == doctest::Approx(0.5).epsilon(1e-7));

  const auto sums = fk_sums(g, Seed(21), 100000);
  for (double u : {0.5, 1.0, 2.0}) {
    std::vector<double> c, s;
    for (double x : sums) {
      c.push_back(std::cos(u * x));
      s.push_back(std::sin(u * x));
    }
    const auto exact = id_char_function(g, u);
    CHECK(oracle::within_3se(oracle::mean(c), exact.real(), oracle::se(c)));
    CHECK(oracle::within_3se(oracle::mean(s), exact.imag(), oracle::se(s)));
    // Closed form (1 - iu)^-1.
    const auto closed = 1.0 / std::complex<double>(1.0, -u);
    CHECK(exact.real() == doctest::Approx(closed.real()).epsilon(1e-7));
    CHECK(exact.imag() == doctest::Approx(closed.imag()).epsilon(1e-7));
  }
}
