#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "idpoint/diagnostics.hpp"
#include "idpoint/errors.hpp"
#include "idpoint/report.hpp"
#include "idpoint/statistics.hpp"

using namespace idpoint;

namespace {

const ArrayModel kIidHalf(ArrayModel::IidHeavyTail{0.5});
const TestFunction kAboveOne = TestFunction::indicator(1.0, INFINITY, 1.0);

Budget budget(std::size_t replicates, std::uint64_t seed) { return Budget{replicates, Seed(seed), 0}; }

bool near(const ReportEntry& e, double target) { return oracle::within_3se(e.estimate, target, e.se); }

}  // namespace

TEST_CASE("negligibility") {
  constexpr std::size_t n = 10000;
  const auto a = estimate_an(kIidHalf, n, 1.0, INFINITY, budget(4000, 1));
  CHECK(near(a, 1.0));
  const auto b = estimate_an(kIidHalf, n, 4.0, INFINITY, budget(4000, 2));
  CHECK(near(b, 0.5));
  const auto far = estimate_an(kIidHalf, n, 1e30, INFINITY, budget(200, 3));
  CHECK(far.estimate == 0.0);
}

TEST_CASE("truncated first moment") {
  constexpr std::size_t n = 10000;
  const IidParetoOracle oracle{0.5, n};
  CHECK(oracle.an_prime(0.25) == doctest::Approx(0.4999).epsilon(1e-12));
  const auto e = estimate_an_prime(kIidHalf, n, 0.25, budget(4000, 4));
  CHECK(near(e, 0.5));
  CHECK(near(e, oracle.an_prime(0.25)));
  // Entries are at least 1 / a_n = 1e-8.
  CHECK(estimate_an_prime(kIidHalf, n, 1e-9, budget(200, 5)).estimate == 0.0);
  // Same rows: the truncated sum grows with eps replicate by replicate.
  double prev = 0.0;
  for (double eps : {0.01, 0.05, 0.25, 1.0}) {
    const double v = estimate_an_prime(kIidHalf, n, eps, budget(500, 6)).estimate;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("lagged cross moments") {
  SUBCASE("i.i.d. rows") {
    const auto e = estimate_ad2(kIidHalf, 10000, 100, 1, kAboveOne, budget(10000, 7));
    CHECK(near(e, 0.0099));
    CHECK(near(e, IidParetoOracle{0.5, 10000}.ad2(kAboveOne, 100, 1)));
    CHECK(e.extra.at("indicator") == e.estimate);
  }
  SUBCASE("empty lag range") {
    const auto e = estimate_ad2(kIidHalf, 1000, 10, 10, kAboveOne, budget(10, 8));
    CHECK(e.estimate == 0.0);
    CHECK_FALSE(e.warning.empty());
  }
  SUBCASE("2-dependent rows decay with n") {
    const ArrayModel ms(ArrayModel::MDependentMovingSum{0.8, 2});
    std::vector<ReportEntry> trend;
    for (std::size_t n : {1000, 10000}) {
      const auto b = block_scheme(n, MixingProfile::zero());
      trend.push_back(estimate_ad2(ms, n, b.r, 2, kAboveOne, budget(4000, 9)));
    }
    CHECK(trend[1].estimate < trend[0].estimate);
  }
}

TEST_CASE("block factorization gap") {
  constexpr std::size_t n = 10000;
  const IidParetoOracle oracle{0.5, n};
  const auto f = TestFunction::indicator(1.0, INFINITY, 1.0);
  const auto e = estimate_ad1_gap(kIidHalf, n, 3000, f, budget(4000, 10));
  CHECK(near(e, oracle.ad1_gap(f, 3000)));
  CHECK(e.extra.at("remainder_ok") == 1.0);
  const auto whole = estimate_ad1_gap(kIidHalf, n, n, f, budget(1000, 11));
  CHECK(std::abs(whole.estimate) <= 3.0 * whole.se + 1e-15);
}

TEST_CASE("Kallenberg sum") {
  constexpr std::size_t n = 10000;
  const IidParetoOracle oracle{0.5, n};
  const auto f = TestFunction::indicator(1.0, INFINITY, 2.0);
  // Ten blocks of 1000, each exceeding 1 with probability 1e-4 per entry.
  CHECK(oracle.kallenberg(f, 1000) ==
        doctest::Approx(10.0 * -std::expm1(1000.0 * std::log1p(-1e-4 * -std::expm1(-2.0)))).epsilon(1e-12));
  CHECK(oracle.kallenberg(f, 1000) == doctest::Approx(0.8283).epsilon(1e-4));
  CHECK(oracle.kallenberg(f, 1) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-4));
  const auto e = estimate_kallenberg(kIidHalf, n, 1000, f, budget(4000, 12));
  CHECK(near(e, oracle.kallenberg(f, 1000)));
  CHECK(estimate_kallenberg(kIidHalf, n, 1000, TestFunction::zero(), budget(100, 13)).estimate == 0.0);
  const auto doubled = estimate_kallenberg(kIidHalf, n, 2000, f, budget(4000, 14));
  CHECK(oracle::within_3se(doubled.estimate, e.estimate, std::hypot(doubled.se, e.se)));
}

TEST_CASE("incremental gap") {
  constexpr std::size_t n = 10000;
  const IidParetoOracle oracle{0.5, n};
  const auto e = estimate_incremental_gap(kIidHalf, n, 1, kAboveOne, budget(4000, 15));
  CHECK(near(e, oracle.exceedance(kAboveOne)));
  CHECK(oracle.incremental_gap(kAboveOne, 1) == oracle.exceedance(kAboveOne));
  CHECK(estimate_incremental_gap(kIidHalf, n, 3, TestFunction::zero(), budget(100, 16)).estimate == 0.0);

  const ArrayModel ms(ArrayModel::MDependentMovingSum{0.8, 2});
  const auto g3 = estimate_incremental_gap(ms, 1000, 3, kAboveOne, budget(4000, 17), Pairing::Independent);
  const auto g4 = estimate_incremental_gap(ms, 1000, 4, kAboveOne, budget(4000, 18), Pairing::Independent);
  CHECK(oracle::within_3se(g3.estimate, g4.estimate, std::hypot(g3.se, g4.se)));
}

TEST_CASE("clamped covariances") {
  const ClampedIdentity g{1.0, 10.0};
  SUBCASE("independent rows") {
    const ArrayModel indep(ArrayModel::AssociatedGaussian{0.8, 0.0});
    CHECK(near(estimate_ad3(indep, 1000, 1, g, budget(2000, 19)), 0.0));
  }
  SUBCASE("positive correlation decays with the gap") {
    const ArrayModel assoc(ArrayModel::AssociatedGaussian{0.8, 0.5});
    ReportEntry prev = estimate_ad3(assoc, 1000, 1, g, budget(2000, 20));
    CHECK(prev.estimate > 0.0);
    for (std::size_t m : {2, 4, 8}) {
      const auto next = estimate_ad3(assoc, 1000, m, g, budget(2000, 20));
      CHECK(next.estimate <= prev.estimate + 2.0 * std::hypot(next.se, prev.se));
      prev = next;
    }
  }
  SUBCASE("empty sum") {
    const ArrayModel assoc(ArrayModel::AssociatedGaussian{0.8, 0.5});
    CHECK(estimate_ad3(assoc, 500, 500, g, budget(10, 21)).estimate == 0.0);
  }
}

TEST_CASE("i.i.d. oracle against quadrature") {
  const IidParetoOracle o{0.5, 10000};
  const auto hat = TestFunction::hat(1.0, 4.0, 2.0);
  // n int f(z / a_n) alpha z^-alpha-1 dz = int f(x) alpha x^-alpha-1 dx with a_n^alpha = n.
  const double mean = oracle::simpson([&](double x) { return hat(x) * 0.5 * std::pow(x, -1.5); }, 1.0, 4.0);
  CHECK(o.mean_f(hat) == doctest::Approx(mean).epsilon(1e-9));
  const double exc =
      oracle::simpson([&](double x) { return (1 - std::exp(-hat(x))) * 0.5 * std::pow(x, -1.5); }, 1.0, 4.0);
  CHECK(o.exceedance(hat) == doctest::Approx(exc).epsilon(1e-9));
  CHECK(o.an(1.0, INFINITY) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.an(4.0, INFINITY) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("block scheme") {
  SUBCASE("worked row") {
    const auto b = block_scheme(10000, MixingProfile::harmonic());
    CHECK(b.rho == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(b.epsilon == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.delta == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.eta == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(b.r == 1000);
    CHECK(b.k == 10);
    CHECK(b.m == 100);
    CHECK(b.k_alpha_m == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.bounds_hold);
  }
  SUBCASE("no mixing") {
    const auto b = block_scheme(10000, MixingProfile::zero());
    CHECK(b.epsilon == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.r == 1000);
    CHECK(b.k == 10);
    CHECK(b.m == 100);
    CHECK(b.k_alpha_m == 0.0);
  }
  SUBCASE("trends") {
    BlockScheme prev = block_scheme(1000, MixingProfile::harmonic());
    for (std::size_t n : {10000ul, 100000ul, 1000000ul, 10000000ul, 100000000ul}) {
      const auto b = block_scheme(n, MixingProfile::harmonic());
      CAPTURE(n);
      CHECK(b.r > prev.r);
      CHECK(b.k > prev.k);
      CHECK(static_cast<double>(b.m) / b.r < static_cast<double>(prev.m) / prev.r);
      CHECK(b.k_alpha_m < prev.k_alpha_m);
      prev = b;
    }
  }
  SUBCASE("divisor blocks tile the row") {
    for (std::size_t n : {1000ul, 10000ul, 100000ul, 99991ul}) {
      const auto b = divisor_blocks(n, MixingProfile::zero());
      CHECK(b.r * b.k == n);
      CHECK(b.k <= stable_floor(1.0 / b.epsilon));
    }
  }
  CHECK(stable_floor(0.1 * 10000) == 1000);
  CHECK(stable_floor(2.9999999999999996) == 3);
  CHECK(integer_sqrt(99) == 9);
  CHECK(integer_sqrt(100) == 10);
}

TEST_CASE("two-sample KS") {
  std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  std::vector<double> lo(100), hi(100);
  for (int i = 0; i < 100; ++i) {
    lo[i] = i;
    hi[i] = 1000 + i;
  }
  CHECK(ks_two_sample(lo, hi).statistic == 1.0);
  CHECK(ks_two_sample(lo, hi).reject);

  // Calibration: same-law samples are rejected at about the nominal rate.
  std::mt19937_64 gen(42);
  std::gamma_distribution<double> gamma(2.0, 1.0);
  int rejections = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = gamma(gen);
    for (auto& v : y) v = gamma(gen);
    rejections += ks_two_sample(x, y, 0.01).reject;
  }
  // Binomial(200, 0.01): P(X > 8) < 1e-4.
  CHECK(rejections <= 8);
}

TEST_CASE("Poisson check") {
  Stream s(Seed(3));
  std::vector<std::uint64_t> poisson(10000), constant(10000, 3), doubled(10000);
  for (auto& c : poisson) c = s.poisson(3.0);
  for (auto& c : doubled) c = 2 * s.poisson(1.5);
  const auto p = poissonity_check(poisson);
  CHECK(p.pass);
  CHECK(p.dispersion == doctest::Approx(1.0).epsilon(0.05));
  const auto c = poissonity_check(constant);
  CHECK_FALSE(c.pass);
  CHECK(c.dispersion == doctest::Approx(0.0));
  const auto d = poissonity_check(doubled);
  CHECK_FALSE(d.pass);
  CHECK(d.dispersion == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Hill estimator") {
  Stream s(Seed(4));
  std::vector<double> half(100000), three_halves(100000);
  for (auto& v : half) v = s.pareto(0.5);
  for (auto& v : three_halves) v = s.pareto(1.5);
  CHECK(std::abs(hill_tail_index(half, 0.01) - 0.5) < 0.05);
  CHECK(std::abs(hill_tail_index(three_halves, 0.01) - 1.5) < 0.15);
  const std::vector<double> flat(1000, 2.0);
  CHECK_THROWS_AS(hill_tail_index(flat, 0.01), DomainError);
}

TEST_CASE("reports") {
  ReportEntry e;
  e.name = "x";
  e.estimate = 1.05;
  e.se = 0.01;
  CHECK(e.verdict == "trend-only");
  CHECK(e.against(1.0, "exact").verdict == "fail");
  CHECK(e.against(1.0, "exact", 0.03).verdict == "pass");

  const auto bank = standard_test_bank();
  const auto r = over_bank("toy", bank, [](const TestFunction& f) {
    ReportEntry x;
    x.estimate = f.height;
    x.se = 0.0;
    return x.against(1.0, "unit");
  });
  REQUIRE(r.entries.size() == bank.size() + 1);
  CHECK(r.entries.back().name == "toy/worst");
  CHECK(r.entries.back().estimate == 2.0);
  CHECK(r.entries.back().verdict == "fail");
  CHECK_FALSE(r.all_passed());

  ReportEntry missing;
  missing.name = "nan";
  missing.estimate = NAN;
  const auto j = to_json(missing);
  CHECK(j["estimate"].is_null());
  CHECK(j["target"].is_null());
}

TEST_CASE("batch means") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 10);
  const auto m = batch_mean(v);
  CHECK(m.mean == doctest::Approx(4.5));
  CHECK(m.n == 1000);
  CHECK(m.se == doctest::Approx(0.0).epsilon(1e-12));
}
