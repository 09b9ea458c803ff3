#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idpoint/arrays.hpp"
#include "idpoint/random.hpp"
#include "idpoint/test_function.hpp"

namespace idpoint {

/// One named estimate with its Monte Carlo error and, when known, a target.
struct ReportEntry {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t replicates = 0;
  std::optional<double> target;
  std::string target_provenance;
  double tolerance = 0.0;
  /// "pass", "fail" or "trend-only".
  std::string verdict = "trend-only";
  std::string warning;
  /// Auxiliary named values (indicator variants, bounds, grid points).
  std::map<std::string, double> extra;

  /// Sets target and recomputes the verdict as |estimate - target| <= 3 se + tolerance.
  ReportEntry& against(double value, std::string provenance, double tol = 0.0);
  bool passed() const { return verdict == "pass"; }
};

struct DiagnosticReport {
  std::string name;
  std::vector<ReportEntry> entries;
  /// Free-form string metadata (model description, bank version).
  std::map<std::string, std::string> meta;

  void add(ReportEntry entry) { entries.push_back(std::move(entry)); }
  const ReportEntry& at(const std::string& entry_name) const;
  /// Entries ordered by name.
  void sort();
  bool all_passed() const;
};

/// Replicate budget shared by all estimators. Row r uses seed.derive(r).
struct Budget {
  std::size_t replicates = 100000;
  Seed seed{0};
  unsigned threads = 0;
};

/// n P(X_{1,n} in (lo, hi]), averaged over all positions of each row.
ReportEntry estimate_an(const ArrayModel& model, std::size_t n, double lo, double hi, const Budget& budget);

/// n E[X_{1,n} 1{X_{1,n} <= eps}].
ReportEntry estimate_an_prime(const ArrayModel& model, std::size_t n, double epsilon, const Budget& budget);

/// n sum_{j=m+1}^{r} E[f(X_1) f(X_j)]; extra["indicator"] holds the same sum
/// for 1{|X_1| >= eta} 1{|X_j| >= eta} (eta defaults to the lower edge of f).
ReportEntry estimate_ad2(const ArrayModel& model, std::size_t n, std::size_t r, std::size_t m, const TestFunction& f,
                         const Budget& budget, std::optional<double> eta = std::nullopt);

/// E exp(-sum_{j<=n} f) - (E exp(-sum_{j<=r} f))^k with k = floor(n / r).
/// The estimate is the signed difference; extra["abs"] is its modulus and
/// extra["remainder_gap"] / extra["remainder_bound"] check
/// |L_n - L_{rk}| <= (n - rk) E f(X_1).
ReportEntry estimate_ad1_gap(const ArrayModel& model, std::size_t n, std::size_t r, const TestFunction& f,
                             const Budget& budget);

/// k (1 - E exp(-sum_{j<=r} f)) with k = floor(n / r).
ReportEntry estimate_kallenberg(const ArrayModel& model, std::size_t n, std::size_t r, const TestFunction& f,
                                const Budget& budget);

enum class Pairing { CommonRandomNumbers, Independent };

/// n (L_{m-1,n}(f) - L_{m,n}(f)) with L_{m,n}(f) = E exp(-sum_{j<=m} f(X_j)).
ReportEntry estimate_incremental_gap(const ArrayModel& model, std::size_t n, std::size_t m, const TestFunction& f,
                                     const Budget& budget, Pairing pairing = Pairing::CommonRandomNumbers);

/// Clamped identity g(x) = min(max(x, a), b).
struct ClampedIdentity {
  double a = 1.0;
  double b = 10.0;
  double operator()(double x) const { return x < a ? a : (x > b ? b : x); }
};

/// n sum_{j=m+1}^{n} Cov(g(X_1), g(X_j)).
ReportEntry estimate_ad3(const ArrayModel& model, std::size_t n, std::size_t m, const ClampedIdentity& g,
                         const Budget& budget);

/// Runs `estimator` over every test function and appends a worst-case entry
/// (largest |estimate - target|, or largest |estimate| without targets).
DiagnosticReport over_bank(const std::string& name, std::span<const TestFunction> bank,
                           const std::function<ReportEntry(const TestFunction&)>& estimator);

/// Exact finite-n values of the estimated quantities for i.i.d. rows
/// X_{j,n} = Z_j / n^(1/alpha) with P(Z > z) = z^-alpha, z >= 1. Test
/// functions must vanish below n^(-1/alpha).
struct IidParetoOracle {
  double alpha;
  std::size_t n;

  /// n P(X in (lo, hi]).
  double an(double lo, double hi) const;
  /// n E[X 1{X <= eps}], alpha < 1.
  double an_prime(double epsilon) const;
  /// n E f(X).
  double mean_f(const TestFunction& f) const;
  /// n (1 - E exp(-f(X))).
  double exceedance(const TestFunction& f) const;
  /// E exp(-f(X)).
  double laplace(const TestFunction& f) const;
  double ad2(const TestFunction& f, std::size_t r, std::size_t m) const;
  double ad1_gap(const TestFunction& f, std::size_t r) const;
  double kallenberg(const TestFunction& f, std::size_t r) const;
  double incremental_gap(const TestFunction& f, std::size_t m) const;
};

// ---------------------------------------------------------------------------
// Block construction

/// Nonincreasing mixing coefficients alpha(m) in [0, 1].
struct MixingProfile {
  std::string name;
  std::function<double(std::size_t)> alpha;

  static MixingProfile harmonic();
  static MixingProfile zero();
  static MixingProfile geometric(double q);
  static MixingProfile power(double p);
};

struct BlockScheme {
  std::size_t n = 0;
  double rho = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  std::size_t r = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  /// k alpha(m).
  double k_alpha_m = 0.0;
  /// r >= n^(3/4) / 2 and k >= 1 / (2 eps).
  bool bounds_hold = false;
};

/// rho = alpha(floor(sqrt n)), eps = max(n^-1/4, sqrt rho), delta = n^-1/2 / eps,
/// eta = rho / (2 eps), r = floor(n eps), k = floor(n / r), m = floor(sqrt n).
BlockScheme block_scheme(std::size_t n, const MixingProfile& profile);

/// Variant with k the largest divisor of n not exceeding floor(1 / eps) and
/// r = n / k, so the blocks tile the row without remainder.
BlockScheme divisor_blocks(std::size_t n, const MixingProfile& profile);

/// floor(x) robust to x landing a few ulps below an integer.
std::size_t stable_floor(double x);

std::size_t integer_sqrt(std::size_t n);

}  // namespace idpoint
