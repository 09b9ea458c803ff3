#include "idpoint/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "idpoint/errors.hpp"
#include "idpoint/parallel.hpp"
#include "idpoint/quadrature.hpp"
#include "idpoint/statistics.hpp"

namespace idpoint {
namespace {

void require_budget(const Budget& budget) {
  if (budget.replicates < 2) throw DomainError("estimators need at least two replicates");
}

void require_row(std::size_t n) {
  if (n == 0) throw DomainError("row length n must be >= 1");
}

// Generates one row per replicate and collects K per-row statistics as columns.
template <std::size_t K, class Fn>
std::array<std::vector<double>, K> per_row(const ArrayModel& model, std::size_t n, std::size_t replicates, Seed seed,
                                           unsigned threads, Fn&& fn) {
  std::array<std::vector<double>, K> columns;
  for (auto& c : columns) c.resize(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Stream stream(seed.derive(r));
    const std::vector<double> row = generate_row(model, n, stream);
    const std::array<double, K> values = fn(std::span<const double>(row));
    for (std::size_t k = 0; k < K; ++k) columns[k][r] = values[k];
  });
  return columns;
}

struct Sparse {
  std::vector<std::size_t> index;
  std::vector<double> value;
};

template <class G>
Sparse nonzero(std::span<const double> row, G&& g) {
  Sparse s;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double v = g(row[i]);
    if (v != 0.0) {
      s.index.push_back(i);
      s.value.push_back(v);
    }
  }
  return s;
}

// sum over pairs p < q with lag q - p in [lo_lag, hi_lag] of v_p v_q / (n - lag).
double lagged_pair_sum(const Sparse& s, std::size_t n, std::size_t lo_lag, std::size_t hi_lag) {
  double sum = 0.0;
  for (std::size_t a = 0; a < s.index.size(); ++a) {
    for (std::size_t b = a + 1; b < s.index.size(); ++b) {
      const std::size_t lag = s.index[b] - s.index[a];
      if (lag > hi_lag) break;
      if (lag >= lo_lag) sum += s.value[a] * s.value[b] / static_cast<double>(n - lag);
    }
  }
  return sum;
}

std::vector<double> prefix_sums(std::span<const double> row, const TestFunction& f) {
  std::vector<double> prefix(row.size() + 1, 0.0);
  for (std::size_t i = 0; i < row.size(); ++i) prefix[i + 1] = prefix[i] + f(row[i]);
  return prefix;
}

// Mean over the n - w + 1 windows of length w of exp(-sum f).
double window_laplace(const std::vector<double>& prefix, std::size_t w) {
  const std::size_t n = prefix.size() - 1;
  const std::size_t windows = n - w + 1;
  double sum = 0.0;
  std::size_t untouched = 0;
  for (std::size_t i = 0; i < windows; ++i) {
    const double s = prefix[i + w] - prefix[i];
    if (s == 0.0) {
      ++untouched;
    } else {
      sum += std::exp(-s);
    }
  }
  return (sum + static_cast<double>(untouched)) / static_cast<double>(windows);
}

ReportEntry entry_from(std::string name, const MeanEstimate& m) {
  ReportEntry e;
  e.name = std::move(name);
  e.estimate = m.mean;
  e.se = m.se;
  e.replicates = m.n;
  return e;
}

double variance_of_mean(const MeanEstimate& m) { return m.se * m.se; }

}  // namespace

ReportEntry& ReportEntry::against(double value, std::string provenance, double tol) {
  target = value;
  target_provenance = std::move(provenance);
  tolerance = tol;
  verdict = std::abs(estimate - value) <= 3.0 * se + tol ? "pass" : "fail";
  return *this;
}

const ReportEntry& DiagnosticReport::at(const std::string& entry_name) const {
  for (const auto& e : entries) {
    if (e.name == entry_name) return e;
  }
  throw PreconditionError("report '" + name + "' has no entry '" + entry_name + "'");
}

void DiagnosticReport::sort() {
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
}

bool DiagnosticReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.verdict != "fail"; });
}

ReportEntry estimate_an(const ArrayModel& model, std::size_t n, double lo, double hi, const Budget& budget) {
  require_row(n);
  require_budget(budget);
  if (!(hi > lo)) throw DomainError("window (lo, hi] must be nonempty");
  const auto cols = per_row<1>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
    double count = 0.0;
    for (double x : row) count += (x > lo && x <= hi) ? 1.0 : 0.0;
    return std::array<double, 1>{count};
  });
  ReportEntry e = entry_from("an", batch_mean(cols[0]));
  e.extra["n"] = static_cast<double>(n);
  e.extra["lo"] = lo;
  e.extra["hi"] = hi;
  return e;
}

ReportEntry estimate_an_prime(const ArrayModel& model, std::size_t n, double epsilon, const Budget& budget) {
  require_row(n);
  require_budget(budget);
  if (!(epsilon > 0.0)) throw DomainError("truncation level epsilon must be positive");
  const auto cols = per_row<1>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
    double sum = 0.0;
    for (double x : row) {
      if (x < 0.0) throw PreconditionError("small-jump mean estimate needs nonnegative entries");
      if (x <= epsilon) sum += x;
    }
    return std::array<double, 1>{sum};
  });
  ReportEntry e = entry_from("an_prime", batch_mean(cols[0]));
  e.extra["n"] = static_cast<double>(n);
  e.extra["epsilon"] = epsilon;
  return e;
}

ReportEntry estimate_ad2(const ArrayModel& model, std::size_t n, std::size_t r, std::size_t m, const TestFunction& f,
                         const Budget& budget, std::optional<double> eta) {
  require_row(n);
  require_budget(budget);
  if (r > n) throw DomainError("block length r exceeds the row length");
  const double level = eta.value_or(f.lo);
  if (m >= r || f.is_zero()) {
    ReportEntry e;
    e.name = "ad2";
    e.replicates = budget.replicates;
    e.extra["indicator"] = 0.0;
    e.extra["indicator_se"] = 0.0;
    if (m >= r) e.warning = "empty lag range (m >= r): sum is 0";
    return e;
  }
  const auto cols = per_row<2>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
    const Sparse values = nonzero(row, f);
    const Sparse hits = nonzero(row, [&](double x) { return std::abs(x) >= level ? 1.0 : 0.0; });
    const double scale = static_cast<double>(n);
    return std::array<double, 2>{scale * lagged_pair_sum(values, n, m, r - 1),
                                 scale * lagged_pair_sum(hits, n, m, r - 1)};
  });
  ReportEntry e = entry_from("ad2", batch_mean(cols[0]));
  const MeanEstimate indicator = batch_mean(cols[1]);
  e.extra["indicator"] = indicator.mean;
  e.extra["indicator_se"] = indicator.se;
  e.extra["eta"] = level;
  e.extra["n"] = static_cast<double>(n);
  e.extra["r"] = static_cast<double>(r);
  e.extra["m"] = static_cast<double>(m);
  return e;
}

ReportEntry estimate_ad1_gap(const ArrayModel& model, std::size_t n, std::size_t r, const TestFunction& f,
                             const Budget& budget) {
  require_row(n);
  require_budget(budget);
  if (r == 0 || r > n) throw DomainError("block length r must lie in [1, n]");
  const std::size_t k = n / r;
  const std::size_t tiled = r * k;
  const auto cols = per_row<4>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
    const auto prefix = prefix_sums(row, f);
    return std::array<double, 4>{std::exp(-prefix[n]), window_laplace(prefix, r), std::exp(-prefix[tiled]),
                                 prefix[n] / static_cast<double>(n)};
  });
  const MeanEstimate whole = batch_mean(cols[0]);
  const MeanEstimate block = batch_mean(cols[1]);
  const double kd = static_cast<double>(k);
  const double power = std::pow(block.mean, kd);
  const double slope = kd * std::pow(block.mean, kd - 1.0);
  const double covariance = batch_mean_covariance(cols[0], cols[1]);
  const double variance =
      variance_of_mean(whole) + slope * slope * variance_of_mean(block) - 2.0 * slope * covariance;

  ReportEntry e;
  e.name = "ad1_gap";
  e.estimate = whole.mean - power;
  e.se = std::sqrt(std::max(variance, 0.0));
  e.replicates = budget.replicates;
  e.extra["abs"] = std::abs(e.estimate);
  e.extra["laplace_row"] = whole.mean;
  e.extra["laplace_block"] = block.mean;
  e.extra["n"] = static_cast<double>(n);
  e.extra["r"] = static_cast<double>(r);
  e.extra["k"] = kd;

  std::vector<double> remainder(cols[0].size());
  for (std::size_t i = 0; i < remainder.size(); ++i) remainder[i] = cols[2][i] - cols[0][i];
  const MeanEstimate rem = batch_mean(remainder);
  const MeanEstimate mean_f = batch_mean(cols[3]);
  const double bound = static_cast<double>(n - tiled) * mean_f.mean;
  e.extra["remainder_gap"] = rem.mean;
  e.extra["remainder_gap_se"] = rem.se;
  e.extra["remainder_bound"] = bound;
  e.extra["remainder_ok"] = std::abs(rem.mean) <= bound + 3.0 * (rem.se + static_cast<double>(n - tiled) * mean_f.se)
                                ? 1.0
                                : 0.0;
  if (e.extra["remainder_ok"] == 0.0) e.warning = "remainder bound (n - rk) E f(X_1) violated";
  return e;
}

ReportEntry estimate_kallenberg(const ArrayModel& model, std::size_t n, std::size_t r, const TestFunction& f,
                                const Budget& budget) {
  require_row(n);
  require_budget(budget);
  if (r == 0 || r > n) throw DomainError("block length r must lie in [1, n]");
  const double k = static_cast<double>(n / r);
  ReportEntry e;
  e.name = "kallenberg";
  e.replicates = budget.replicates;
  e.extra["n"] = static_cast<double>(n);
  e.extra["r"] = static_cast<double>(r);
  e.extra["k"] = k;
  if (f.is_zero()) return e;
  const auto cols = per_row<1>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
    return std::array<double, 1>{window_laplace(prefix_sums(row, f), r)};
  });
  const MeanEstimate block = batch_mean(cols[0]);
  e.estimate = k * (1.0 - block.mean);
  e.se = k * block.se;
  e.extra["laplace_block"] = block.mean;
  return e;
}

ReportEntry estimate_incremental_gap(const ArrayModel& model, std::size_t n, std::size_t m, const TestFunction& f,
                                     const Budget& budget, Pairing pairing) {
  require_row(n);
  require_budget(budget);
  if (m < 1 || m > n) throw DomainError("incremental gap needs 1 <= m <= n");
  ReportEntry e;
  e.name = "incremental_gap";
  e.replicates = budget.replicates;
  e.extra["n"] = static_cast<double>(n);
  e.extra["m"] = static_cast<double>(m);
  e.extra["paired"] = pairing == Pairing::CommonRandomNumbers ? 1.0 : 0.0;
  if (f.is_zero()) return e;

  const std::size_t windows = n - m + 1;
  const double scale = static_cast<double>(n) / static_cast<double>(windows);
  // Per row: n * mean over windows of (1 - exp(-sum over the first m-1)) and of
  // (1 - exp(-sum over all m)).
  auto terms = [&](std::span<const double> row) {
    const auto prefix = prefix_sums(row, f);
    double shorter = 0.0;
    double longer = 0.0;
    for (std::size_t i = 0; i < windows; ++i) {
      const double s_short = prefix[i + m - 1] - prefix[i];
      const double s_long = prefix[i + m] - prefix[i];
      if (s_short != 0.0) shorter += -std::expm1(-s_short);
      if (s_long != 0.0) longer += -std::expm1(-s_long);
    }
    return std::array<double, 2>{scale * shorter, scale * longer};
  };
  if (pairing == Pairing::CommonRandomNumbers) {
    const auto cols = per_row<1>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
      const auto t = terms(row);
      return std::array<double, 1>{t[1] - t[0]};
    });
    const MeanEstimate gap = batch_mean(cols[0]);
    e.estimate = gap.mean;
    e.se = gap.se;
  } else {
    const auto first = per_row<2>(model, n, budget.replicates, budget.seed, budget.threads, terms);
    const auto second = per_row<2>(model, n, budget.replicates, budget.seed.derive(0x756e706169726564ULL),
                                   budget.threads, terms);
    const MeanEstimate shorter = batch_mean(first[0]);
    const MeanEstimate longer = batch_mean(second[1]);
    e.estimate = longer.mean - shorter.mean;
    e.se = std::sqrt(variance_of_mean(shorter) + variance_of_mean(longer));
  }
  return e;
}

ReportEntry estimate_ad3(const ArrayModel& model, std::size_t n, std::size_t m, const ClampedIdentity& g,
                         const Budget& budget) {
  require_row(n);
  require_budget(budget);
  if (!(g.b > g.a)) throw DomainError("clamp needs a < b");
  ReportEntry e;
  e.name = "ad3";
  e.replicates = budget.replicates;
  e.extra["n"] = static_cast<double>(n);
  e.extra["m"] = static_cast<double>(m);
  e.extra["clamp_a"] = g.a;
  e.extra["clamp_b"] = g.b;
  if (m >= n) {
    e.warning = "empty lag range (m >= n): sum is 0";
    return e;
  }
  const auto cols = per_row<2>(model, n, budget.replicates, budget.seed, budget.threads, [&](auto row) {
    const Sparse y = nonzero(row, [&](double x) { return g(x) - g.a; });
    double total = 0.0;
    for (double v : y.value) total += v;
    return std::array<double, 2>{static_cast<double>(n) * lagged_pair_sum(y, n, m, n - 1),
                                 total / static_cast<double>(n)};
  });
  const MeanEstimate cross = batch_mean(cols[0]);
  const MeanEstimate level = batch_mean(cols[1]);
  const double c = static_cast<double>(n) * static_cast<double>(n - m);
  const double slope = 2.0 * c * level.mean;
  const double variance = variance_of_mean(cross) + slope * slope * variance_of_mean(level) -
                          2.0 * slope * batch_mean_covariance(cols[0], cols[1]);
  e.estimate = cross.mean - c * level.mean * level.mean;
  e.se = std::sqrt(std::max(variance, 0.0));
  return e;
}

DiagnosticReport over_bank(const std::string& name, std::span<const TestFunction> bank,
                           const std::function<ReportEntry(const TestFunction&)>& estimator) {
  if (bank.empty()) throw DomainError("test bank is empty");
  DiagnosticReport report;
  report.name = name;
  report.meta["test_bank"] = kTestBankVersion;
  const ReportEntry* worst = nullptr;
  double worst_score = -1.0;
  for (const auto& f : bank) {
    ReportEntry e = estimator(f);
    e.name = name + "/" + f.name;
    report.add(std::move(e));
  }
  for (const auto& e : report.entries) {
    const double score = e.target ? std::abs(e.estimate - *e.target) : std::abs(e.estimate);
    if (score > worst_score) {
      worst_score = score;
      worst = &e;
    }
  }
  ReportEntry w = *worst;
  w.extra["worst_of"] = static_cast<double>(bank.size());
  w.warning = "worst case: " + w.name;
  w.name = name + "/worst";
  if (std::any_of(report.entries.begin(), report.entries.end(), [](const auto& e) { return e.verdict == "fail"; })) {
    w.verdict = "fail";
  }
  report.add(std::move(w));
  return report;
}

// ---------------------------------------------------------------------------
// i.i.d. Pareto oracle

double IidParetoOracle::an(double lo, double hi) const {
  const double floor = 1.0 / scaling(alpha, n);
  auto tail = [&](double x) { return x <= floor ? static_cast<double>(n) : std::pow(x, -alpha); };
  return tail(lo) - (std::isfinite(hi) ? tail(hi) : 0.0);
}

double IidParetoOracle::an_prime(double epsilon) const {
  if (!(alpha < 1.0)) throw DomainError("small-jump mean is infinite for alpha >= 1");
  const double nd = static_cast<double>(n);
  const double a = scaling(alpha, n);
  if (epsilon * a <= 1.0) return 0.0;
  return alpha / (1.0 - alpha) * (std::pow(epsilon, 1.0 - alpha) - nd / a);
}

namespace {

double pareto_integral(double alpha, std::size_t n, const TestFunction& f, const std::function<double(double)>& h) {
  if (f.is_zero()) return 0.0;
  if (f.lo < 1.0 / scaling(alpha, n)) throw DomainError("oracle needs f to vanish below the noise floor");
  const auto cuts = f.breakpoints();
  const Integral result = integrate([&](double x) { return h(f(x)) * alpha * std::pow(x, -alpha - 1.0); }, f.lo, f.hi,
                                    cuts);
  return require_converged(result, "i.i.d. Pareto oracle").value;
}

}  // namespace

double IidParetoOracle::mean_f(const TestFunction& f) const {
  return pareto_integral(alpha, n, f, [](double v) { return v; });
}

double IidParetoOracle::exceedance(const TestFunction& f) const {
  return pareto_integral(alpha, n, f, [](double v) { return -std::expm1(-v); });
}

double IidParetoOracle::laplace(const TestFunction& f) const {
  return 1.0 - exceedance(f) / static_cast<double>(n);
}

double IidParetoOracle::ad2(const TestFunction& f, std::size_t r, std::size_t m) const {
  if (m >= r) return 0.0;
  const double j = mean_f(f);
  return static_cast<double>(r - m) * j * j / static_cast<double>(n);
}

double IidParetoOracle::ad1_gap(const TestFunction& f, std::size_t r) const {
  const double log_phi = std::log1p(-exceedance(f) / static_cast<double>(n));
  const std::size_t k = n / r;
  return std::exp(static_cast<double>(n) * log_phi) - std::exp(static_cast<double>(r * k) * log_phi);
}

double IidParetoOracle::kallenberg(const TestFunction& f, std::size_t r) const {
  const double log_phi = std::log1p(-exceedance(f) / static_cast<double>(n));
  return static_cast<double>(n / r) * -std::expm1(static_cast<double>(r) * log_phi);
}

double IidParetoOracle::incremental_gap(const TestFunction& f, std::size_t m) const {
  const double e = exceedance(f);
  const double log_phi = std::log1p(-e / static_cast<double>(n));
  return e * std::exp(static_cast<double>(m - 1) * log_phi);
}

// ---------------------------------------------------------------------------
// Block construction

MixingProfile MixingProfile::harmonic() {
  return {"harmonic", [](std::size_t m) { return m == 0 ? 1.0 : 1.0 / static_cast<double>(m); }};
}

MixingProfile MixingProfile::zero() {
  return {"zero", [](std::size_t) { return 0.0; }};
}

MixingProfile MixingProfile::geometric(double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("geometric mixing profile needs q in [0, 1)");
  return {"geometric", [q](std::size_t m) { return std::pow(q, static_cast<double>(m)); }};
}

MixingProfile MixingProfile::power(double p) {
  if (!(p > 0.0)) throw DomainError("power mixing profile needs p > 0");
  return {"power", [p](std::size_t m) { return m == 0 ? 1.0 : std::pow(static_cast<double>(m), -p); }};
}

std::size_t stable_floor(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("floor of a negative or nonfinite value");
  return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-12)));
}

std::size_t integer_sqrt(std::size_t n) {
  auto s = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (s * s > n) --s;
  while ((s + 1) * (s + 1) <= n) ++s;
  return s;
}

namespace {

BlockScheme block_front(std::size_t n, const MixingProfile& profile) {
  if (n < 4) throw DomainError("block scheme needs n >= 4");
  BlockScheme b;
  b.n = n;
  const double nd = static_cast<double>(n);
  b.m = integer_sqrt(n);
  b.rho = profile.alpha(b.m);
  if (!(b.rho >= 0.0 && b.rho <= 1.0)) throw DomainError("mixing coefficients must lie in [0, 1]");
  b.epsilon = std::max(std::pow(nd, -0.25), std::sqrt(b.rho));
  b.delta = 1.0 / (std::sqrt(nd) * b.epsilon);
  b.eta = b.rho / (2.0 * b.epsilon);
  return b;
}

void block_back(BlockScheme& b, const MixingProfile& profile) {
  const double nd = static_cast<double>(b.n);
  b.k_alpha_m = static_cast<double>(b.k) * profile.alpha(b.m);
  b.bounds_hold = static_cast<double>(b.r) >= 0.5 * std::pow(nd, 0.75) &&
                  static_cast<double>(b.k) >= 0.5 / b.epsilon;
}

}  // namespace

BlockScheme block_scheme(std::size_t n, const MixingProfile& profile) {
  BlockScheme b = block_front(n, profile);
  b.r = std::max<std::size_t>(1, stable_floor(static_cast<double>(n) * b.epsilon));
  b.k = n / b.r;
  block_back(b, profile);
  return b;
}

BlockScheme divisor_blocks(std::size_t n, const MixingProfile& profile) {
  BlockScheme b = block_front(n, profile);
  const std::size_t limit = std::max<std::size_t>(1, stable_floor(1.0 / b.epsilon));
  std::size_t k = std::min(limit, n);
  while (n % k != 0) --k;
  b.k = k;
  b.r = n / k;
  block_back(b, profile);
  return b;
}

}  // namespace idpoint
