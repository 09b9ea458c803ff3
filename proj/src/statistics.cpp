#include "idpoint/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "idpoint/errors.hpp"

namespace idpoint {
namespace {

std::vector<double> batch_means(std::span<const double> values, std::size_t batches) {
  const std::size_t n = values.size();
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t begin = b * n / batches;
    const std::size_t end = (b + 1) * n / batches;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += values[i];
    means[b] = sum / static_cast<double>(end - begin);
  }
  return means;
}

double effective_size(std::size_t a, std::size_t b) {
  return static_cast<double>(a) * static_cast<double>(b) / static_cast<double>(a + b);
}

double ks_p_value(double statistic, double ne) {
  const double root = std::sqrt(ne);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
}

}  // namespace

double sample_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

MeanEstimate batch_mean(std::span<const double> values, std::size_t batches) {
  MeanEstimate out;
  out.n = values.size();
  if (values.empty()) return out;
  out.mean = sample_mean(values);
  if (batches >= 2 && values.size() >= 2 * batches) {
    const auto means = batch_means(values, batches);
    double ss = 0.0;
    for (double m : means) ss += (m - out.mean) * (m - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(batches * (batches - 1)));
  } else if (values.size() >= 2) {
    out.se = std::sqrt(sample_variance(values) / static_cast<double>(values.size()));
  }
  return out;
}

double batch_mean_covariance(std::span<const double> a, std::span<const double> b, std::size_t batches) {
  if (a.size() != b.size()) throw DomainError("paired batch covariance needs equal-length series");
  if (a.size() < 2) return 0.0;
  if (batches < 2 || a.size() < 2 * batches) batches = a.size();
  const auto ma = batch_means(a, batches);
  const auto mb = batch_means(b, batches);
  const double ca = sample_mean(ma);
  const double cb = sample_mean(mb);
  double s = 0.0;
  for (std::size_t i = 0; i < batches; ++i) s += (ma[i] - ca) * (mb[i] - cb);
  return s / static_cast<double>(batches * (batches - 1));
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // 1 - sqrt(2 pi) / lambda * sum_k exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double v = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double odd = 2.0 * k - 1.0;
      sum += std::exp(-odd * odd * v);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double level) {
  if (a.empty() || b.empty()) throw DomainError("two-sample KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  KsResult out;
  out.statistic = d;
  out.level = level;
  out.p_value = ks_p_value(d, effective_size(x.size(), y.size()));
  out.reject = out.p_value < level;
  return out;
}

KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf, double level) {
  if (sample.empty()) throw DomainError("KS test needs a nonempty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult out;
  out.statistic = d;
  out.level = level;
  out.p_value = ks_p_value(d, n);
  out.reject = out.p_value < level;
  return out;
}

namespace {
using QuietOverflow =
    boost::math::policies::policy<boost::math::policies::overflow_error<boost::math::policies::ignore_error>>;
}  // namespace

PoissonityResult poissonity_check(std::span<const std::uint64_t> counts, double level) {
  PoissonityResult out;
  out.level = level;
  if (counts.size() < 2) throw DomainError("Poisson check needs at least two counts");
  std::vector<double> values(counts.begin(), counts.end());
  out.mean = sample_mean(values);
  out.variance = sample_variance(values);
  if (out.mean == 0.0) {
    out.degenerate = true;
    out.warning = "all counts are zero; Poisson fit is degenerate";
    out.dispersion_p_value = 0.0;
    out.chi_square_p_value = 0.0;
    return out;
  }
  const double r = static_cast<double>(counts.size());
  out.dispersion = out.variance / out.mean;
  {
    // Boost overflows inside tgamma near t = 0 for large r without this policy.
    boost::math::chi_squared_distribution<double, QuietOverflow> chi(r - 1.0);
    const double t = (r - 1.0) * out.dispersion;
    const double lower = boost::math::cdf(chi, t);
    out.dispersion_p_value = std::min(1.0, 2.0 * std::min(lower, 1.0 - lower));
  }
  {
    // Observed and expected cell counts for k = 0, 1, ...; the last cell
    // collects the upper tail.
    boost::math::poisson_distribution<double> law(out.mean);
    const std::uint64_t top = *std::max_element(counts.begin(), counts.end());
    std::vector<double> observed(top + 1, 0.0);
    for (auto c : counts) observed[c] += 1.0;
    std::vector<double> expected(top + 1, 0.0);
    for (std::uint64_t k = 0; k <= top; ++k) expected[k] = r * boost::math::pdf(law, static_cast<double>(k));
    expected[top] = r * boost::math::cdf(boost::math::complement(law, static_cast<double>(top) - 1.0));
    std::vector<double> obs_cells;
    std::vector<double> exp_cells;
    double o = 0.0;
    double e = 0.0;
    for (std::uint64_t k = 0; k <= top; ++k) {
      o += observed[k];
      e += expected[k];
      if (e >= 5.0) {
        obs_cells.push_back(o);
        exp_cells.push_back(e);
        o = 0.0;
        e = 0.0;
      }
    }
    if (e > 0.0 || o > 0.0) {
      if (exp_cells.empty()) {
        obs_cells.push_back(o);
        exp_cells.push_back(e);
      } else {
        obs_cells.back() += o;
        exp_cells.back() += e;
      }
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < obs_cells.size(); ++c) {
      chi2 += (obs_cells[c] - exp_cells[c]) * (obs_cells[c] - exp_cells[c]) / exp_cells[c];
    }
    out.chi_square = chi2;
    if (obs_cells.size() >= 3) {
      out.chi_square_dof = obs_cells.size() - 2;
      boost::math::chi_squared chi(static_cast<double>(out.chi_square_dof));
      out.chi_square_p_value = boost::math::cdf(boost::math::complement(chi, chi2));
    } else {
      out.chi_square_dof = 0;
      out.chi_square_p_value = 1.0;
    }
  }
  out.pass = out.dispersion_p_value >= level && out.chi_square_p_value >= level;
  return out;
}

double hill_tail_index(std::span<const double> sample, double top_fraction) {
  std::vector<double> positive;
  positive.reserve(sample.size());
  for (double v : sample) {
    if (v > 0.0 && std::isfinite(v)) positive.push_back(v);
  }
  if (positive.size() < 100) throw DomainError("Hill estimator needs at least 100 positive values");
  if (!(top_fraction > 0.0 && top_fraction < 1.0)) throw DomainError("Hill top fraction must lie in (0, 1)");
  const auto k = static_cast<std::size_t>(std::floor(top_fraction * static_cast<double>(positive.size())));
  if (k < 2) throw DomainError("Hill estimator needs at least two order statistics above the threshold");
  std::nth_element(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(k), positive.end(),
                   std::greater<>());
  const double threshold = positive[k];
  double mean_log = 0.0;
  for (std::size_t i = 0; i < k; ++i) mean_log += std::log(positive[i] / threshold);
  mean_log /= static_cast<double>(k);
  if (!(mean_log > 0.0)) throw DomainError("Hill estimator undefined: top order statistics are tied");
  return 1.0 / mean_log;
}

std::vector<double> quantiles(std::span<const double> sample, std::span<const double> probabilities) {
  if (sample.empty()) throw DomainError("quantiles of an empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  std::vector<double> out;
  for (double p : probabilities) {
    const double h = (static_cast<double>(x.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    out.push_back(x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]));
  }
  return out;
}

}  // namespace idpoint
