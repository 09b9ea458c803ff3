#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace idpoint {

/// Replicate mean with a batch-means standard error.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline constexpr std::size_t kDefaultBatches = 100;

/// Splits the values into `batches` contiguous batches (in replicate order)
/// and uses the spread of batch means. Falls back to the plain standard error
/// when there are fewer than two values per batch.
MeanEstimate batch_mean(std::span<const double> values, std::size_t batches = kDefaultBatches);

/// Covariance of the two overall means estimated from paired batch means.
double batch_mean_covariance(std::span<const double> a, std::span<const double> b,
                             std::size_t batches = kDefaultBatches);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double level = 0.01;
  bool reject = false;
};

/// Q_KS(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double level = 0.01);

/// One-sample statistic sup |F_n - F| against a continuous CDF.
KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf,
                       double level = 0.01);

struct PoissonityResult {
  double mean = 0.0;
  double variance = 0.0;
  double dispersion = 0.0;
  double dispersion_p_value = 1.0;
  double chi_square = 0.0;
  std::size_t chi_square_dof = 0;
  double chi_square_p_value = 1.0;
  double level = 0.01;
  bool degenerate = false;
  bool pass = false;
  std::string warning;
};

/// Dispersion test ((R-1) s^2 / mean ~ chi2(R-1), two-sided) plus a
/// chi-square goodness of fit against Poisson(mean) with cells merged to an
/// expected count of at least 5.
PoissonityResult poissonity_check(std::span<const std::uint64_t> counts, double level = 0.01);

/// Hill estimate of the tail index alpha from the k = floor(top_fraction * m)
/// largest of the m positive values.
double hill_tail_index(std::span<const double> sample, double top_fraction);

/// Empirical quantiles (type 7 interpolation).
std::vector<double> quantiles(std::span<const double> sample, std::span<const double> probabilities);

double sample_mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

}  // namespace idpoint
