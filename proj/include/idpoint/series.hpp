#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "idpoint/levy_measure.hpp"
#include "idpoint/random.hpp"

namespace idpoint {

/// Where the series U_i = H^-1(Gamma_i) is cut off.
struct Truncation {
  std::size_t max_terms = 10000;
  /// Points below the floor are discarded and stop the series.
  double point_floor = 1e-8;
};

/// Retained points of one series realization, largest first.
struct SeriesSample {
  std::vector<double> points;
  std::size_t truncation_index = 0;
  /// E[sum of discarded points | arrivals so far] = int_{Gamma_k}^inf H^-1(y) dy.
  double truncation_bound = 0.0;
  double total = 0.0;
};

/// Law G of the jump times on [0, 1].
struct TimeLaw {
  enum class Kind { Uniform, Atom };
  Kind kind = Kind::Uniform;
  double atom = 1.0;

  static TimeLaw uniform() { return {}; }
  static TimeLaw point(double t) { return {Kind::Atom, t}; }

  double sample(Stream& stream) const;
  double cdf(double t) const;
};

/// Piecewise-constant nondecreasing path t -> Y_t = sum_i U_i 1{V_i <= t}.
class LevyPath {
public:
  LevyPath(std::vector<double> times, std::vector<double> sizes);

  double at(double t) const;
  double terminal() const { return total_; }
  std::span<const double> jump_times() const { return times_; }
  std::span<const double> jump_sizes() const { return sizes_; }
  /// (t, Y_t) on an equispaced grid of resolution + 1 points in [0, 1].
  std::vector<std::pair<double, double>> grid(std::size_t resolution) const;

private:
  // Sorted by time; prefix sums of sizes for O(log n) evaluation.
  std::vector<double> times_;
  std::vector<double> sizes_;
  std::vector<double> sorted_times_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// Gamma_i = E_1 + ... + E_i for i = 1..count, E_j unit exponentials.
std::vector<double> poisson_arrivals(Stream& stream, std::size_t count);
std::vector<double> poisson_arrivals(Seed seed, std::size_t count);

/// Ferguson-Klass points; requires a finite small-jump mean.
SeriesSample fk_points(const LevyMeasure& measure, Stream& stream, const Truncation& truncation = {});
SeriesSample fk_points(const LevyMeasure& measure, Seed seed, const Truncation& truncation = {});

double fk_sum(const LevyMeasure& measure, Stream& stream, const Truncation& truncation = {});
double fk_sum(const LevyMeasure& measure, Seed seed, const Truncation& truncation = {});

/// `replicates` independent fk_sum draws; replicate r uses seed.derive(r).
std::vector<double> fk_sums(const LevyMeasure& measure, Seed seed, std::size_t replicates,
                            const Truncation& truncation = {}, unsigned threads = 0);

/// Attaches i.i.d. jump times to the fk_points stream of the same seed; the
/// path's terminal value equals fk_sum for that seed.
LevyPath fk_path(const LevyMeasure& measure, const TimeLaw& times, Seed seed, const Truncation& truncation = {});

/// sum_i (U_i - c_i) over the retained terms, with c_i taken from
/// `centering` (at least truncation.max_terms values). Only needs rho to be
/// a Levy measure.
double fk_centered_sum(const LevyMeasure& measure, Stream& stream, std::span<const double> centering,
                       const Truncation& truncation = {});
double fk_centered_sum(const LevyMeasure& measure, Seed seed, const Truncation& truncation = {});

std::vector<double> fk_centered_sums(const LevyMeasure& measure, Seed seed, std::size_t replicates,
                                     const Truncation& truncation = {}, unsigned threads = 0);

/// E exp(iuX) = exp{int (e^{iux} - 1) rho(dx)}.
std::complex<double> id_char_function(const LevyMeasure& measure, double u);

}  // namespace idpoint
