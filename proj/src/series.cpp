#include "idpoint/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "idpoint/errors.hpp"
#include "idpoint/parallel.hpp"

namespace idpoint {
namespace {

void require_small_jumps(const LevyMeasure& measure) {
  const Integral& small = measure.small_jump_integral();
  if (small.divergent) {
    throw PreconditionError("series sampler needs int_(0,1] x rho(dx) < inf (small-jump mean condition); " +
                            measure.describe() + " violates it");
  }
  require_converged(small, "small-jump mean of " + measure.describe());
}

void require_truncation(const Truncation& truncation) {
  if (truncation.max_terms == 0) throw DomainError("truncation needs max_terms >= 1");
  if (!(truncation.point_floor >= 0.0)) throw DomainError("truncation point_floor must be >= 0");
}

// Walks the series, calling visit(U_i) for every retained point. Returns the
// number of retained points and the last arrival time used.
template <class Visit>
std::pair<std::size_t, double> walk_series(const LevyMeasure& measure, Stream& stream, const Truncation& truncation,
                                           Visit&& visit) {
  double arrival = 0.0;
  double last_retained_arrival = 0.0;
  std::optional<double> hint;
  std::size_t kept = 0;
  while (kept < truncation.max_terms) {
    arrival += stream.exponential();
    const double point = measure.tail_inverse(arrival, hint);
    if (!(point >= truncation.point_floor) || point == 0.0) break;
    visit(point);
    ++kept;
    last_retained_arrival = arrival;
    if (std::isfinite(point)) hint = point;
  }
  return {kept, last_retained_arrival};
}

// int_(0, edge] x rho(dx), in closed form where one exists.
double mass_below(const LevyMeasure& measure, double edge) {
  if (const auto* g = std::get_if<LevyMeasure::GammaLevy>(&measure.kind())) return -g->alpha * std::expm1(-edge);
  if (const auto* s = std::get_if<LevyMeasure::Stable>(&measure.kind())) {
    if (s->alpha >= 1.0) return std::numeric_limits<double>::infinity();
    return s->alpha * s->gamma / (1.0 - s->alpha) * std::pow(edge, 1.0 - s->alpha);
  }
  const Integral rest = measure.integrate([](double x) { return x; }, 0.0, edge);
  return rest.divergent ? std::numeric_limits<double>::infinity() : std::max(0.0, rest.value);
}

}  // namespace

double TimeLaw::sample(Stream& stream) const {
  return kind == Kind::Uniform ? stream.uniform_closed_open() : atom;
}

double TimeLaw::cdf(double t) const {
  if (kind == Kind::Uniform) return std::clamp(t, 0.0, 1.0);
  return t >= atom ? 1.0 : 0.0;
}

LevyPath::LevyPath(std::vector<double> times, std::vector<double> sizes)
    : times_(std::move(times)), sizes_(std::move(sizes)) {
  if (times_.size() != sizes_.size()) throw DomainError("path needs one jump time per jump size");
  std::vector<std::size_t> order(times_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times_[a] < times_[b]; });
  sorted_times_.reserve(order.size());
  cumulative_.reserve(order.size());
  double running = 0.0;
  for (std::size_t idx : order) {
    running += sizes_[idx];
    sorted_times_.push_back(times_[idx]);
    cumulative_.push_back(running);
  }
  // Terminal value summed in series order so that it matches fk_sum bitwise.
  total_ = std::accumulate(sizes_.begin(), sizes_.end(), 0.0);
  // Rounding in the two summation orders must not make the path step down at t = 1.
  for (double& c : cumulative_) c = std::min(c, total_);
}

double LevyPath::at(double t) const {
  if (t >= 1.0) return total_;
  const auto it = std::upper_bound(sorted_times_.begin(), sorted_times_.end(), t);
  if (it == sorted_times_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - sorted_times_.begin()) - 1];
}

std::vector<std::pair<double, double>> LevyPath::grid(std::size_t resolution) const {
  if (resolution == 0) resolution = 1;
  std::vector<std::pair<double, double>> out;
  out.reserve(resolution + 1);
  for (std::size_t k = 0; k <= resolution; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(resolution);
    out.emplace_back(t, at(t));
  }
  return out;
}

std::vector<double> poisson_arrivals(Stream& stream, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  double arrival = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    arrival += stream.exponential();
    out.push_back(arrival);
  }
  return out;
}

std::vector<double> poisson_arrivals(Seed seed, std::size_t count) {
  Stream stream(seed);
  return poisson_arrivals(stream, count);
}

SeriesSample fk_points(const LevyMeasure& measure, Stream& stream, const Truncation& truncation) {
  require_small_jumps(measure);
  require_truncation(truncation);
  SeriesSample sample;
  const auto [kept, last_arrival] =
      walk_series(measure, stream, truncation, [&](double u) { sample.points.push_back(u); });
  sample.truncation_index = kept;
  sample.total = std::accumulate(sample.points.begin(), sample.points.end(), 0.0);
  // int_{Gamma_k}^inf H^-1(y) dy = int over (0, H^-1(Gamma_k)] of x rho(dx).
  const double edge = measure.tail_inverse(last_arrival);
  if (edge > 0.0) sample.truncation_bound = mass_below(measure, edge);
  return sample;
}

SeriesSample fk_points(const LevyMeasure& measure, Seed seed, const Truncation& truncation) {
  Stream stream(seed);
  return fk_points(measure, stream, truncation);
}

double fk_sum(const LevyMeasure& measure, Stream& stream, const Truncation& truncation) {
  require_small_jumps(measure);
  require_truncation(truncation);
  double total = 0.0;
  walk_series(measure, stream, truncation, [&](double u) { total += u; });
  return total;
}

double fk_sum(const LevyMeasure& measure, Seed seed, const Truncation& truncation) {
  Stream stream(seed);
  return fk_sum(measure, stream, truncation);
}

std::vector<double> fk_sums(const LevyMeasure& measure, Seed seed, std::size_t replicates,
                            const Truncation& truncation, unsigned threads) {
  require_small_jumps(measure);
  return replicate<double>(replicates, seed, threads,
                           [&](Stream& stream) { return fk_sum(measure, stream, truncation); });
}

LevyPath fk_path(const LevyMeasure& measure, const TimeLaw& times, Seed seed, const Truncation& truncation) {
  if (times.kind == TimeLaw::Kind::Atom && !(times.atom >= 0.0 && times.atom <= 1.0)) {
    throw DomainError("jump-time law must live on [0, 1]");
  }
  const SeriesSample sample = fk_points(measure, seed, truncation);
  // Jump times come from a stream independent of the point stream.
  Stream time_stream(seed.derive(0x7469'6d65ULL));
  std::vector<double> jump_times;
  jump_times.reserve(sample.points.size());
  for (std::size_t i = 0; i < sample.points.size(); ++i) jump_times.push_back(times.sample(time_stream));
  return LevyPath(std::move(jump_times), sample.points);
}

double fk_centered_sum(const LevyMeasure& measure, Stream& stream, std::span<const double> centering,
                       const Truncation& truncation) {
  require_truncation(truncation);
  if (centering.size() < truncation.max_terms) {
    throw DomainError("centered series needs one centering constant per possible term");
  }
  double total = 0.0;
  std::size_t i = 0;
  walk_series(measure, stream, truncation, [&](double u) { total += u - centering[i++]; });
  return total;
}

double fk_centered_sum(const LevyMeasure& measure, Seed seed, const Truncation& truncation) {
  const auto centering = centering_constants(measure, truncation.max_terms);
  Stream stream(seed);
  return fk_centered_sum(measure, stream, centering, truncation);
}

std::vector<double> fk_centered_sums(const LevyMeasure& measure, Seed seed, std::size_t replicates,
                                     const Truncation& truncation, unsigned threads) {
  const auto validity = validate_levy(measure);
  if (!validity.is_levy) throw PreconditionError("centered series needs a Levy measure: " + validity.detail);
  const auto centering = centering_constants(measure, truncation.max_terms);
  return replicate<double>(replicates, seed, threads, [&](Stream& stream) {
    return fk_centered_sum(measure, stream, centering, truncation);
  });
}

std::complex<double> id_char_function(const LevyMeasure& measure, double u) {
  require_small_jumps(measure);
  if (u == 0.0) return {1.0, 0.0};
  const double w = std::abs(u);
  double split = 1.0 / w;
  const double support_end = measure.tail_inverse(0.0);
  split = std::min(split, support_end);

  const Integral near_re = measure.integrate([&](double x) { return std::cos(w * x) - 1.0; }, 0.0, split);
  const Integral near_im = measure.integrate([&](double x) { return std::sin(w * x); }, 0.0, split);
  double re = near_re.value;
  double im = near_im.value;
  double error = near_re.error + near_im.error;
  bool converged = near_re.converged && near_im.converged;
  if (split < support_end) {
    auto g = [&](double x) { return measure.density(x); };
    const Integral far_cos = integrate_oscillatory(g, w, split, Oscillator::Cos);
    const Integral far_sin = integrate_oscillatory(g, w, split, Oscillator::Sin);
    re += far_cos.value - measure.tail(split);
    im += far_sin.value;
    error += far_cos.error + far_sin.error;
    converged = converged && far_cos.converged && far_sin.converged;
  }
  if (!converged) {
    Integral partial{re, error, false, false};
    throw QuadratureError("characteristic function at u = " + std::to_string(u) + " did not converge", partial);
  }
  if (u < 0.0) im = -im;
  return std::exp(std::complex<double>(re, im));
}

}  // namespace idpoint
