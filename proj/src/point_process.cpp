#include "idpoint/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "idpoint/csv.hpp"
#include "idpoint/errors.hpp"
#include "idpoint/parallel.hpp"
#include "idpoint/statistics.hpp"

namespace idpoint {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGeometricCutoff = 1e-8;

void require_window(double window_floor) {
  if (!(window_floor > 0.0)) throw DomainError("window floor must be positive");
}

// exp{- int h(y) nu(dy)} over [lo, hi] with the given kinks.
double exp_minus_integral(const RadonIntensity& intensity, const std::function<double(double)>& h, double lo,
                          double hi, std::vector<double> cuts, const std::string& context) {
  if (!(hi > lo)) return 1.0;
  for (double b : intensity.breakpoints()) cuts.push_back(b);
  const Integral result = integrate([&](double y) { return h(y) * intensity.density(y); }, lo, hi, cuts);
  if (result.divergent) return 0.0;
  require_converged(result, context);
  return std::exp(-result.value);
}

}  // namespace

// ---------------------------------------------------------------------------
// PointConfiguration

PointConfiguration::PointConfiguration(std::vector<double> points, double window_floor, bool two_sided)
    : points_(std::move(points)), window_floor_(window_floor), two_sided_(two_sided) {
  for (double x : points_) {
    const double m = two_sided_ ? std::abs(x) : x;
    if (!(m > window_floor_)) throw DomainError("configuration point outside its observation window");
  }
}

std::size_t PointConfiguration::count(double lo, double hi) const {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(), [&](double x) { return x > lo && x <= hi; }));
}

double PointConfiguration::integrate(const TestFunction& f) const {
  if (f.is_zero()) return 0.0;
  double sum = 0.0;
  for (double x : points_) sum += f(x);
  return sum;
}

PointConfiguration PointConfiguration::superpose(std::span<const PointConfiguration> parts) {
  double floor = 0.0;
  bool two_sided = false;
  for (const auto& p : parts) {
    floor = std::max(floor, p.window_floor());
    two_sided = two_sided || p.two_sided();
  }
  std::vector<double> merged;
  for (const auto& p : parts) {
    for (double x : p.points()) {
      if ((two_sided ? std::abs(x) : x) > floor) merged.push_back(x);
    }
  }
  return PointConfiguration(std::move(merged), floor, two_sided);
}

// ---------------------------------------------------------------------------
// ClusterLaw

ClusterLaw::ClusterLaw(Kind kind) : kind_(std::move(kind)) {
  if (const auto* d = std::get_if<Deterministic>(&kind_)) {
    support_ = {d->points};
  } else if (const auto* g = std::get_if<GeometricWeights>(&kind_)) {
    if (!(g->theta >= 0.0 && g->theta < 1.0)) throw DomainError("geometric cluster weights need theta in [0, 1)");
    std::vector<double> q{1.0};
    while (g->theta > 0.0 && q.back() * g->theta >= kGeometricCutoff) q.push_back(q.back() * g->theta);
    support_ = {q};
  } else {
    const auto& e = std::get<Empirical>(kind_);
    if (e.clusters.empty()) throw DomainError("empirical cluster law needs at least one cluster");
    support_ = e.clusters;
  }
}

ClusterLaw ClusterLaw::load_csv(const std::filesystem::path& path) {
  const CsvTable table = read_numeric_csv(path);
  if (table.header.size() != 2) throw ConfigError(path.string() + ": cluster file needs columns cluster_id,point");
  std::map<long long, std::vector<double>> grouped;
  for (const auto& row : table.rows) grouped[static_cast<long long>(row[0])].push_back(row[1]);
  Empirical e;
  for (auto& [id, points] : grouped) e.clusters.push_back(std::move(points));
  return ClusterLaw(std::move(e));
}

const std::vector<double>& ClusterLaw::sample(Stream& stream) const {
  const auto& cluster = support_.size() == 1 ? support_.front() : support_[stream.below(support_.size())];
  for (double q : cluster) {
    if (!(std::abs(q) <= 1.0) || q == 0.0) {
      throw DomainError("cluster law emitted point " + std::to_string(q) + "; cluster points need 0 < |Q| <= 1");
    }
  }
  return cluster;
}

double ClusterLaw::max_modulus() const {
  double m = 0.0;
  for (const auto& c : support_) {
    for (double q : c) m = std::max(m, std::abs(q));
  }
  return m;
}

std::string ClusterLaw::describe() const {
  std::ostringstream os;
  if (const auto* d = std::get_if<Deterministic>(&kind_)) {
    os << "deterministic(" << d->points.size() << " points)";
  } else if (const auto* g = std::get_if<GeometricWeights>(&kind_)) {
    os << "geometric(theta=" << g->theta << ")";
  } else {
    os << "empirical(" << support_.size() << " clusters)";
  }
  return os.str();
}

PointConfiguration SummedProcess::configuration(double window_floor) const {
  std::vector<double> kept;
  for (double u : sums) {
    if (u > window_floor) kept.push_back(u);
  }
  return PointConfiguration(std::move(kept), window_floor);
}

// ---------------------------------------------------------------------------
// Samplers

PointConfiguration poisson_sample(const RadonIntensity& intensity, double window_floor, Stream& stream) {
  require_window(window_floor);
  const double mass = intensity.tail(window_floor);
  if (!std::isfinite(mass)) throw DomainError("intensity has infinite mass above the window floor");
  const std::uint64_t count = stream.poisson(mass);
  std::vector<double> points;
  points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    // P(point > x) = N(x) / N(b) for x > b.
    const double x = intensity.tail_inverse(stream.uniform() * mass);
    points.push_back(std::max(x, std::nextafter(window_floor, kInf)));
  }
  return PointConfiguration(std::move(points), window_floor);
}

ClusterRealization cluster_realization(const ClusterModel& model, double window_floor, Stream& stream) {
  const PointConfiguration centers = poisson_sample(model.intensity, window_floor, stream);
  ClusterRealization out;
  out.centers.assign(centers.points().begin(), centers.points().end());
  out.clusters.reserve(out.centers.size());
  for (std::size_t i = 0; i < out.centers.size(); ++i) out.clusters.push_back(model.clusters.sample(stream));
  return out;
}

PointConfiguration cluster_sample(const ClusterModel& model, double window_floor, Stream& stream) {
  const ClusterRealization realization = cluster_realization(model, window_floor, stream);
  std::vector<double> points;
  bool two_sided = false;
  for (std::size_t i = 0; i < realization.centers.size(); ++i) {
    for (double q : realization.clusters[i]) {
      const double x = realization.centers[i] * q;
      two_sided = two_sided || q < 0.0;
      if (std::abs(x) > window_floor) points.push_back(x);
    }
  }
  return PointConfiguration(std::move(points), window_floor, two_sided);
}

SummedProcess sum_points(const ClusterRealization& realization, double cap) {
  SummedProcess out;
  out.sums.reserve(realization.centers.size());
  for (std::size_t i = 0; i < realization.centers.size(); ++i) {
    double running = 0.0;
    for (double q : realization.clusters[i]) {
      running += realization.centers[i] * q;
      if (!(std::abs(running) <= cap)) {
        throw DomainError("cluster " + std::to_string(i) +
                          " is not summable (running sum exceeds cap); clusters must have summable points");
      }
    }
    out.sums.push_back(running);
  }
  return out;
}

SummedProcess product_sums(const ProductModel& model, double window_floor, Stream& stream) {
  require_window(window_floor);
  const double center_floor = window_floor / model.marks.upper_bound();
  const PointConfiguration centers = poisson_sample(model.intensity, center_floor, stream);
  SummedProcess out;
  out.sums.reserve(centers.size());
  for (double p : centers.points()) {
    const double u = p * model.marks.sample(stream);
    if (u > window_floor) out.sums.push_back(u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Laplace functionals

std::vector<LaplaceEstimate> laplace_mc(const ProcessSampler& sampler, std::span<const TestFunction> bank,
                                        std::size_t replicates, Seed seed, unsigned threads) {
  if (replicates < 2) throw DomainError("Laplace estimate needs at least two replicates");
  const std::size_t k = bank.size();
  std::vector<double> values(replicates * k);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Stream stream(seed.derive(r));
    const PointConfiguration config = sampler(stream);
    for (std::size_t j = 0; j < k; ++j) values[j * replicates + r] = std::exp(-config.integrate(bank[j]));
  });
  std::vector<LaplaceEstimate> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto est = batch_mean(std::span(values).subspan(j * replicates, replicates));
    out.push_back({est.mean, est.se, replicates});
  }
  return out;
}

LaplaceEstimate laplace_mc(const ProcessSampler& sampler, const TestFunction& f, std::size_t replicates, Seed seed,
                           unsigned threads) {
  return laplace_mc(sampler, std::span(&f, 1), replicates, seed, threads).front();
}

double laplace_analytic(const RadonIntensity& intensity, const TestFunction& f) {
  if (f.is_zero()) return 1.0;
  return exp_minus_integral(
      intensity, [&](double y) { return -std::expm1(-f(y)); }, f.lo, f.hi, f.breakpoints(),
      "Poisson Laplace functional");
}

double laplace_analytic(const ProductModel& model, const TestFunction& f) {
  if (f.is_zero()) return 1.0;
  const auto atoms = model.marks.atoms();
  if (!atoms.empty()) {
    const double lo = f.lo / model.marks.upper_bound();
    const double hi = f.hi / model.marks.lower_bound();
    std::vector<double> cuts;
    for (double w : atoms) {
      for (double b : f.breakpoints()) cuts.push_back(b / w);
    }
    auto inner = [&](double y) { return model.marks.expect([&](double w) { return -std::expm1(-f(w * y)); }); };
    return exp_minus_integral(model.intensity, inner, lo, hi, std::move(cuts), "product-model Laplace functional");
  }
  // Continuous marks: mark expectation outside, so each inner integrand has known kinks at b / w.
  const double exponent = model.marks.expect([&](double w) {
    std::vector<double> cuts = model.intensity.breakpoints();
    for (double b : f.breakpoints()) cuts.push_back(b / w);
    const Integral part = integrate([&](double y) { return -std::expm1(-f(w * y)) * model.intensity.density(y); },
                                    f.lo / w, f.hi / w, cuts);
    if (part.divergent) return kInf;
    require_converged(part, "product-model Laplace functional");
    return part.value;
  });
  return std::isfinite(exponent) ? std::exp(-exponent) : 0.0;
}

double laplace_analytic(const ClusterModel& model, const TestFunction& f) {
  if (f.is_zero()) return 1.0;
  const auto& support = model.clusters.support();
  double q_max = 0.0;
  double q_min = kInf;
  std::vector<double> cuts;
  for (const auto& cluster : support) {
    for (double q : cluster) {
      const double m = std::abs(q);
      q_max = std::max(q_max, m);
      q_min = std::min(q_min, m);
      for (double b : f.breakpoints()) cuts.push_back(b / m);
    }
  }
  if (q_max == 0.0) return 1.0;
  auto inner = [&](double y) {
    double mean = 0.0;
    for (const auto& cluster : support) {
      double s = 0.0;
      for (double q : cluster) s += f(y * q);
      mean += std::exp(-s);
    }
    return 1.0 - mean / static_cast<double>(support.size());
  };
  return exp_minus_integral(model.intensity, inner, f.lo / q_max, f.hi / q_min, std::move(cuts),
                            "cluster-model Laplace functional");
}

void write_configurations(const std::filesystem::path& path, std::span<const PointConfiguration> replicates) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << "replicate_id,point\n";
  for (std::size_t r = 0; r < replicates.size(); ++r) {
    for (double x : replicates[r].points()) out << r << ',' << format_double(x) << '\n';
  }
}

}  // namespace idpoint
