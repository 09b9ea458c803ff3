#include "idpoint/arrays.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "idpoint/csv.hpp"
#include "idpoint/errors.hpp"
#include "idpoint/quadrature.hpp"

namespace idpoint {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("tail index alpha must lie in (0, 2)");
}

double normal_upper_tail(double g) { return 0.5 * std::erfc(g / std::numbers::sqrt2); }

double coefficient_tail_mass(const CoefficientLaw& law, double alpha, std::size_t from) {
  // sum_{j >= from} theta^(j alpha) k with k = E[exp(alpha (sigma xi - sigma^2/2))].
  if (law.theta == 0.0) return 0.0;
  const double ratio = std::pow(law.theta, alpha);
  const double k = std::exp(0.5 * alpha * (alpha - 1.0) * law.sigma * law.sigma);
  return k * std::pow(ratio, static_cast<double>(from)) / (1.0 - ratio);
}

std::size_t minimal_cutoff(const CoefficientLaw& law, double alpha) {
  std::size_t cutoff = 1;
  while (coefficient_tail_mass(law, alpha, cutoff) >= kCoefficientMassBound) ++cutoff;
  return cutoff;
}

// Fixed-capacity window over the most recent values.
class Ring {
public:
  explicit Ring(std::size_t size) : data_(size, 0.0) {}
  void push(double v) {
    data_[head_] = v;
    head_ = (head_ + 1) % data_.size();
  }
  /// lag 0 = most recent.
  double lag(std::size_t k) const { return data_[(head_ + data_.size() - 1 - k) % data_.size()]; }
  std::size_t size() const { return data_.size(); }

private:
  std::vector<double> data_;
  std::size_t head_ = 0;
};

}  // namespace

double CoefficientLaw::alpha_moment(std::size_t j, double alpha) const {
  const double base = j == 0 ? 1.0 : std::pow(theta, static_cast<double>(j) * alpha);
  return base * std::exp(0.5 * alpha * (alpha - 1.0) * sigma * sigma);
}

double VolatilityLaw::alpha_moment(double alpha) const {
  return std::visit(Overloaded{[&](const LogGaussian& l) { return std::exp(0.5 * alpha * alpha * l.s * l.s); },
                               [&](const MovingMax& mm) {
                                 if (mm.s == 0.0) return 1.0;
                                 // E[M^a] = int_0^inf a v^(a-1) P(M > v) dv.
                                 const double terms = static_cast<double>(mm.m + 1);
                                 auto integrand = [&](double v) {
                                   const double below = 1.0 - normal_upper_tail(std::log(v) / mm.s);
                                   return alpha * std::pow(v, alpha - 1.0) * -std::expm1(terms * std::log(below));
                                 };
                                 const Integral result =
                                     integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
                                 return require_converged(result, "volatility moment").value;
                               }},
                    kind);
}

ArrayModel::ArrayModel(Kind kind) : kind_(std::move(kind)) {
  require_alpha(alpha());
  std::visit(Overloaded{[](const IidHeavyTail&) {}, [](const MDependentMovingSum&) {},
                        [this](const LinearProcess& lp) {
                          if (!(lp.coefficients.theta >= 0.0 && lp.coefficients.theta < 1.0)) {
                            throw DomainError("linear process needs theta in [0, 1)");
                          }
                          if (!(lp.coefficients.sigma >= 0.0)) throw DomainError("coefficient sigma must be >= 0");
                          const std::size_t needed = minimal_cutoff(lp.coefficients, lp.alpha);
                          if (lp.series_cutoff == 0) {
                            cutoff_ = needed;
                          } else if (lp.series_cutoff < needed) {
                            throw ConfigError("series_cutoff " + std::to_string(lp.series_cutoff) +
                                              " leaves coefficient alpha-mass above 1e-8; need at least " +
                                              std::to_string(needed));
                          } else {
                            cutoff_ = lp.series_cutoff;
                          }
                        },
                        [](const StochasticVolatility& sv) {
                          std::visit(Overloaded{[](const VolatilityLaw::MovingMax& mm) {
                                                  if (!(mm.s >= 0.0)) throw DomainError("volatility s must be >= 0");
                                                },
                                                [](const VolatilityLaw::LogGaussian& lg) {
                                                  if (!(lg.r >= 0.0 && lg.r < 1.0) || !(lg.s >= 0.0)) {
                                                    throw DomainError("log-Gaussian volatility needs r in [0,1), s >= 0");
                                                  }
                                                }},
                                     sv.volatility.kind);
                        },
                        [](const AssociatedGaussian& ag) {
                          if (!(ag.r >= 0.0 && ag.r < 1.0)) throw DomainError("associated model needs r in [0, 1)");
                        }},
             kind_);
}

double ArrayModel::alpha() const {
  return std::visit([](const auto& k) { return k.alpha; }, kind_);
}

std::optional<std::size_t> ArrayModel::dependence_order() const {
  return std::visit(
      Overloaded{[](const IidHeavyTail&) -> std::optional<std::size_t> { return 0; },
                 [](const MDependentMovingSum& m) -> std::optional<std::size_t> { return m.m; },
                 [this](const LinearProcess& lp) -> std::optional<std::size_t> {
                   if (lp.coefficients.theta == 0.0) return 0;
                   return std::nullopt;
                 },
                 [](const StochasticVolatility& sv) -> std::optional<std::size_t> {
                   if (const auto* mm = std::get_if<VolatilityLaw::MovingMax>(&sv.volatility.kind)) return mm->m;
                   const auto& lg = std::get<VolatilityLaw::LogGaussian>(sv.volatility.kind);
                   if (lg.r == 0.0 || lg.s == 0.0) return 0;
                   return std::nullopt;
                 },
                 [](const AssociatedGaussian& ag) -> std::optional<std::size_t> {
                   if (ag.r == 0.0) return 0;
                   return std::nullopt;
                 }},
      kind_);
}

double ArrayModel::tail_constant() const {
  return std::visit(Overloaded{[](const IidHeavyTail&) { return 1.0; },
                               [](const MDependentMovingSum& m) { return static_cast<double>(m.m + 1); },
                               [this](const LinearProcess& lp) {
                                 double c = 0.0;
                                 for (std::size_t j = 0; j < cutoff_; ++j) c += lp.coefficients.alpha_moment(j, lp.alpha);
                                 return c;
                               },
                               [](const StochasticVolatility& sv) { return sv.volatility.alpha_moment(sv.alpha); },
                               [](const AssociatedGaussian&) { return 1.0; }},
                    kind_);
}

std::string ArrayModel::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const IidHeavyTail& k) { os << "iid(alpha=" << k.alpha << ")"; },
                        [&](const MDependentMovingSum& k) { os << "moving_sum(alpha=" << k.alpha << ", m=" << k.m << ")"; },
                        [&](const LinearProcess& k) {
                          os << "linear(alpha=" << k.alpha << ", theta=" << k.coefficients.theta
                             << ", sigma=" << k.coefficients.sigma << ", cutoff=" << cutoff_ << ")";
                        },
                        [&](const StochasticVolatility& k) {
                          os << "volatility(alpha=" << k.alpha << ", ";
                          if (const auto* mm = std::get_if<VolatilityLaw::MovingMax>(&k.volatility.kind)) {
                            os << "moving_max m=" << mm->m << " s=" << mm->s;
                          } else {
                            const auto& lg = std::get<VolatilityLaw::LogGaussian>(k.volatility.kind);
                            os << "log_gaussian r=" << lg.r << " s=" << lg.s;
                          }
                          os << ")";
                        },
                        [&](const AssociatedGaussian& k) { os << "associated(alpha=" << k.alpha << ", r=" << k.r << ")"; }},
             kind_);
  return os.str();
}

double scaling(double alpha, std::size_t n) {
  require_alpha(alpha);
  if (n == 0) throw DomainError("scaling needs n >= 1");
  return std::pow(static_cast<double>(n), 1.0 / alpha);
}

std::vector<double> generate_prefix(const ArrayModel& model, std::size_t n, std::size_t length, Stream& stream) {
  if (n == 0) throw DomainError("row length n must be >= 1");
  if (length > n) throw DomainError("prefix longer than the row");
  const double alpha = model.alpha();
  const double inv_scale = 1.0 / scaling(alpha, n);
  std::vector<double> row;
  row.reserve(length);
  std::visit(
      Overloaded{
          [&](const ArrayModel::IidHeavyTail&) {
            for (std::size_t j = 0; j < length; ++j) row.push_back(stream.pareto(alpha) * inv_scale);
          },
          [&](const ArrayModel::MDependentMovingSum& k) {
            Ring window(k.m + 1);
            double sum = 0.0;
            for (std::size_t b = 0; b < k.m; ++b) {
              const double z = stream.pareto(alpha);
              window.push(z);
            }
            for (std::size_t j = 0; j < length; ++j) {
              window.push(stream.pareto(alpha));
              sum = 0.0;
              for (std::size_t l = 0; l <= k.m; ++l) sum += window.lag(l);
              row.push_back(sum * inv_scale);
            }
          },
          [&](const ArrayModel::LinearProcess& k) {
            const std::size_t cutoff = model.series_cutoff();
            Ring noise(cutoff);
            for (std::size_t b = 0; b + 1 < cutoff; ++b) noise.push(stream.pareto(alpha));
            std::vector<double> coeff(cutoff);
            for (std::size_t l = 0; l < cutoff; ++l) coeff[l] = std::pow(k.coefficients.theta, static_cast<double>(l));
            const double sigma = k.coefficients.sigma;
            for (std::size_t j = 0; j < length; ++j) {
              noise.push(stream.pareto(alpha));
              double x = 0.0;
              for (std::size_t l = 0; l < cutoff; ++l) {
                double c = coeff[l];
                if (sigma > 0.0) c *= std::exp(sigma * stream.normal() - 0.5 * sigma * sigma);
                x += c * noise.lag(l);
              }
              row.push_back(x * inv_scale);
            }
          },
          [&](const ArrayModel::StochasticVolatility& k) {
            if (const auto* mm = std::get_if<VolatilityLaw::MovingMax>(&k.volatility.kind)) {
              Ring window(mm->m + 1);
              for (std::size_t b = 0; b < mm->m; ++b) window.push(std::exp(mm->s * stream.normal()));
              for (std::size_t j = 0; j < length; ++j) {
                window.push(std::exp(mm->s * stream.normal()));
                double sigma = 0.0;
                for (std::size_t l = 0; l <= mm->m; ++l) sigma = std::max(sigma, window.lag(l));
                row.push_back(sigma * stream.pareto(alpha) * inv_scale);
              }
            } else {
              const auto& lg = std::get<VolatilityLaw::LogGaussian>(k.volatility.kind);
              const double innovation = lg.s * std::sqrt(1.0 - lg.r * lg.r);
              double g = lg.s * stream.normal();
              for (std::size_t j = 0; j < length; ++j) {
                if (j > 0) g = lg.r * g + innovation * stream.normal();
                row.push_back(std::exp(g) * stream.pareto(alpha) * inv_scale);
              }
            }
          },
          [&](const ArrayModel::AssociatedGaussian& k) {
            const double innovation = std::sqrt(1.0 - k.r * k.r);
            double g = stream.normal();
            for (std::size_t j = 0; j < length; ++j) {
              if (j > 0) g = k.r * g + innovation * stream.normal();
              const double tail = std::max(normal_upper_tail(g), std::numeric_limits<double>::min());
              row.push_back(std::pow(tail, -1.0 / alpha) * inv_scale);
            }
          }},
      model.kind());
  return row;
}

std::vector<double> generate_row(const ArrayModel& model, std::size_t n, Stream& stream) {
  return generate_prefix(model, n, n, stream);
}

std::vector<double> generate_row(const ArrayModel& model, std::size_t n, Seed seed) {
  Stream stream(seed);
  return generate_row(model, n, stream);
}

double partial_sum(std::span<const double> row) {
  // Neumaier summation.
  double sum = 0.0;
  double compensation = 0.0;
  for (double x : row) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      compensation += (sum - t) + x;
    } else {
      compensation += (x - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

SplitSum split_partial_sum(std::span<const double> row, double epsilon) {
  std::vector<double> above;
  std::vector<double> below;
  for (double x : row) (x > epsilon ? above : below).push_back(x);
  return {partial_sum(above), partial_sum(below)};
}

PointConfiguration empirical_point_process(std::span<const double> row, double window_floor) {
  if (!(window_floor > 0.0)) throw DomainError("window floor must be positive");
  std::vector<double> points;
  bool two_sided = false;
  for (double x : row) {
    two_sided = two_sided || x < 0.0;
    if (std::abs(x) > window_floor) points.push_back(x);
  }
  return PointConfiguration(std::move(points), window_floor, two_sided);
}

void write_rows(const std::filesystem::path& path, std::span<const std::vector<double>> rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << "replicate_id,j,x\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < rows[r].size(); ++j) out << r << ',' << (j + 1) << ',' << format_double(rows[r][j]) << '\n';
  }
}

}  // namespace idpoint
