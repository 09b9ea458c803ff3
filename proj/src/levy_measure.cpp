#include "idpoint/levy_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "idpoint/errors.hpp"

namespace idpoint {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInverseRelTol = 1e-10;
constexpr double kLogNormalSpan = 12.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

}  // namespace

// ---------------------------------------------------------------------------
// RadonIntensity

RadonIntensity RadonIntensity::power_tail(double alpha, double scale) {
  require(alpha > 0.0 && std::isfinite(alpha), "power tail exponent must be positive");
  require(scale > 0.0 && std::isfinite(scale), "intensity scale must be positive");
  return RadonIntensity(PowerTail{alpha}, scale);
}

RadonIntensity RadonIntensity::tabulated(TabulatedTail table, double scale) {
  require(scale > 0.0 && std::isfinite(scale), "intensity scale must be positive");
  return RadonIntensity(std::move(table), scale);
}

double RadonIntensity::tail(double x) const {
  require(x > 0.0, "intensity tail needs x > 0");
  return std::visit(Overloaded{[&](const PowerTail& p) { return scale_ * std::pow(x, -p.alpha); },
                               [&](const TabulatedTail& t) { return scale_ * t(x); }},
                    kind_);
}

double RadonIntensity::tail_inverse(double y) const {
  require(y >= 0.0, "intensity tail inverse needs y >= 0");
  return std::visit(Overloaded{[&](const PowerTail& p) {
                                 if (y == 0.0) return kInf;
                                 return std::pow(y / scale_, -1.0 / p.alpha);
                               },
                               [&](const TabulatedTail& t) { return t.inverse(y / scale_); }},
                    kind_);
}

double RadonIntensity::density(double x) const {
  if (!(x > 0.0)) return 0.0;
  return std::visit(
      Overloaded{[&](const PowerTail& p) { return scale_ * p.alpha * std::pow(x, -p.alpha - 1.0); },
                 [&](const TabulatedTail& t) { return scale_ * t.density(x); }},
      kind_);
}

double RadonIntensity::total_mass() const {
  return std::visit(Overloaded{[](const PowerTail&) { return kInf; },
                               [&](const TabulatedTail& t) { return scale_ * t.total_mass(); }},
                    kind_);
}

RadonIntensity RadonIntensity::scaled(double c) const {
  require(c > 0.0 && std::isfinite(c), "intensity scale factor must be positive");
  return RadonIntensity(kind_, scale_ * c);
}

std::vector<double> RadonIntensity::breakpoints() const {
  if (const auto* t = std::get_if<TabulatedTail>(&kind_)) return {t->nodes().begin(), t->nodes().end()};
  return {};
}

std::string RadonIntensity::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const PowerTail& p) { os << "power_tail(alpha=" << p.alpha << ")"; },
                        [&](const TabulatedTail& t) { os << "tabulated(" << t.nodes().size() << " nodes)"; }},
             kind_);
  if (scale_ != 1.0) os << "*" << scale_;
  return os.str();
}

// ---------------------------------------------------------------------------
// MarkDistribution

MarkDistribution::MarkDistribution(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{[](const PointMass& p) { require(p.w > 0.0 && std::isfinite(p.w), "point mass must be positive"); },
                        [](const LogNormal& l) {
                          require(std::isfinite(l.mu) && l.sigma >= 0.0 && std::isfinite(l.sigma),
                                  "log-normal needs finite mu and sigma >= 0");
                        },
                        [](const GeometricWeightsSum& g) {
                          require(g.theta >= 0.0 && g.theta < 1.0, "geometric weights need theta in [0, 1)");
                        },
                        [](const Empirical& e) {
                          require(!e.values.empty(), "empirical mark law needs at least one value");
                          for (double v : e.values) require(v > 0.0 && std::isfinite(v), "empirical marks must be positive");
                        }},
             kind_);
}

double MarkDistribution::sample(Stream& stream) const {
  return std::visit(Overloaded{[](const PointMass& p) { return p.w; },
                               [&](const LogNormal& l) { return std::exp(l.mu + l.sigma * stream.normal()); },
                               [](const GeometricWeightsSum& g) { return 1.0 / (1.0 - g.theta); },
                               [&](const Empirical& e) { return e.values[stream.below(e.values.size())]; }},
                    kind_);
}

double MarkDistribution::alpha_moment(double alpha) const {
  return std::visit(Overloaded{[&](const PointMass& p) { return std::pow(p.w, alpha); },
                               [&](const LogNormal& l) {
                                 return std::exp(alpha * l.mu + 0.5 * alpha * alpha * l.sigma * l.sigma);
                               },
                               [&](const GeometricWeightsSum& g) { return std::pow(1.0 - g.theta, -alpha); },
                               [&](const Empirical& e) {
                                 double sum = 0.0;
                                 for (double v : e.values) sum += std::pow(v, alpha);
                                 return sum / static_cast<double>(e.values.size());
                               }},
                    kind_);
}

double MarkDistribution::expect(const std::function<double(double)>& h) const {
  return std::visit(
      Overloaded{[&](const PointMass& p) { return h(p.w); },
                 [&](const LogNormal& l) {
                   if (l.sigma == 0.0) return h(std::exp(l.mu));
                   auto weighted = [&](double z) {
                     return h(std::exp(l.mu + l.sigma * z)) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
                   };
                   return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(weighted, -kLogNormalSpan,
                                                                                       kLogNormalSpan, 10, 1e-9);
                 },
                 [&](const GeometricWeightsSum& g) { return h(1.0 / (1.0 - g.theta)); },
                 [&](const Empirical& e) {
                   double sum = 0.0;
                   for (double v : e.values) sum += h(v);
                   return sum / static_cast<double>(e.values.size());
                 }},
      kind_);
}

double MarkDistribution::lower_bound() const {
  return std::visit(Overloaded{[](const PointMass& p) { return p.w; },
                               [](const LogNormal& l) { return std::exp(l.mu - kLogNormalSpan * l.sigma); },
                               [](const GeometricWeightsSum& g) { return 1.0 / (1.0 - g.theta); },
                               [](const Empirical& e) { return *std::min_element(e.values.begin(), e.values.end()); }},
                    kind_);
}

double MarkDistribution::upper_bound() const {
  return std::visit(Overloaded{[](const PointMass& p) { return p.w; },
                               [](const LogNormal& l) { return std::exp(l.mu + kLogNormalSpan * l.sigma); },
                               [](const GeometricWeightsSum& g) { return 1.0 / (1.0 - g.theta); },
                               [](const Empirical& e) { return *std::max_element(e.values.begin(), e.values.end()); }},
                    kind_);
}

std::vector<double> MarkDistribution::atoms() const {
  return std::visit(Overloaded{[](const PointMass& p) { return std::vector<double>{p.w}; },
                               [](const LogNormal& l) {
                                 return l.sigma == 0.0 ? std::vector<double>{std::exp(l.mu)} : std::vector<double>{};
                               },
                               [](const GeometricWeightsSum& g) { return std::vector<double>{1.0 / (1.0 - g.theta)}; },
                               [](const Empirical& e) { return e.values; }},
                    kind_);
}

std::string MarkDistribution::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const PointMass& p) { os << "point_mass(" << p.w << ")"; },
                        [&](const LogNormal& l) { os << "lognormal(" << l.mu << "," << l.sigma << ")"; },
                        [&](const GeometricWeightsSum& g) { os << "geometric_sum(" << g.theta << ")"; },
                        [&](const Empirical& e) { os << "empirical(" << e.values.size() << " values)"; }},
             kind_);
  return os.str();
}

// ---------------------------------------------------------------------------
// LevyMeasure

LevyMeasure::LevyMeasure(Kind kind) : kind_(std::move(kind)) {
  small_jump_ = std::visit(
      Overloaded{[](const Stable& s) {
                   Integral r;
                   if (s.alpha < 1.0) {
                     r.value = s.alpha * s.gamma / (1.0 - s.alpha);
                   } else {
                     r.value = kInf;
                     r.converged = false;
                     r.divergent = true;
                   }
                   return r;
                 },
                 [](const GammaLevy& g) {
                   Integral r;
                   r.value = g.alpha * -std::expm1(-1.0);
                   return r;
                 },
                 [this](const auto&) { return integrate([](double x) { return x; }, 0.0, 1.0); }},
      kind_);
}

LevyMeasure LevyMeasure::stable(double alpha, double gamma) {
  require(alpha > 0.0 && alpha < 2.0, "stable index alpha must lie in (0, 2)");
  require(gamma > 0.0 && std::isfinite(gamma), "stable scale gamma must be positive");
  return LevyMeasure(Stable{alpha, gamma});
}

LevyMeasure LevyMeasure::gamma(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "gamma shape alpha must be positive");
  return LevyMeasure(GammaLevy{alpha});
}

LevyMeasure LevyMeasure::product_convolution(RadonIntensity nu, MarkDistribution marks) {
  return LevyMeasure(ProductConvolution{std::move(nu), std::move(marks)});
}

LevyMeasure LevyMeasure::tabulated(TabulatedTail table) { return LevyMeasure(Tabulated{std::move(table)}); }

double LevyMeasure::tail(double x) const {
  require(x > 0.0, "tail needs x > 0");
  return std::visit(
      Overloaded{[&](const Stable& s) { return s.gamma * std::pow(x, -s.alpha); },
                 [&](const GammaLevy& g) {
                   return x > 745.0 ? 0.0 : g.alpha * boost::math::expint(1, x);
                 },
                 [&](const ProductConvolution& p) { return p.marks.expect([&](double w) { return p.nu.tail(x / w); }); },
                 [&](const Tabulated& t) { return t.table(x); }},
      kind_);
}

double LevyMeasure::density(double x) const {
  if (!(x > 0.0)) return 0.0;
  return std::visit(
      Overloaded{[&](const Stable& s) { return s.alpha * s.gamma * std::pow(x, -s.alpha - 1.0); },
                 [&](const GammaLevy& g) { return g.alpha * std::exp(-x) / x; },
                 [&](const ProductConvolution& p) {
                   return p.marks.expect([&](double w) { return p.nu.density(x / w) / w; });
                 },
                 [&](const Tabulated& t) { return t.table.density(x); }},
      kind_);
}

double LevyMeasure::total_mass() const {
  return std::visit(Overloaded{[](const Stable&) { return kInf; }, [](const GammaLevy&) { return kInf; },
                               [](const ProductConvolution& p) { return p.nu.total_mass(); },
                               [](const Tabulated& t) { return t.table.total_mass(); }},
                    kind_);
}

bool LevyMeasure::has_smooth_density() const {
  if (std::holds_alternative<GammaLevy>(kind_)) return true;
  if (const auto* p = std::get_if<ProductConvolution>(&kind_)) {
    return std::holds_alternative<RadonIntensity::PowerTail>(p->nu.kind());
  }
  return false;
}

double LevyMeasure::tail_inverse(double y, std::optional<double> upper_hint) const {
  require(y >= 0.0, "tail inverse needs y >= 0");
  if (const auto* s = std::get_if<Stable>(&kind_)) {
    if (y == 0.0) return kInf;
    return std::pow(s->gamma / y, 1.0 / s->alpha);
  }
  if (const auto* t = std::get_if<Tabulated>(&kind_)) return t->table.inverse(y);
  if (y >= total_mass()) return 0.0;
  return bracketed_inverse(y, upper_hint);
}

double LevyMeasure::bracketed_inverse(double y, std::optional<double> upper_hint) const {
  // Invariant once bracketed: H(lo) > y >= H(hi).
  double hi = upper_hint.value_or(1.0);
  if (!(hi > 0.0) || !std::isfinite(hi)) hi = 1.0;
  while (tail(hi) > y) {
    hi *= 4.0;
    if (hi > 1e300) return kInf;
  }
  double lo = hi;
  while (true) {
    lo = hi * 0.5;
    if (lo < 1e-300) return 0.0;
    if (tail(lo) > y) break;
    hi = lo;
  }
  double t_lo = std::log(lo);
  double t_hi = std::log(hi);
  const bool newton = has_smooth_density();
  double t = t_hi;
  for (int iter = 0; iter < 300 && t_hi - t_lo > kInverseRelTol; ++iter) {
    if (newton) {
      const double x = std::exp(t);
      const double f = tail(x) - y;
      if (f == 0.0) break;
      if (f > 0.0) {
        t_lo = t;
      } else {
        t_hi = t;
      }
      double next = 0.5 * (t_lo + t_hi);
      const double slope = -x * density(x);
      if (slope < 0.0) {
        const double step = t - f / slope;
        if (step > t_lo && step < t_hi) next = step;
      }
      if (std::abs(next - t) < 0.1 * kInverseRelTol) {
        t = next;
        break;
      }
      t = next;
    } else {
      const double next = 0.5 * (t_lo + t_hi);
      if (tail(std::exp(next)) > y) {
        t_lo = next;
      } else {
        t_hi = next;
      }
      t = t_hi;
    }
  }
  return std::exp(newton ? t : t_hi);
}

double LevyMeasure::small_jump_mean() const {
  if (small_jump_.divergent) return kInf;
  require_converged(small_jump_, "small-jump mean");
  return small_jump_.value;
}

std::vector<double> LevyMeasure::breakpoints() const {
  std::vector<double> out;
  if (const auto* t = std::get_if<Tabulated>(&kind_)) {
    out.assign(t->table.nodes().begin(), t->table.nodes().end());
  } else if (const auto* p = std::get_if<ProductConvolution>(&kind_)) {
    for (double w : p->marks.atoms()) {
      for (double b : p->nu.breakpoints()) out.push_back(w * b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Integral LevyMeasure::integrate(const Integrand& g, double lo, double hi, const QuadratureOptions& options) const {
  if (const auto* t = std::get_if<Tabulated>(&kind_)) {
    if (hi > t->table.upper() && !t->table.vanishes_beyond_grid()) {
      throw DomainError("integral against a tabulated tail beyond its grid, where the tail is unknown");
    }
    hi = std::min(hi, t->table.upper());
    lo = std::max(lo, 0.0);
    if (!(hi > lo)) return Integral{};
  }
  if (const auto* p = std::get_if<ProductConvolution>(&kind_)) {
    // Integrate over nu for each mark, then average over the marks.
    const auto cuts = p->nu.breakpoints();
    Integral total;
    total.converged = true;
    total.value = p->marks.expect([&](double w) {
      const Integral inner = idpoint::integrate([&](double y) { return g(w * y) * p->nu.density(y); }, lo / w,
                                                hi / w, cuts, options);
      total.converged = total.converged && inner.converged;
      total.divergent = total.divergent || inner.divergent;
      total.error = std::max(total.error, inner.error);
      return inner.divergent ? 0.0 : inner.value;
    });
    if (total.divergent) {
      total.value = kInf;
      total.converged = false;
    }
    return total;
  }
  const auto cuts = breakpoints();
  return idpoint::integrate([&](double x) { return g(x) * density(x); }, lo, hi, cuts, options);
}

std::string LevyMeasure::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const Stable& s) { os << "stable(alpha=" << s.alpha << ", gamma=" << s.gamma << ")"; },
                        [&](const GammaLevy& g) { os << "gamma(alpha=" << g.alpha << ")"; },
                        [&](const ProductConvolution& p) {
                          os << "product_convolution(" << p.nu.describe() << ", " << p.marks.describe() << ")";
                        },
                        [&](const Tabulated& t) { os << "tabulated(" << t.table.nodes().size() << " nodes)"; }},
             kind_);
  return os.str();
}

// ---------------------------------------------------------------------------
// Free operations

double tail(const LevyMeasure& measure, double x) { return measure.tail(x); }

double tail_inverse(const LevyMeasure& measure, double y) { return measure.tail_inverse(y); }

double small_jump_mean(const LevyMeasure& measure) { return measure.small_jump_mean(); }

LevyValidity validate_levy(const LevyMeasure& measure) {
  LevyValidity report;
  report.small_jump = measure.small_jump_integral();
  if (const auto* s = std::get_if<LevyMeasure::Stable>(&measure.kind())) {
    // int_0^inf x^(1-a) / (1 + x^2) dx = pi / (2 sin(pi a / 2)).
    report.levy_integral.value = s->alpha * s->gamma * std::numbers::pi / (2.0 * std::sin(std::numbers::pi * s->alpha / 2.0));
  } else if (const auto* t = std::get_if<LevyMeasure::Tabulated>(&measure.kind());
             t && !t->table.vanishes_beyond_grid()) {
    // Mass H(upper) beyond the grid enters with a weight in (0, 1].
    report.levy_integral = measure.integrate([](double x) { return x * x / (1.0 + x * x); }, 0.0, t->table.upper());
    if (!report.levy_integral.divergent) report.levy_integral.value += t->table.values().back();
    report.detail = "tail does not vanish on the grid; mass beyond the grid bounded by H(upper). ";
  } else {
    report.levy_integral = measure.integrate([](double x) { return x * x / (1.0 + x * x); }, 0.0, kInf);
  }
  const bool levy_ok = report.levy_integral.converged || report.levy_integral.divergent;
  const bool small_ok = report.small_jump.converged || report.small_jump.divergent;
  if (!levy_ok || !small_ok) {
    throw QuadratureError("validate_levy: quadrature did not converge for " + measure.describe(),
                          levy_ok ? report.small_jump : report.levy_integral);
  }
  report.is_levy = !report.levy_integral.divergent;
  report.small_jump_finite = !report.small_jump.divergent;
  report.detail += report.is_levy ? "int x^2/(1+x^2) rho(dx) finite" : "int x^2/(1+x^2) rho(dx) diverges";
  report.detail += report.small_jump_finite ? "; int_(0,1] x rho(dx) finite" : "; int_(0,1] x rho(dx) diverges";
  return report;
}

std::vector<double> centering_constants(const LevyMeasure& measure, std::size_t count) {
  std::vector<double> out(count, 0.0);
  auto weight = [](double x) { return x / (1.0 + x * x); };
  double upper = measure.tail_inverse(0.0);
  for (std::size_t i = 1; i <= count; ++i) {
    const double lower = measure.tail_inverse(static_cast<double>(i), std::isfinite(upper) ? std::optional(upper) : std::nullopt);
    if (upper > lower) {
      const Integral c = measure.integrate(weight, lower, upper);
      if (!c.converged) {
        throw QuadratureError("centering constant c_" + std::to_string(i) + " did not converge", c);
      }
      out[i - 1] = c.value;
    }
    upper = lower;
  }
  return out;
}

Integral centering_total(const LevyMeasure& measure) {
  return measure.integrate([](double x) { return x / (1.0 + x * x); }, 0.0, kInf);
}

}  // namespace idpoint
