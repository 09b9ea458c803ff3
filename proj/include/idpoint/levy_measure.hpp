#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idpoint/quadrature.hpp"
#include "idpoint/random.hpp"
#include "idpoint/tabulated_tail.hpp"

namespace idpoint {

/// A Radon measure nu on (0, inf) described by its tail N(x) = nu(x, inf),
/// finite for every x > 0.
class RadonIntensity {
public:
  struct PowerTail {
    double alpha;  // N(x) = scale * x^-alpha
  };
  using Kind = std::variant<PowerTail, TabulatedTail>;

  static RadonIntensity power_tail(double alpha, double scale = 1.0);
  static RadonIntensity tabulated(TabulatedTail table, double scale = 1.0);

  double tail(double x) const;
  /// inf{x > 0 : N(x) <= y}.
  double tail_inverse(double y) const;
  double density(double x) const;
  /// N(0+), possibly +inf.
  double total_mass() const;

  /// The same intensity multiplied by c > 0.
  RadonIntensity scaled(double c) const;

  const Kind& kind() const { return kind_; }
  double scale() const { return scale_; }
  std::vector<double> breakpoints() const;
  std::string describe() const;

private:
  RadonIntensity(Kind kind, double scale) : kind_(std::move(kind)), scale_(scale) {}
  Kind kind_;
  double scale_;
};

/// A probability law F on (0, inf) for the marks W_i.
class MarkDistribution {
public:
  struct PointMass {
    double w;
  };
  struct LogNormal {
    double mu;
    double sigma;
  };
  /// Law of sum_j theta^j = 1 / (1 - theta); degenerate.
  struct GeometricWeightsSum {
    double theta;
  };
  struct Empirical {
    std::vector<double> values;
  };
  using Kind = std::variant<PointMass, LogNormal, GeometricWeightsSum, Empirical>;

  explicit MarkDistribution(Kind kind);

  double sample(Stream& stream) const;
  /// gamma_alpha = E[W^alpha].
  double alpha_moment(double alpha) const;
  /// E[h(W)], exact for discrete kinds and by quadrature for LogNormal.
  double expect(const std::function<double(double)>& h) const;

  /// Essential range of W; for LogNormal the mu +- 12 sigma range.
  double lower_bound() const;
  double upper_bound() const;
  /// Atoms of the law (empty for LogNormal).
  std::vector<double> atoms() const;

  const Kind& kind() const { return kind_; }
  std::string describe() const;

private:
  Kind kind_;
};

struct LevyValidity {
  bool is_levy = false;
  bool small_jump_finite = false;
  /// int x^2 / (1 + x^2) rho(dx)
  Integral levy_integral;
  /// int_(0,1] x rho(dx)
  Integral small_jump;
  std::string detail;
};

/// A measure rho on (0, inf) given by its tail function H(x) = rho(x, inf).
/// Immutable; the small-jump mean is computed at construction.
class LevyMeasure {
public:
  struct Stable {
    double alpha;  // H(x) = gamma * x^-alpha
    double gamma;
  };
  struct GammaLevy {
    double alpha;  // rho(dx) = alpha x^-1 e^-x dx
  };
  struct ProductConvolution {
    RadonIntensity nu;  // H(x) = E_F[nu(x / W, inf)]
    MarkDistribution marks;
  };
  struct Tabulated {
    TabulatedTail table;
  };
  using Kind = std::variant<Stable, GammaLevy, ProductConvolution, Tabulated>;

  static LevyMeasure stable(double alpha, double gamma);
  static LevyMeasure gamma(double alpha);
  static LevyMeasure product_convolution(RadonIntensity nu, MarkDistribution marks);
  static LevyMeasure tabulated(TabulatedTail table);

  /// H(x) for x > 0.
  double tail(double x) const;
  /// Generalized inverse inf{x > 0 : H(x) <= y}. `upper_hint`, if given,
  /// must satisfy H(upper_hint) <= y and only narrows the search.
  double tail_inverse(double y, std::optional<double> upper_hint = std::nullopt) const;
  double density(double x) const;
  /// H(0+), the total mass (possibly +inf).
  double total_mass() const;

  /// int_(0,1] x rho(dx); +inf when divergent. Throws QuadratureError when
  /// the cached integral did not converge.
  double small_jump_mean() const;
  const Integral& small_jump_integral() const { return small_jump_; }

  /// int_(lo, hi] g(x) rho(dx).
  Integral integrate(const Integrand& g, double lo, double hi, const QuadratureOptions& options = {}) const;

  /// Points where the density has kinks or jumps.
  std::vector<double> breakpoints() const;

  const Kind& kind() const { return kind_; }
  std::string describe() const;

private:
  explicit LevyMeasure(Kind kind);
  double bracketed_inverse(double y, std::optional<double> upper_hint) const;
  bool has_smooth_density() const;

  Kind kind_;
  Integral small_jump_;
};

double tail(const LevyMeasure& measure, double x);
double tail_inverse(const LevyMeasure& measure, double y);
double small_jump_mean(const LevyMeasure& measure);
LevyValidity validate_levy(const LevyMeasure& measure);

/// c_i = int over (H^-1(i), H^-1(i-1)] of x / (1 + x^2) rho(dx), i = 1..count.
std::vector<double> centering_constants(const LevyMeasure& measure, std::size_t count);

/// int_0^inf x / (1 + x^2) rho(dx), the limit of the summed centering constants.
Integral centering_total(const LevyMeasure& measure);

}  // namespace idpoint
