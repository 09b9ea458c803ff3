#include "idpoint/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace idpoint {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kQuietShells = 4;
constexpr double kMaxShellRatio = 0.95;
constexpr double kRatioTol = 1e-9;

Integral finite_segment(const Integrand& f, double a, double b, const QuadratureOptions& options) {
  Integral out;
  if (!(b > a)) return out;
  double error = 0.0;
  double l1 = 0.0;
  // Boost's adaptive rule measures error on [-1, 1] but tolerance on [a, b];
  // mapping the segment onto [-1, 1] keeps the two consistent.
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return half * f(mid + half * t); }, -1.0, 1.0, options.max_depth, options.rel_tol, &error, &l1);
  out.error = error;
  out.converged = std::isfinite(out.value) &&
                  error <= std::max(options.abs_tol, 10.0 * options.rel_tol * std::max(l1, std::abs(out.value)));
  if (!std::isfinite(out.value)) {
    out.divergent = true;
    out.value = kInf;
  }
  return out;
}

void accumulate(Integral& total, const Integral& part) {
  total.value += part.value;
  total.error += part.error;
  total.converged = total.converged && part.converged;
  total.divergent = total.divergent || part.divergent;
}

// Shells [edge * 2^-(k+1), edge * 2^-k] down toward 0 (downward=true) or
// [edge * 2^k, edge * 2^(k+1)] up toward infinity.
Integral shells(const Integrand& f, double edge, bool downward, const QuadratureOptions& options) {
  Integral total;
  total.converged = false;
  int quiet = 0;
  double previous = 0.0;
  double previous_ratio = -1.0;
  double lo = downward ? edge / 2.0 : edge;
  double hi = downward ? edge : 2.0 * edge;
  for (int k = 0; k < 2000; ++k) {
    if (downward && hi < 1e-300) break;
    if (!downward && lo > 1e300) break;
    const Integral part = finite_segment(f, lo, hi, options);
    total.value += part.value;
    total.error += part.error;
    if (part.divergent || std::abs(total.value) > options.divergence_cap) {
      total.divergent = true;
      break;
    }
    const double scale = std::max(options.abs_tol, options.rel_tol * std::abs(total.value));
    quiet = std::abs(part.value) <= scale ? quiet + 1 : 0;
    if (quiet >= kQuietShells) {
      total.converged = true;
      break;
    }
    // Power-law ends give shells in geometric progression; sum the rest in closed form.
    const double ratio = previous != 0.0 ? part.value / previous : 0.0;
    if (k >= 3 && ratio > 0.0 && ratio < kMaxShellRatio && std::abs(ratio - previous_ratio) <= kRatioTol * ratio) {
      const double rest = part.value * ratio / (1.0 - ratio);
      total.value += rest;
      total.error += std::abs(rest) * kRatioTol / (1.0 - ratio);
      total.converged = true;
      break;
    }
    previous_ratio = ratio;
    previous = part.value;
    if (downward) {
      hi = lo;
      lo = hi / 2.0;
    } else {
      lo = hi;
      hi = 2.0 * lo;
    }
  }
  // Shells exhausted without settling: numerically not integrable.
  if (!total.converged) total.divergent = true;
  if (total.divergent) {
    total.converged = false;
    total.value = total.value < 0.0 ? -kInf : kInf;
  }
  return total;
}

}  // namespace

Integral integrate(const Integrand& f, double a, double b, const QuadratureOptions& options) {
  return integrate(f, a, b, std::span<const double>{}, options);
}

Integral integrate(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                   const QuadratureOptions& options) {
  if (!(b > a)) return Integral{};
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double x : breakpoints) {
    if (x > a && x < b && std::isfinite(x)) cuts.push_back(x);
  }
  // Improper ends are peeled off at 1 (or the nearest breakpoint).
  if (a == 0.0 && b > 1.0) cuts.push_back(1.0);
  if (b == kInf && a < 1.0) cuts.push_back(1.0);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Integral total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (lo == 0.0) {
      accumulate(total, shells(f, hi, true, options));
    } else if (hi == kInf) {
      accumulate(total, shells(f, lo, false, options));
    } else {
      accumulate(total, finite_segment(f, lo, hi, options));
    }
    if (total.divergent) break;
  }
  if (total.divergent) {
    total.converged = false;
    total.value = total.value < 0.0 ? -kInf : kInf;
  }
  return total;
}

Integral integrate_oscillatory(const Integrand& g, double omega, double x0, Oscillator kind,
                               const QuadratureOptions& options) {
  Integral out;
  if (omega == 0.0) {
    if (kind == Oscillator::Sin) return out;
    return integrate(g, x0, kInf, options);
  }
  const double sign = omega < 0.0 && kind == Oscillator::Sin ? -1.0 : 1.0;
  const double w = std::abs(omega);
  const double half_period = std::numbers::pi / w;
  const double phase = kind == Oscillator::Cos ? 0.5 : 0.0;
  auto integrand = [&](double x) {
    return g(x) * (kind == Oscillator::Cos ? std::cos(w * x) : std::sin(w * x));
  };
  // First zero strictly after x0.
  double k = std::floor(x0 / half_period - phase) + 1.0;
  double left = x0;
  std::vector<double> partial;
  double running = 0.0;
  double previous_estimate = std::numeric_limits<double>::quiet_NaN();
  constexpr std::size_t kWindow = 24;
  for (int term = 0; term < 4000; ++term) {
    const double right = (k + phase) * half_period;
    const Integral piece = finite_segment(integrand, left, right, options);
    running += piece.value;
    out.error += piece.error;
    partial.push_back(running);
    left = right;
    k += 1.0;
    if (partial.size() < kWindow) continue;
    // Repeated averaging of the last kWindow partial sums.
    std::vector<double> level(partial.end() - kWindow, partial.end());
    while (level.size() > 1) {
      for (std::size_t i = 0; i + 1 < level.size(); ++i) level[i] = 0.5 * (level[i] + level[i + 1]);
      level.pop_back();
    }
    const double estimate = level.front();
    if (std::isfinite(previous_estimate)) {
      const double change = std::abs(estimate - previous_estimate);
      if (change <= std::max(options.abs_tol, options.rel_tol * std::abs(estimate))) {
        out.value = sign * estimate;
        out.error += change;
        out.converged = true;
        return out;
      }
    }
    previous_estimate = estimate;
  }
  out.value = sign * previous_estimate;
  out.converged = false;
  return out;
}

const Integral& require_converged(const Integral& result, const std::string& context) {
  if (!result.converged && !result.divergent) {
    throw QuadratureError(context + ": quadrature did not converge (value " + std::to_string(result.value) +
                              ", error bound " + std::to_string(result.error) + ")",
                          result);
  }
  return result;
}

}  // namespace idpoint
