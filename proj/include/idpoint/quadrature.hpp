#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace idpoint {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  /// A running partial sum above this magnitude classifies the integral as
  /// divergent.
  double divergence_cap = 1e12;
  unsigned max_depth = 18;
};

/// Result of a numerical integral. `divergent` implies value = +-inf.
struct Integral {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  bool divergent = false;
};

class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, Integral partial)
      : std::runtime_error(what), partial_(partial) {}
  const Integral& partial() const { return partial_; }

private:
  Integral partial_;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod integration of f over [a, b], 0 <= a < b <= inf.
/// An endpoint at 0 or +inf is treated as improper and integrated over
/// dyadic shells [2^-k-1, 2^-k] (resp. [2^k, 2^k+1]) until the shells stop
/// contributing. The integrand must be finite in the open interval.
Integral integrate(const Integrand& f, double a, double b, const QuadratureOptions& options = {});

/// Same as integrate() but splits [a, b] at the given interior breakpoints
/// (kinks or jumps of f). Breakpoints outside (a, b) are ignored.
Integral integrate(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                   const QuadratureOptions& options = {});

enum class Oscillator { Cos, Sin };

/// Integral of g(x) * cos(omega x) (or sin) over [x0, inf) for g positive and
/// nonincreasing with g -> 0. The range is split at the zeros of the
/// oscillator and the alternating partial sums are accelerated by repeated
/// averaging.
Integral integrate_oscillatory(const Integrand& g, double omega, double x0, Oscillator kind,
                               const QuadratureOptions& options = {});

/// Throws QuadratureError when the integral did not converge; passes
/// divergent results through.
const Integral& require_converged(const Integral& result, const std::string& context);

}  // namespace idpoint
