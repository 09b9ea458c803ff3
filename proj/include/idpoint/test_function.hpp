#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace idpoint {

/// Nonnegative Lipschitz function with support [lo, hi] bounded away from 0
/// (hi may be +inf). Plays the role of f in Laplace functionals.
struct TestFunction {
  enum class Shape {
    /// Height on [lo + edge, hi - edge], linear ramps of width `edge`;
    /// edge = 0 gives the sharp indicator height * 1[lo, hi].
    SmoothedIndicator,
    /// Triangle on [lo, hi] peaking at the midpoint.
    Hat,
  };

  std::string name;
  Shape shape = Shape::SmoothedIndicator;
  double lo = 1.0;
  double hi = std::numeric_limits<double>::infinity();
  double height = 1.0;
  double edge = 0.0;
  /// Evaluate at |x| so the function lives on R \ {0}.
  bool two_sided = false;

  static TestFunction indicator(double lo, double hi, double height, double edge = 0.0);
  static TestFunction hat(double lo, double hi, double height);
  static TestFunction zero();

  double operator()(double x) const;
  /// L_f with |f(x) - f(y)| <= L_f |x - y|; +inf for sharp indicators.
  double lipschitz() const;
  double sup_norm() const { return height; }
  bool is_zero() const { return height == 0.0; }
  /// Kinks and jumps, for quadrature.
  std::vector<double> breakpoints() const;
};

/// The versioned family of test functions every condition estimator is run
/// against.
inline constexpr const char* kTestBankVersion = "bank-v1";
std::vector<TestFunction> standard_test_bank();

/// CSV fixture with header name,shape,lo,hi,height,edge.
std::vector<TestFunction> load_test_bank(const std::filesystem::path& path);
void write_test_bank(const std::filesystem::path& path, const std::vector<TestFunction>& bank);

}  // namespace idpoint
