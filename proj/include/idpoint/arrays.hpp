#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idpoint/point_process.hpp"
#include "idpoint/random.hpp"

namespace idpoint {

/// Row-wise i.i.d. random coefficients C_j = theta^j * exp(sigma xi_j - sigma^2 / 2)
/// with xi_j standard normal; sigma = 0 gives the constant coefficients theta^j.
struct CoefficientLaw {
  double theta = 0.5;
  double sigma = 0.0;

  /// E[C_j^alpha].
  double alpha_moment(std::size_t j, double alpha) const;
};

/// Positive stationary volatility sequence independent of the noise.
struct VolatilityLaw {
  /// sigma_j = max(V_j, ..., V_{j-m}) with V i.i.d. log-normal(0, s); m-dependent.
  struct MovingMax {
    std::size_t m;
    double s;
  };
  /// log sigma_j a stationary Gaussian AR(1) with lag-one correlation r and
  /// standard deviation s.
  struct LogGaussian {
    double r;
    double s;
  };
  std::variant<MovingMax, LogGaussian> kind;

  /// E[sigma^alpha], by construction or by quadrature for MovingMax.
  double alpha_moment(double alpha) const;
};

/// Stationary triangular array X_{j,n} = X_j / a_n driven by exact Pareto
/// noise P(Z > x) = x^-alpha, x >= 1.
class ArrayModel {
public:
  struct IidHeavyTail {
    double alpha;
  };
  /// X_j = Z_j + ... + Z_{j-m}.
  struct MDependentMovingSum {
    double alpha;
    std::size_t m;
  };
  /// X_j = sum_{k < cutoff} C_{j,k} Z_{j-k}.
  struct LinearProcess {
    double alpha;
    CoefficientLaw coefficients;
    /// 0 selects the smallest cutoff meeting the coefficient-mass bound.
    std::size_t series_cutoff = 0;
  };
  /// X_j = sigma_j Z_j.
  struct StochasticVolatility {
    double alpha;
    VolatilityLaw volatility;
  };
  /// Z_j = Pareto quantile of Phi(G_j) for a Gaussian AR(1) G with
  /// correlation r^k at lag k, r in [0, 1).
  struct AssociatedGaussian {
    double alpha;
    double r;
  };
  using Kind = std::variant<IidHeavyTail, MDependentMovingSum, LinearProcess, StochasticVolatility, AssociatedGaussian>;

  explicit ArrayModel(Kind kind);

  double alpha() const;
  /// Dependence order m (rows are m-dependent); nullopt for infinite order.
  std::optional<std::size_t> dependence_order() const;
  /// c with n P(X_{1,n} > x) -> c x^-alpha.
  double tail_constant() const;
  /// Number of noise terms per entry of a linear process (1 otherwise).
  std::size_t series_cutoff() const { return cutoff_; }

  const Kind& kind() const { return kind_; }
  std::string describe() const;

private:
  Kind kind_;
  std::size_t cutoff_ = 1;
};

/// Coefficient mass bound for linear-process truncation.
inline constexpr double kCoefficientMassBound = 1e-8;

/// a_n = n^(1/alpha).
double scaling(double alpha, std::size_t n);

/// First `length` entries of the row (X_{1,n}, ..., X_{n,n}); identical to
/// the corresponding prefix of generate_row for the same stream state.
std::vector<double> generate_prefix(const ArrayModel& model, std::size_t n, std::size_t length, Stream& stream);
std::vector<double> generate_row(const ArrayModel& model, std::size_t n, Stream& stream);
std::vector<double> generate_row(const ArrayModel& model, std::size_t n, Seed seed);

/// S_n, with compensated summation.
double partial_sum(std::span<const double> row);

/// S_n(eps, inf) and S_n(0, eps].
struct SplitSum {
  double above = 0.0;
  double below = 0.0;
};
SplitSum split_partial_sum(std::span<const double> row, double epsilon);

/// N_n restricted to {|x| > window_floor}.
PointConfiguration empirical_point_process(std::span<const double> row, double window_floor);

/// CSV export with header replicate_id,j,x.
void write_rows(const std::filesystem::path& path, std::span<const std::vector<double>> rows);

}  // namespace idpoint
