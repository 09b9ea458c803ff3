#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idpoint/levy_measure.hpp"
#include "idpoint/random.hpp"
#include "idpoint/test_function.hpp"

namespace idpoint {

/// Finite point configuration observed on the window (b, inf), or on
/// {|x| > b} when two-sided.
class PointConfiguration {
public:
  PointConfiguration() = default;
  PointConfiguration(std::vector<double> points, double window_floor, bool two_sided = false);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double window_floor() const { return window_floor_; }
  bool two_sided() const { return two_sided_; }

  /// Number of points in (lo, hi].
  std::size_t count(double lo, double hi) const;
  /// mu(f) = sum over points of f(x).
  double integrate(const TestFunction& f) const;

  /// Union of configurations observed on the coarsest common window.
  static PointConfiguration superpose(std::span<const PointConfiguration> parts);

private:
  std::vector<double> points_;
  double window_floor_ = 0.0;
  bool two_sided_ = false;
};

/// Law of one cluster (Q_1, Q_2, ...) with |Q_j| <= 1. All provided kinds
/// are finitely supported so Laplace functionals can be evaluated exactly.
class ClusterLaw {
public:
  struct Deterministic {
    std::vector<double> points;
  };
  /// Q_j = theta^j for j = 0, 1, ... while theta^j >= 1e-8.
  struct GeometricWeights {
    double theta;
  };
  /// Uniform choice among listed clusters.
  struct Empirical {
    std::vector<std::vector<double>> clusters;
  };
  using Kind = std::variant<Deterministic, GeometricWeights, Empirical>;

  explicit ClusterLaw(Kind kind);
  static ClusterLaw single_point(double q = 1.0) { return ClusterLaw(Deterministic{{q}}); }
  static ClusterLaw empty() { return ClusterLaw(Deterministic{{}}); }
  /// CSV with header cluster_id,point; rows grouped by cluster id.
  static ClusterLaw load_csv(const std::filesystem::path& path);

  /// A draw; throws DomainError when a cluster point exceeds 1 in modulus.
  const std::vector<double>& sample(Stream& stream) const;
  /// The support of the law with equal weights.
  const std::vector<std::vector<double>>& support() const { return support_; }
  double max_modulus() const;
  std::string describe() const;

private:
  Kind kind_;
  std::vector<std::vector<double>> support_;
};

struct ClusterModel {
  RadonIntensity intensity;
  ClusterLaw clusters;
};

/// Poisson centers P_i with i.i.d. marks W_i ~ F (W_i may exceed 1).
struct ProductModel {
  RadonIntensity intensity;
  MarkDistribution marks;
};

/// Cluster centers and their cluster points before multiplication.
struct ClusterRealization {
  std::vector<double> centers;
  std::vector<std::vector<double>> clusters;
};

/// U_i = sum_j P_i Q_ij, one per cluster.
struct SummedProcess {
  std::vector<double> sums;
  PointConfiguration configuration(double window_floor) const;
};

struct LaplaceEstimate {
  double value = 1.0;
  double se = 0.0;
  std::size_t replicates = 0;
};

using ProcessSampler = std::function<PointConfiguration(Stream&)>;

/// Poisson process with intensity nu on (b, inf) by count + inverse-tail
/// transform.
PointConfiguration poisson_sample(const RadonIntensity& intensity, double window_floor, Stream& stream);

/// Centers on (b, inf) with i.i.d. clusters attached.
ClusterRealization cluster_realization(const ClusterModel& model, double window_floor, Stream& stream);

/// Points P_i Q_ij retained on the window.
PointConfiguration cluster_sample(const ClusterModel& model, double window_floor, Stream& stream);

/// Maps every cluster to its point sum; throws when a running sum exceeds
/// `cap` (the clusters are not summable).
SummedProcess sum_points(const ClusterRealization& realization, double cap = 1e12);

/// Points P_i W_i of a product model, retained above window_floor. Centers
/// are simulated above window_floor / sup W so no retained point is missed.
SummedProcess product_sums(const ProductModel& model, double window_floor, Stream& stream);

/// Monte Carlo E exp(-N(f)) with a batch-means standard error.
LaplaceEstimate laplace_mc(const ProcessSampler& sampler, const TestFunction& f, std::size_t replicates, Seed seed,
                           unsigned threads = 0);

/// Same replicates evaluated against every function of a bank.
std::vector<LaplaceEstimate> laplace_mc(const ProcessSampler& sampler, std::span<const TestFunction> bank,
                                        std::size_t replicates, Seed seed, unsigned threads = 0);

/// exp{- int int (1 - e^{-f(wy)}) F(dw) nu(dy)}.
double laplace_analytic(const ProductModel& model, const TestFunction& f);

/// exp{- int (1 - E exp(-sum_j f(y Q_j))) nu(dy)}.
double laplace_analytic(const ClusterModel& model, const TestFunction& f);

/// exp{- int (1 - e^{-f(x)}) nu(dx)} for a Poisson process.
double laplace_analytic(const RadonIntensity& intensity, const TestFunction& f);

/// CSV export with header replicate_id,point.
void write_configurations(const std::filesystem::path& path, std::span<const PointConfiguration> replicates);

}  // namespace idpoint
