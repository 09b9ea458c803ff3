#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace idpoint {

/// A nonincreasing tail function x -> H(x) known on a grid. Values are
/// interpolated linearly in log-log coordinates between grid points (linearly
/// when one end is zero) and held constant below the first grid point.
/// Beyond the last grid point the tail must be zero; otherwise evaluation
/// there is out of domain.
class TabulatedTail {
public:
  TabulatedTail(std::vector<double> x, std::vector<double> tail);

  /// Two-column CSV (x, H(x)) with a header row.
  static TabulatedTail load_csv(const std::filesystem::path& path);

  double operator()(double x) const;
  /// inf{x > 0 : H(x) <= y}; +inf when the tail never drops to y on the grid.
  double inverse(double y) const;
  /// -dH/dx, zero below the grid.
  double density(double x) const;

  double total_mass() const { return tail_.front(); }
  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }
  bool vanishes_beyond_grid() const { return tail_.back() == 0.0; }

  std::span<const double> nodes() const { return x_; }
  std::span<const double> values() const { return tail_; }

private:
  std::size_t cell(double x) const;
  bool log_cell(std::size_t k) const { return tail_[k - 1] > 0.0 && tail_[k] > 0.0; }

  std::vector<double> x_;
  std::vector<double> tail_;
};

}  // namespace idpoint
