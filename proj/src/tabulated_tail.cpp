#include "idpoint/tabulated_tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idpoint/csv.hpp"
#include "idpoint/errors.hpp"

namespace idpoint {

TabulatedTail::TabulatedTail(std::vector<double> x, std::vector<double> tail)
    : x_(std::move(x)), tail_(std::move(tail)) {
  if (x_.size() != tail_.size() || x_.size() < 2) {
    throw ConfigError("tabulated tail needs at least two (x, H) pairs of equal length");
  }
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (!(x_[k] > 0.0) || !std::isfinite(x_[k])) throw ConfigError("tabulated tail: x must be positive and finite");
    if (!(tail_[k] >= 0.0) || !std::isfinite(tail_[k])) {
      throw ConfigError("tabulated tail: H(x) must be nonnegative and finite");
    }
    if (k > 0 && !(x_[k] > x_[k - 1])) throw ConfigError("tabulated tail: x must be strictly increasing");
    if (k > 0 && tail_[k] > tail_[k - 1]) throw ConfigError("tabulated tail: H must be nonincreasing");
  }
}

TabulatedTail TabulatedTail::load_csv(const std::filesystem::path& path) {
  const CsvTable table = read_numeric_csv(path);
  if (table.header.size() != 2) throw ConfigError(path.string() + ": tabulated tail needs two columns (x, H)");
  std::vector<double> x;
  std::vector<double> h;
  for (const auto& row : table.rows) {
    x.push_back(row[0]);
    h.push_back(row[1]);
  }
  return TabulatedTail(std::move(x), std::move(h));
}

std::size_t TabulatedTail::cell(double x) const {
  // Index k with x_[k-1] <= x < x_[k].
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  return static_cast<std::size_t>(it - x_.begin());
}

double TabulatedTail::operator()(double x) const {
  if (x < x_.front()) return tail_.front();
  if (x >= x_.back()) {
    if (x == x_.back() || tail_.back() == 0.0) return tail_.back();
    throw DomainError("tabulated tail evaluated at x = " + std::to_string(x) +
                      " beyond the grid, where the tail is not known");
  }
  const std::size_t k = cell(x);
  const double x0 = x_[k - 1];
  const double x1 = x_[k];
  const double h0 = tail_[k - 1];
  const double h1 = tail_[k];
  if (log_cell(k)) {
    const double t = std::log(x / x0) / std::log(x1 / x0);
    return h0 * std::exp(t * std::log(h1 / h0));
  }
  return h0 + (h1 - h0) * (x - x0) / (x1 - x0);
}

double TabulatedTail::inverse(double y) const {
  if (y >= tail_.front()) return 0.0;
  if (y < tail_.back()) return std::numeric_limits<double>::infinity();
  // First grid index whose tail value is <= y.
  const auto it = std::lower_bound(tail_.begin(), tail_.end(), y, [](double h, double v) { return h > v; });
  const std::size_t k = static_cast<std::size_t>(it - tail_.begin());
  const double x0 = x_[k - 1];
  const double x1 = x_[k];
  const double h0 = tail_[k - 1];
  const double h1 = tail_[k];
  if (log_cell(k)) {
    const double slope = std::log(h1 / h0) / std::log(x1 / x0);
    return std::min(x1, x0 * std::exp(std::log(y / h0) / slope));
  }
  return x0 + (h0 - y) / (h0 - h1) * (x1 - x0);
}

double TabulatedTail::density(double x) const {
  if (x < x_.front() || x >= x_.back()) return 0.0;
  const std::size_t k = cell(x);
  const double x0 = x_[k - 1];
  const double x1 = x_[k];
  const double h0 = tail_[k - 1];
  const double h1 = tail_[k];
  if (log_cell(k)) {
    const double slope = std::log(h1 / h0) / std::log(x1 / x0);
    return -slope * (*this)(x) / x;
  }
  return (h0 - h1) / (x1 - x0);
}

}  // namespace idpoint
