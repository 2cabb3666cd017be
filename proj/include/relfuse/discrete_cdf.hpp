#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relfuse {

/// Right-continuous step CDF with jumps on a finite, strictly increasing grid of
/// positive times. The implicit point t0 = 0 carries value 0.
class DiscreteCdf {
 public:
  DiscreteCdf() = default;

  /// Throws InvalidInput unless grid is strictly increasing and positive and
  /// values are nondecreasing in [0, 1].
  DiscreteCdf(std::vector<double> grid, std::vector<double> values);

  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return grid_.size(); }
  bool empty() const noexcept { return grid_.empty(); }

  double time(std::size_t i) const { return grid_[i]; }
  double value(std::size_t i) const { return values_[i]; }

  /// Value just before grid[i], i.e. the previous grid value (0 for i == 0).
  double left_limit(std::size_t i) const { return i == 0 ? 0.0 : values_[i - 1]; }

  /// Number of grid points <= t.
  std::size_t count_le(double t) const;

  /// Step lookup: value at the largest grid point <= t, or 0 before the grid.
  double operator()(double t) const;

  /// Value just before t (largest grid point strictly < t).
  double left_value(double t) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
};

/// Sorted union of two increasing grids, duplicates removed.
std::vector<double> merge_grids(std::span<const double> a, std::span<const double> b);

}  // namespace relfuse
