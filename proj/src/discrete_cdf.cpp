#include "relfuse/discrete_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "relfuse/errors.hpp"

namespace relfuse {

DiscreteCdf::DiscreteCdf(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() != values_.size()) {
    throw InvalidInput("DiscreteCdf: grid and values differ in length");
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double t = grid_[i];
    const double v = values_[i];
    if (!std::isfinite(t) || t <= 0.0) {
      throw InvalidInput("DiscreteCdf: grid times must be finite and positive (index " +
                         std::to_string(i) + ")");
    }
    if (i > 0 && t <= grid_[i - 1]) {
      throw InvalidInput("DiscreteCdf: grid must be strictly increasing (index " +
                         std::to_string(i) + ")");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput("DiscreteCdf: value outside [0,1] at index " + std::to_string(i));
    }
    if (i > 0 && v < values_[i - 1]) {
      throw InvalidInput("DiscreteCdf: values must be nondecreasing (index " +
                         std::to_string(i) + ")");
    }
  }
}

std::size_t DiscreteCdf::count_le(double t) const {
  return static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), t) -
                                  grid_.begin());
}

double DiscreteCdf::operator()(double t) const {
  const std::size_t k = count_le(t);
  return k == 0 ? 0.0 : values_[k - 1];
}

double DiscreteCdf::left_value(double t) const {
  const auto k = static_cast<std::size_t>(std::lower_bound(grid_.begin(), grid_.end(), t) -
                                          grid_.begin());
  return k == 0 ? 0.0 : values_[k - 1];
}

std::vector<double> merge_grids(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace relfuse
