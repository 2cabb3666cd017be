#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "relfuse/discrete_cdf.hpp"

namespace relfuse {

/// One lifetime observation. event == true is an observed failure,
/// false is a right-censored unit that survived past `time`.
struct LifetimeSample {
  double time = 0.0;
  bool event = true;
};

/// Risk-set counts at each distinct sample time.
struct CountingSummary {
  std::vector<double> times;           // strictly increasing
  std::vector<std::size_t> at_risk;    // M(t) = #{i : T_i >= t}
  std::vector<std::size_t> failures;   // J(t) = #{i : C_i = 1, T_i = t}
};

struct BetaShape {
  double a = 1.0;
  double b = 1.0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Discrete beta-Stacy process: a base CDF G on a finite grid plus a
/// precision alpha(t_i) at each grid point.
///
/// Two views of the precision are kept:
///  * precision(i) is the parameter as a function of t. It is undefined
///    (nullopt) where G(t_i) = 1, because the marginal of F there is a point
///    mass at 1, and at grid points outside the estimable range.
///  * jump_precision(i) is the raw weight of the jump at t_i, i.e. the shapes
///    of the jump fraction are (alpha * dG, alpha * (1 - G)). At the point
///    where G first reaches 1 it equals alpha(t_i-) and is still needed to
///    update on data that extend past that point.
///
/// Between grid points the precision is a right-continuous step function;
/// before the first grid point it takes the first grid value.
///
/// A default-constructed process has an empty grid and carries no
/// information (zero precision everywhere).
class BetaStacyProcess {
 public:
  static constexpr std::size_t kAllEstimable = std::numeric_limits<std::size_t>::max();

  BetaStacyProcess() = default;

  /// `estimable` is the number of leading grid points the process informs;
  /// later points carry the last estimable base value and no precision.
  BetaStacyProcess(DiscreteCdf base, std::vector<double> jump_precision,
                   std::size_t estimable = kAllEstimable);

  const DiscreteCdf& base() const noexcept { return base_; }
  std::span<const double> grid() const noexcept { return base_.grid(); }
  std::size_t size() const noexcept { return base_.size(); }
  bool empty() const noexcept { return base_.empty(); }

  std::optional<double> precision(std::size_t i) const;
  double jump_precision(std::size_t i) const { return precision_[i]; }
  std::span<const double> jump_precisions() const noexcept { return precision_; }

  /// Step-function precision used for update factors at arbitrary times.
  double precision_at(double t) const;

  std::size_t estimable_size() const noexcept { return estimable_; }
  bool fully_estimable() const noexcept { return estimable_ == size(); }
  bool is_estimable(double t) const;

  /// True for t past the last grid point while the base is still below 1:
  /// the value is carried forward but nothing observed informs it.
  bool beyond_data(double t) const;

 private:
  DiscreteCdf base_;
  std::vector<double> precision_;
  std::size_t estimable_ = 0;
};

/// Dirichlet-process style prior: constant precision on a user CDF ending at 1.
BetaStacyProcess dp_prior(std::vector<double> grid, std::vector<double> cdf_values,
                          double precision);

/// General prior with a per-point precision; same checks as dp_prior.
BetaStacyProcess bsp_prior(std::vector<double> grid, std::vector<double> cdf_values,
                           std::vector<double> precision);

CountingSummary counting_summary(std::span<const LifetimeSample> samples);

/// Conjugate update under right censoring. The posterior grid is the sorted
/// union of the prior grid and every distinct sample time.
BetaStacyProcess posterior_update(const BetaStacyProcess& prior,
                                  std::span<const LifetimeSample> samples);

/// E[F(t)] = G(t). Throws NotEstimable outside the estimable range.
double mean(const BetaStacyProcess& bsp, double t);

/// E[F(t)^2] from the jump construction. Throws NotEstimable outside the
/// estimable range.
double second_moment(const BetaStacyProcess& bsp, double t);

/// E[F(t_i)^2] at every estimable grid point in one pass.
std::vector<double> second_moments(const BetaStacyProcess& bsp);

/// Beta shapes with mean m and second moment s. Throws DegenerateMoments
/// when s <= m^2 (no variance) or s >= m (variance of a two-point law or more).
BetaShape beta_match(double m, double s);

/// Equal-tailed quantiles of the Beta matched to (m, s), with the degenerate
/// conventions: zero variance gives a zero-width interval at m, and the
/// Bernoulli limit s == m gives its own quantiles.
Interval moment_interval(double m, double s, double level);

/// Equal-tailed pointwise credible interval for F(t).
Interval credible_interval(const BetaStacyProcess& bsp, double t, double level);

}  // namespace relfuse
