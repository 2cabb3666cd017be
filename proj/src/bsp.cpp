#include "relfuse/bsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "relfuse/errors.hpp"

namespace relfuse {

namespace {

void check_precision(std::span<const double> precision) {
  for (std::size_t i = 0; i < precision.size(); ++i) {
    if (!std::isfinite(precision[i]) || precision[i] < 0.0) {
      throw InvalidInput("precision must be finite and nonnegative (index " + std::to_string(i) +
                         ")");
    }
  }
}

// Variance of F(t_k) in scaled form: Var F = (1 - G)^2 * expm1(L), with
// L = sum_i log1p(dG_i / ((alpha_i (1 - G_i-) + 1) (1 - G_i))).
// Expanding each factor of the second-moment product
//   (1-G_i)[alpha(1-G_i)+1] / ((1-G_i-)[alpha(1-G_i-)+1])
// as (1-G_i)^2/(1-G_i-)^2 * (1 + dG/((alpha(1-G_i-)+1)(1-G_i))) gives this form,
// which avoids the cancellation in "product - 1 + 2G".
class SecondMomentAccumulator {
 public:
  // Returns E[F(t_i)^2] after absorbing grid point i.
  double absorb(const BetaStacyProcess& bsp, std::size_t i) {
    const double g = bsp.base().value(i);
    if (g >= 1.0) {
      terminal_ = true;
    }
    if (terminal_) return 1.0;
    const double g_left = bsp.base().left_limit(i);
    const double jump = g - g_left;
    if (jump > 0.0) {
      const double alpha = bsp.jump_precision(i);
      log_ratio_ += std::log1p(jump / ((alpha * (1.0 - g_left) + 1.0) * (1.0 - g)));
    }
    const double survival = 1.0 - g;
    return g * g + survival * survival * std::expm1(log_ratio_);
  }

 private:
  double log_ratio_ = 0.0;
  bool terminal_ = false;
};

}  // namespace

BetaStacyProcess::BetaStacyProcess(DiscreteCdf base, std::vector<double> jump_precision,
                                   std::size_t estimable)
    : base_(std::move(base)), precision_(std::move(jump_precision)) {
  if (precision_.size() != base_.size()) {
    throw InvalidInput("BetaStacyProcess: precision length differs from grid length");
  }
  check_precision(precision_);
  estimable_ = std::min(estimable, base_.size());
}

std::optional<double> BetaStacyProcess::precision(std::size_t i) const {
  if (i >= estimable_ || base_.value(i) >= 1.0) return std::nullopt;
  return precision_[i];
}

double BetaStacyProcess::precision_at(double t) const {
  if (precision_.empty()) return 0.0;
  const std::size_t k = base_.count_le(t);
  return k == 0 ? precision_.front() : precision_[k - 1];
}

bool BetaStacyProcess::is_estimable(double t) const {
  return estimable_ == size() || t < base_.time(estimable_);
}

bool BetaStacyProcess::beyond_data(double t) const {
  if (empty()) return true;
  return fully_estimable() && t > base_.grid().back() && base_.values().back() < 1.0;
}

BetaStacyProcess bsp_prior(std::vector<double> grid, std::vector<double> cdf_values,
                           std::vector<double> precision) {
  if (grid.empty()) throw InvalidInput("prior: empty grid");
  if (precision.size() != grid.size()) {
    throw InvalidInput("prior: precision length differs from grid length");
  }
  check_precision(precision);
  if (std::abs(cdf_values.back() - 1.0) > 1e-12) {
    throw InvalidInput("prior: final CDF value must be 1");
  }
  cdf_values.back() = 1.0;
  return BetaStacyProcess(DiscreteCdf(std::move(grid), std::move(cdf_values)),
                          std::move(precision));
}

BetaStacyProcess dp_prior(std::vector<double> grid, std::vector<double> cdf_values,
                          double precision) {
  std::vector<double> alpha(grid.size(), precision);
  return bsp_prior(std::move(grid), std::move(cdf_values), std::move(alpha));
}

CountingSummary counting_summary(std::span<const LifetimeSample> samples) {
  std::vector<LifetimeSample> sorted(samples.begin(), samples.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!std::isfinite(sorted[i].time) || sorted[i].time <= 0.0) {
      throw InvalidInput("sample times must be positive (sample " + std::to_string(i) + ")");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const LifetimeSample& x, const LifetimeSample& y) { return x.time < y.time; });

  CountingSummary out;
  const std::size_t n = sorted.size();
  for (std::size_t k = 0; k < n;) {
    const double t = sorted[k].time;
    std::size_t failures = 0;
    std::size_t j = k;
    for (; j < n && sorted[j].time == t; ++j) {
      if (sorted[j].event) ++failures;
    }
    out.times.push_back(t);
    out.at_risk.push_back(n - k);
    out.failures.push_back(failures);
    k = j;
  }
  return out;
}

BetaStacyProcess posterior_update(const BetaStacyProcess& prior,
                                  std::span<const LifetimeSample> samples) {
  const CountingSummary counts = counting_summary(samples);
  const std::vector<double> grid = merge_grids(prior.grid(), counts.times);

  std::vector<double> values(grid.size(), 0.0);
  std::vector<double> alpha(grid.size(), 0.0);
  std::size_t estimable = grid.size();

  // Survival 1 - G* is tracked as a running log to keep long products accurate.
  double log_survival = 0.0;
  std::size_t next_count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = grid[i];
    if (std::isinf(log_survival)) {
      // Past the point where G* reached 1: no more mass to place.
      values[i] = 1.0;
      continue;
    }

    std::size_t at_risk = 0;
    std::size_t failures = 0;
    while (next_count < counts.times.size() && counts.times[next_count] < u) ++next_count;
    if (next_count < counts.times.size()) {
      at_risk = counts.at_risk[next_count];
      if (counts.times[next_count] == u) failures = counts.failures[next_count];
    }

    const double g = prior.base()(u);
    const double g_left = prior.base().left_value(u);
    const double a = prior.precision_at(u);
    const double total = a * (1.0 - g_left) + static_cast<double>(at_risk);
    if (!(total > 0.0)) {
      estimable = i;
      break;
    }
    const double remain = a * (1.0 - g) + static_cast<double>(at_risk - failures);
    const double survival_left = std::exp(log_survival);
    log_survival += std::log(remain) - std::log(total);
    values[i] = -std::expm1(log_survival);
    if (remain > 0.0) {
      alpha[i] = remain / std::exp(log_survival);
    } else {
      // G* jumps to 1 here; keep the left-limit form alpha*(t-) for the jump weight.
      alpha[i] = total / survival_left;
    }
  }
  for (std::size_t i = estimable; i < grid.size(); ++i) {
    values[i] = i == 0 ? 0.0 : values[i - 1];
    alpha[i] = 0.0;
  }
  // Guard against last-ulp reversals from exp/expm1 round trips.
  for (std::size_t i = 1; i < values.size(); ++i) values[i] = std::max(values[i], values[i - 1]);

  return BetaStacyProcess(DiscreteCdf(grid, std::move(values)), std::move(alpha), estimable);
}

double mean(const BetaStacyProcess& bsp, double t) {
  if (!bsp.is_estimable(t)) {
    throw NotEstimable("mean: t = " + std::to_string(t) + " lies outside the estimable range");
  }
  return bsp.base()(t);
}

std::vector<double> second_moments(const BetaStacyProcess& bsp) {
  std::vector<double> out(bsp.estimable_size());
  SecondMomentAccumulator acc;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc.absorb(bsp, i);
  return out;
}

double second_moment(const BetaStacyProcess& bsp, double t) {
  if (!bsp.is_estimable(t)) {
    throw NotEstimable("second_moment: t = " + std::to_string(t) +
                       " lies outside the estimable range");
  }
  const std::size_t k = bsp.base().count_le(t);
  double s = 0.0;
  SecondMomentAccumulator acc;
  for (std::size_t i = 0; i < k; ++i) s = acc.absorb(bsp, i);
  return s;
}

BetaShape beta_match(double m, double s) {
  if (!(m > 0.0 && m < 1.0)) {
    throw DegenerateMoments("beta_match: mean must lie strictly inside (0,1)");
  }
  const double v = s - m * m;
  if (!(v > 0.0)) throw DegenerateMoments("beta_match: zero variance");
  const double bound = m * (1.0 - m);
  if (!(v < bound)) throw DegenerateMoments("beta_match: variance too large for a beta law");
  const double k = bound / v - 1.0;
  return {m * k, (1.0 - m) * k};
}

Interval moment_interval(double m, double s, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidInput("credible level must lie in (0,1)");
  }
  if (m <= 0.0) return {0.0, 0.0};
  if (m >= 1.0) return {1.0, 1.0};
  const double lo_p = 0.5 * (1.0 - level);
  const double hi_p = 1.0 - lo_p;
  const double bound = m * (1.0 - m);
  const double v = s - m * m;
  if (v <= bound * 1e-14) return {m, m};
  if (v >= bound * (1.0 - 1e-12)) {
    // Two-point law on {0, 1} with P(F = 1) = m.
    return {lo_p <= 1.0 - m ? 0.0 : 1.0, hi_p <= 1.0 - m ? 0.0 : 1.0};
  }
  const BetaShape shape = beta_match(m, s);
  double lower = boost::math::ibeta_inv(shape.a, shape.b, lo_p);
  double upper = boost::math::ibeta_inv(shape.a, shape.b, hi_p);
  // Extremely skewed shapes can put the mean outside the central quantiles.
  lower = std::min(lower, m);
  upper = std::max(upper, m);
  return {lower, upper};
}

Interval credible_interval(const BetaStacyProcess& bsp, double t, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidInput("credible level must lie in (0,1)");
  }
  return moment_interval(mean(bsp, t), second_moment(bsp, t), level);
}

}  // namespace relfuse
