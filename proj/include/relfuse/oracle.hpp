#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relfuse/bsp.hpp"
#include "relfuse/data_io.hpp"
#include "relfuse/rbd.hpp"

namespace relfuse::oracle {

/// SplitMix64: tiny 64-bit generator with independent per-index streams, so
/// path p of a simulation always sees the same numbers regardless of how
/// paths are split across threads.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /// Stream `index` of master seed `seed`.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Per-grid-point Monte Carlo estimates of E[F] and E[F^2] with standard errors.
struct PathMoments {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> mean_se;
  std::vector<double> second;
  std::vector<double> second_se;
};

/// Samples paths R(t_k) = prod_{j<=k} (1 - W_j) with independent jump fractions
/// W_j ~ Beta(alpha_j dG_j, alpha_j (1 - G_j)); zero-mass points give W_j = 0
/// and the point where G reaches 1 gives W_j = 1. Throws InvalidInput for a
/// nonpositive shape at a positive-mass, non-terminal jump.
PathMoments simulate_bsp_paths(const BetaStacyProcess& bsp, std::size_t n_paths,
                               std::uint64_t seed);

/// Random process for property checks: 2..max_points grid points, positive
/// increments, per-point precision in [0.5, 40]. With `allow_terminal` the
/// base may end at 1.
BetaStacyProcess random_bsp(SplitMix64& rng, std::size_t max_points, bool allow_terminal = false);

/// Monte Carlo moments of a block diagram's CDF when each leaf's F(t_i) is an
/// independent Beta with the given per-point shapes (leaf label -> one shape
/// per grid point; a shape with a <= 0 means F = 0 there, b <= 0 means F = 1).
PathMoments simulate_structure_pointwise(const RbdNode& node,
                                         const std::map<std::string, std::vector<BetaShape>>& leaves,
                                         const std::vector<double>& grid, std::size_t n_draws,
                                         std::uint64_t seed);

/// Exact density of X1 X2 X3 for independent Beta(9,3), Beta(8,3), Beta(4,2).
/// Throws InvalidInput outside [0,1].
double exact_three_beta_product_pdf(double y);

/// Exact CDF of the same product at n + 1 equally spaced points of [0, 1],
/// by Gauss-Kronrod quadrature of the density on each subinterval.
std::vector<std::pair<double, double>> exact_three_beta_product_cdf(std::size_t n);

/// Random right-censored sample of size 1..max_n with deliberate ties and at
/// least one failure.
std::vector<LifetimeSample> random_censored_samples(SplitMix64& rng, std::size_t max_n);

/// Product-limit estimate at the distinct failure times. Throws InvalidInput
/// if there are no failures.
DiscreteCdf kaplan_meier(std::span<const LifetimeSample> samples);

/// A lifetime distribution we can both sample and evaluate.
struct LifetimeModel {
  std::function<double(double)> cdf;
  std::function<double(SplitMix64&)> sample;
  /// P(C < T) for independent C ~ Exponential(rate).
  std::function<double(double)> censor_probability;
};

LifetimeModel weibull_model(double shape, double scale);

/// Inverse-CDF sampler on a step CDF that ends at 1.
LifetimeModel discrete_model(const DiscreteCdf& cdf);

/// Lifetime of a block diagram whose components follow `components`.
LifetimeModel structure_model(const RbdNode& node,
                              const std::map<std::string, LifetimeModel>& components);

/// Models for every labelled node of the tree (components and labelled groups).
std::map<std::string, LifetimeModel> node_models(
    const RbdNode& root, const std::map<std::string, LifetimeModel>& components);

/// Exponential censoring rate giving P(C < T) = fraction, found by bisection.
double calibrate_censoring_rate(const LifetimeModel& model, double fraction);

/// Draws n lifetimes per node with independent exponential right censoring.
/// Output is ordered by label and reproducible for a given seed.
std::vector<Dataset> simulate_lifetimes(const std::map<std::string, LifetimeModel>& models,
                                        std::size_t n_per_node, double censor_fraction,
                                        std::uint64_t seed);

/// Synthetic stand-in for the hybrid-electric aircraft propulsion system:
/// propeller, drive shaft and gearing in series with a parallel pair of an
/// electric branch (motor, batteries, motor controller, serpentine belt) and a
/// gasoline branch (engine, gas delivery). Component lifetimes are Weibull
/// with invented parameters; no real test data exist.
struct DemoSystem {
  std::string rbd_source;
  RbdNode root;
  std::map<std::string, LifetimeModel> components;
  std::map<std::string, LifetimeModel> nodes;  // every labelled node
  std::size_t n_per_node = 30;
  double censor_fraction = 0.15;
};

DemoSystem sherpa_demo();

/// Loads a demo-style JSON configuration:
/// {"rbd": "...", "components": {"id": {"weibull": {"shape": k, "scale": s}}},
///  "n": 30, "censor_fraction": 0.15}
DemoSystem load_demo_config(const std::string& json_text);

}  // namespace relfuse::oracle
