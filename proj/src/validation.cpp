#include "relfuse/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "relfuse/bsp.hpp"
#include "relfuse/moment_fusion.hpp"
#include "relfuse/oracle.hpp"

namespace relfuse {

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

Outcome prior_only_example() {
  const BetaStacyProcess prior = dp_prior({1, 2, 3}, {1.0 / 3, 2.0 / 3, 1.0}, 5.0);
  const BetaStacyProcess post = posterior_update(prior, {});
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(post.base().value(i) - prior.base().value(i)) > 1e-12 ||
        std::abs(post.jump_precision(i) - prior.jump_precision(i)) > 1e-12) {
      return fail("posterior differs from prior at t = " + num(post.base().time(i)));
    }
  }
  return {};
}

Outcome data_only_example() {
  const std::vector<LifetimeSample> data{{1, true}, {2, true}, {3, true}};
  const BetaStacyProcess post = posterior_update(BetaStacyProcess{}, data);
  const double expected[] = {1.0 / 3, 2.0 / 3, 1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(post.base().value(i) - expected[i]) > 1e-12 ||
        std::abs(post.jump_precision(i) - 3.0) > 1e-12) {
      return fail("ECDF/precision mismatch at t = " + num(post.base().time(i)));
    }
  }
  return {};
}

Outcome kaplan_meier_equivalence(std::uint64_t seed) {
  oracle::SplitMix64 rng = oracle::SplitMix64::stream(seed, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const auto samples = oracle::random_censored_samples(rng, 50);
    const DiscreteCdf km = oracle::kaplan_meier(samples);
    const BetaStacyProcess post = posterior_update(BetaStacyProcess{}, samples);
    for (std::size_t i = 0; i < km.size(); ++i) {
      const double got = mean(post, km.time(i));
      if (std::abs(got - km.value(i)) > 1e-12) {
        return fail("dataset " + std::to_string(rep) + ": " + num(got) + " vs KM " +
                    num(km.value(i)));
      }
    }
  }
  return {};
}

bool within_se(double got, double mc, double se, double k = 4.0) {
  return std::abs(got - mc) <= k * se + 1e-12;
}

Outcome second_moment_vs_paths(std::uint64_t seed) {
  oracle::SplitMix64 rng = oracle::SplitMix64::stream(seed, 2);
  for (int rep = 0; rep < 5; ++rep) {
    const BetaStacyProcess bsp = oracle::random_bsp(rng, 12, true);
    const auto mc = oracle::simulate_bsp_paths(bsp, 50000, seed + 100 + rep);
    const auto second = second_moments(bsp);
    for (std::size_t i = 0; i < second.size(); ++i) {
      if (!within_se(bsp.base().value(i), mc.mean[i], mc.mean_se[i]) ||
          !within_se(second[i], mc.second[i], mc.second_se[i])) {
        return fail("process " + std::to_string(rep) + " point " + std::to_string(i));
      }
    }
  }
  return {};
}

std::vector<BetaShape> pointwise_shapes(const MomentCurve& c) {
  std::vector<BetaShape> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double m = c.first[i];
    if (m <= 0.0) {
      out.push_back({0.0, 1.0});
    } else if (m >= 1.0) {
      out.push_back({1.0, 0.0});
    } else {
      out.push_back(beta_match(m, c.second[i]));
    }
  }
  return out;
}

Outcome fusion_vs_monte_carlo(std::uint64_t seed) {
  oracle::SplitMix64 rng = oracle::SplitMix64::stream(seed, 3);
  for (int rep = 0; rep < 10; ++rep) {
    auto [a, b] = align_grids(moments_of(oracle::random_bsp(rng, 8)),
                              moments_of(oracle::random_bsp(rng, 8)));
    const std::map<std::string, std::vector<BetaShape>> leaves{{"a", pointwise_shapes(a)},
                                                              {"b", pointwise_shapes(b)}};
    for (const bool is_series : {true, false}) {
      const RbdNode node = is_series ? series({component("a"), component("b")})
                                     : parallel({component("a"), component("b")});
      const MomentCurve fused = is_series ? combine_series(a, b) : combine_parallel(a, b);
      const auto mc = oracle::simulate_structure_pointwise(node, leaves, a.grid, 40000,
                                                           seed + 1000 + rep);
      for (std::size_t i = 0; i < fused.size(); ++i) {
        if (!within_se(fused.first[i], mc.mean[i], mc.mean_se[i]) ||
            !within_se(fused.second[i], mc.second[i], mc.second_se[i])) {
          return fail(std::string(is_series ? "series" : "parallel") + " case " +
                      std::to_string(rep) + " point " + std::to_string(i));
        }
      }
    }
  }
  return {};
}

Outcome degenerate_series(bool typo) {
  MomentCurve zero{{1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}};
  double second = 0.0;
  if (typo) {
    const double g = zero.first[0];
    const double s = zero.second[0];
    second = 1.0 - 2.0 * g * g + (1.0 - 2.0 * g + s) * (1.0 - 2.0 * g + s);
  } else {
    second = combine_series(zero, zero).second[0];
  }
  if (second != 0.0) return fail("second moment " + num(second) + ", expected 0");
  return {};
}

Outcome recovery_roundtrip(std::uint64_t seed) {
  oracle::SplitMix64 rng = oracle::SplitMix64::stream(seed, 4);
  for (int rep = 0; rep < 20; ++rep) {
    const MomentCurve curve = moments_of(oracle::random_bsp(rng, 20, true));
    const MomentCurve back = moments_of(recover_precision(curve));
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (std::abs(back.first[i] - curve.first[i]) > 1e-9 ||
          std::abs(back.second[i] - curve.second[i]) > 1e-9) {
        return fail("curve " + std::to_string(rep) + " point " + std::to_string(i));
      }
    }
  }
  return {};
}

Outcome beta_approximation() {
  const auto cdf = oracle::exact_three_beta_product_cdf(2000);
  if (std::abs(cdf.back().second - 1.0) > 1e-6) {
    return fail("density integrates to " + num(cdf.back().second));
  }
  const double m = (9.0 / 12) * (8.0 / 11) * (4.0 / 6);
  const double s = (9.0 * 10 / (12 * 13)) * (8.0 * 9 / (11 * 12)) * (4.0 * 5 / (6 * 7));
  const BetaShape shape = beta_match(m, s);
  double ks = 0.0;
  for (const auto& [y, f] : cdf) {
    ks = std::max(ks, std::abs(f - boost::math::ibeta(shape.a, shape.b, y)));
  }
  if (!(ks < 0.05)) return fail("KS distance " + num(ks));
  return {};
}

}  // namespace

bool run_validation(std::ostream& report, const ValidationOptions& options) {
  const std::uint64_t seed = options.seed;
  const std::pair<const char*, std::function<Outcome()>> checks[] = {
      {"prior-only worked example", prior_only_example},
      {"data-only worked example", data_only_example},
      {"kaplan-meier equivalence", [seed] { return kaplan_meier_equivalence(seed); }},
      {"second moment vs sampled paths", [seed] { return second_moment_vs_paths(seed); }},
      {"series/parallel vs monte carlo", [seed] { return fusion_vs_monte_carlo(seed); }},
      {"degenerate series second moment",
       [&options] { return degenerate_series(options.inject_series_typo); }},
      {"precision recovery roundtrip", [seed] { return recovery_roundtrip(seed); }},
      {"beta approximation of a beta product", beta_approximation},
  };
  bool all = true;
  for (const auto& [name, run] : checks) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    report << (o.pass ? "PASS " : "FAIL ") << name;
    if (!o.pass) report << ": " << o.detail;
    report << '\n';
  }
  return all;
}

}  // namespace relfuse
