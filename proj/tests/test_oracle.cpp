#include "doctest.h"

#include <cmath>
#include <random>
#include <map>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "relfuse/bsp.hpp"
#include "relfuse/errors.hpp"
#include "relfuse/oracle.hpp"

using namespace relfuse;
using namespace relfuse::oracle;

TEST_CASE("streams are reproducible and distinct") {
  auto a = SplitMix64::stream(5, 1);
  auto b = SplitMix64::stream(5, 1);
  auto c = SplitMix64::stream(5, 2);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
}

TEST_CASE("path simulation of the empirical posterior") {
  const std::vector<LifetimeSample> data{{1, true}, {2, true}, {3, true}};
  const auto post = posterior_update(BetaStacyProcess{}, data);
  const auto mc = simulate_bsp_paths(post, 200000, 3);
  CHECK(std::abs(mc.mean[0] - 1.0 / 3) <= 4 * mc.mean_se[0]);
  CHECK(std::abs(mc.second[0] - 1.0 / 6) <= 4 * mc.second_se[0]);
  CHECK(mc.mean[2] == 1.0);

  const auto again = simulate_bsp_paths(post, 200000, 3);
  CHECK(again.mean == mc.mean);
  CHECK(again.second == mc.second);
}

TEST_CASE("zero-mass points and huge precision") {
  const auto flat_gap = bsp_prior({1, 2, 3}, {0.3, 0.3, 1.0}, {4.0, 4.0, 4.0});
  const auto mc = simulate_bsp_paths(flat_gap, 20000, 4);
  CHECK(mc.mean[1] == mc.mean[0]);
  CHECK(mc.second[1] == mc.second[0]);

  const auto sharp = dp_prior({1, 2}, {0.4, 1.0}, 1e10);
  const auto s = simulate_bsp_paths(sharp, 20000, 5);
  CHECK(s.second[0] - s.mean[0] * s.mean[0] < 1e-8);

  CHECK_THROWS_AS(simulate_bsp_paths(dp_prior({1, 2}, {0.4, 1.0}, 0.0), 100, 1), InvalidInput);
}

TEST_CASE("exact three-beta product density") {
  using boost::math::quadrature::gauss_kronrod;
  const auto pdf = [](double y) { return exact_three_beta_product_pdf(y); };
  CHECK(exact_three_beta_product_pdf(0.0) == 0.0);
  CHECK_THROWS_AS(exact_three_beta_product_pdf(-0.1), InvalidInput);
  CHECK_THROWS_AS(exact_three_beta_product_pdf(1.1), InvalidInput);
  const double total = gauss_kronrod<double, 61>::integrate(pdf, 0.0, 1.0, 15, 1e-14);
  const double m = gauss_kronrod<double, 61>::integrate([&](double y) { return y * pdf(y); }, 0.0,
                                                        1.0, 15, 1e-14);
  CHECK(std::abs(total - 1.0) <= 1e-6);
  CHECK(std::abs(m - 4.0 / 11) <= 1e-6);
  const auto cdf = exact_three_beta_product_cdf(100);
  CHECK(cdf.size() == 101);
  CHECK(cdf.front().second == 0.0);
  CHECK(std::abs(cdf.back().second - 1.0) <= 1e-6);
}

TEST_CASE("beta match of sampled product moments") {
  // Moments of 200000 simulated products, matched to a beta, stay within KS
  // 0.05 of the exact product CDF.
  auto rng = SplitMix64::stream(41, 0);
  std::gamma_distribution<double> g;
  auto beta = [&](double a, double b) {
    const double x = g(rng, std::gamma_distribution<double>::param_type(a, 1.0));
    const double y = g(rng, std::gamma_distribution<double>::param_type(b, 1.0));
    return x / (x + y);
  };
  double s1 = 0.0;
  double s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double y = beta(9, 3) * beta(8, 3) * beta(4, 2);
    s1 += y;
    s2 += y * y;
  }
  const auto shape = beta_match(s1 / n, s2 / n);
  double ks = 0.0;
  for (const auto& [y, f] : exact_three_beta_product_cdf(1000)) {
    ks = std::max(ks, std::abs(f - boost::math::ibeta(shape.a, shape.b, y)));
  }
  CHECK(ks < 0.05);
}

TEST_CASE("kaplan-meier oracle") {
  const std::vector<LifetimeSample> full{{1, true}, {2, true}, {3, true}};
  const auto km = kaplan_meier(full);
  CHECK(km.value(0) == doctest::Approx(1.0 / 3));
  CHECK(km.value(1) == doctest::Approx(2.0 / 3));
  CHECK(km.value(2) == doctest::Approx(1.0));

  const std::vector<LifetimeSample> cens{{1, true}, {2, false}, {3, true}};
  const auto k2 = kaplan_meier(cens);
  REQUIRE(k2.size() == 2);
  CHECK(k2.value(0) == doctest::Approx(1.0 / 3));
  CHECK(k2.value(1) == doctest::Approx(1.0));

  const std::vector<LifetimeSample> one{{7, true}};
  CHECK(kaplan_meier(one).value(0) == 1.0);

  const std::vector<LifetimeSample> none{{7, false}};
  CHECK_THROWS_AS(kaplan_meier(none), InvalidInput);
}

TEST_CASE("lifetime simulation") {
  const auto demo = sherpa_demo();
  CHECK(demo.components.size() == 9);
  CHECK(demo.nodes.size() == 13);

  SUBCASE("no censoring") {
    const auto ds = simulate_lifetimes(demo.nodes, 30, 0.0, 1);
    CHECK(ds.size() == 13);
    for (const auto& d : ds) {
      CHECK(d.samples.size() == 30);
      for (const auto& s : d.samples) CHECK(s.event);
    }
  }
  SUBCASE("seeded determinism") {
    const auto a = simulate_lifetimes(demo.nodes, 30, 0.15, 9);
    const auto b = simulate_lifetimes(demo.nodes, 30, 0.15, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a[i].samples.size(); ++j) {
        CHECK(a[i].samples[j].time == b[i].samples[j].time);
        CHECK(a[i].samples[j].event == b[i].samples[j].event);
      }
    }
  }
  SUBCASE("censoring fraction is calibrated") {
    const std::map<std::string, LifetimeModel> one{{"m", weibull_model(2.0, 100.0)}};
    std::size_t censored = 0;
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const auto ds = simulate_lifetimes(one, 30, 0.15, seed);
      for (const auto& s : ds[0].samples) {
        censored += s.event ? 0 : 1;
        ++total;
      }
    }
    CHECK(std::abs(static_cast<double>(censored) / total - 0.15) <= 0.01);
  }
  SUBCASE("bad fraction") { CHECK_THROWS(simulate_lifetimes(demo.nodes, 30, 1.0, 1)); }
}

TEST_CASE("structure model of a series pair") {
  const std::map<std::string, LifetimeModel> comps{{"a", weibull_model(1.0, 10.0)},
                                                   {"b", weibull_model(1.0, 20.0)}};
  const auto s = structure_model(series({component("a"), component("b")}), comps);
  const auto p = structure_model(parallel({component("a"), component("b")}), comps);
  const double fa = 1 - std::exp(-0.5);
  const double fb = 1 - std::exp(-0.25);
  CHECK(s.cdf(5.0) == doctest::Approx(1 - (1 - fa) * (1 - fb)));
  CHECK(p.cdf(5.0) == doctest::Approx(fa * fb));
}

TEST_CASE("demo configuration from json") {
  const auto demo = load_demo_config(
      R"js({"rbd": "s@series(a, b)", "components": {"a": {"weibull": {"shape": 2, "scale": 5}},
          "b": {"weibull": {"shape": 1, "scale": 9}}}, "n": 12, "censor_fraction": 0.2})js");
  CHECK(demo.n_per_node == 12);
  CHECK(demo.censor_fraction == doctest::Approx(0.2));
  CHECK(demo.nodes.size() == 3);
  CHECK_THROWS(load_demo_config("{\"rbd\": \"series(a, b)\", \"components\": {}}"));
}
