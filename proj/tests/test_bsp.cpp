#include "doctest.h"

#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "relfuse/bsp.hpp"
#include "relfuse/errors.hpp"
#include "relfuse/oracle.hpp"

using namespace relfuse;

namespace {

BetaStacyProcess h_prior(double alpha) { return dp_prior({1, 2, 3}, {1.0 / 3, 2.0 / 3, 1.0}, alpha); }

BetaStacyProcess ecdf_posterior() {
  const std::vector<LifetimeSample> data{{1, true}, {2, true}, {3, true}};
  return posterior_update(BetaStacyProcess{}, data);
}

// Second moment as the literal product of per-jump ratios
// (1-G)(a(1-G)+1) / ((1-G-)(a(1-G-)+1)), minus 1, plus 2G.
double literal_second_moment(const BetaStacyProcess& bsp, std::size_t m) {
  double prod = 1.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double g = bsp.base().value(i);
    const double gl = bsp.base().left_limit(i);
    const double a = bsp.jump_precision(i);
    prod *= (1 - g) * (a * (1 - g) + 1) / ((1 - gl) * (a * (1 - gl) + 1));
  }
  return prod - 1 + 2 * bsp.base().value(m);
}

}  // namespace

TEST_CASE("dp_prior on the worked-example CDF") {
  const auto h = h_prior(5.0);
  REQUIRE(h.size() == 3);
  for (std::size_t i = 0; i < 2; ++i) CHECK(*h.precision(i) == 5.0);
  CHECK_FALSE(h.precision(2).has_value());
  CHECK(h.jump_precision(2) == 5.0);
  CHECK(h.fully_estimable());
}

TEST_CASE("dp_prior edge cases") {
  const auto point_mass = dp_prior({1}, {1.0}, 10.0);
  CHECK_FALSE(point_mass.precision(0).has_value());
  CHECK(mean(point_mass, 1.0) == 1.0);
  CHECK(second_moment(point_mass, 1.0) == 1.0);

  CHECK_THROWS_AS(dp_prior({1, 2}, {0.5, 0.9}, 1.0), InvalidInput);
  CHECK_THROWS_AS(dp_prior({1, 2}, {0.5, 1.0}, -1.0), InvalidInput);
  CHECK_THROWS_AS(dp_prior({1, 2}, {0.6, 0.5}, 1.0), InvalidInput);
}

TEST_CASE("zero-precision prior carries no information") {
  const auto flat = dp_prior({1, 2, 3}, {0.2, 0.5, 1.0}, 0.0);
  const std::vector<LifetimeSample> data{{1, true}, {2, true}, {3, true}};
  const auto post = posterior_update(flat, data);
  CHECK(post.base().value(0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(post.base().value(1) == doctest::Approx(2.0 / 3).epsilon(1e-14));
}

TEST_CASE("counting summary") {
  SUBCASE("three failures") {
    const std::vector<LifetimeSample> s{{1, true}, {2, true}, {3, true}};
    const auto c = counting_summary(s);
    CHECK(c.times == std::vector<double>{1, 2, 3});
    CHECK(c.at_risk == std::vector<std::size_t>{3, 2, 1});
    CHECK(c.failures == std::vector<std::size_t>{1, 1, 1});
  }
  SUBCASE("single censored sample") {
    const std::vector<LifetimeSample> s{{5, false}};
    const auto c = counting_summary(s);
    CHECK(c.at_risk == std::vector<std::size_t>{1});
    CHECK(c.failures == std::vector<std::size_t>{0});
  }
  SUBCASE("ties") {
    const std::vector<LifetimeSample> s{{2, true}, {2, false}, {2, true}};
    const auto c = counting_summary(s);
    CHECK(c.at_risk == std::vector<std::size_t>{3});
    CHECK(c.failures == std::vector<std::size_t>{2});
  }
  SUBCASE("nonpositive time") {
    const std::vector<LifetimeSample> s{{0, true}};
    CHECK_THROWS_AS(counting_summary(s), InvalidInput);
  }
}

TEST_CASE("posterior with no data equals the prior") {
  for (double alpha : {0.5, 5.0, 100.0}) {
    const auto prior = h_prior(alpha);
    const auto post = posterior_update(prior, {});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(post.base().value(i) - prior.base().value(i)) <= 1e-12);
      CHECK(std::abs(post.jump_precision(i) - alpha) <= 1e-12);
    }
  }
}

TEST_CASE("data-only posterior is the empirical CDF with precision 3") {
  const auto post = ecdf_posterior();
  const double expected[] = {1.0 / 3, 2.0 / 3, 1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(post.base().value(i) - expected[i]) <= 1e-12);
    CHECK(std::abs(post.jump_precision(i) - 3.0) <= 1e-12);
  }
  CHECK(*post.precision(0) == doctest::Approx(3.0));
  CHECK_FALSE(post.precision(2).has_value());
  CHECK(mean(post, 2.0) == doctest::Approx(2.0 / 3));
  CHECK(mean(h_prior(5.0), 1.5) == doctest::Approx(1.0 / 3));
  CHECK(mean(post, 0.5) == 0.0);
}

TEST_CASE("posterior update with prior and censored data by hand") {
  // Prior G = (0.25, 0.5, 1) on (1, 2, 3), alpha = 4. Data: failure at 2,
  // censored at 2.5. Union grid 1, 2, 2.5, 3.
  const auto prior = dp_prior({1, 2, 3}, {0.25, 0.5, 1.0}, 4.0);
  const std::vector<LifetimeSample> data{{2, true}, {2.5, false}};
  const auto post = posterior_update(prior, data);
  REQUIRE(post.size() == 4);
  // t=1: total = 4 + 2, remain = 3 + 2 -> S = 5/6
  // t=2: total = 3 + 2, remain = 2 + 2 - 1 -> S = 5/6 * 3/5 = 1/2
  // t=2.5: no prior mass, one censored at risk: total = remain = 2 + 1
  // t=3: total = 2, remain = 0 -> S = 0
  CHECK(post.base().value(0) == doctest::Approx(1.0 / 6).epsilon(1e-13));
  CHECK(post.base().value(1) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(post.base().value(2) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(post.base().value(3) == doctest::Approx(1.0));
  // alpha* = remain / (1 - G*); at the terminal point total / (1 - G*(t-))
  CHECK(post.jump_precision(0) == doctest::Approx(5.0 / (5.0 / 6)));
  CHECK(post.jump_precision(1) == doctest::Approx(3.0 / 0.5));
  CHECK(post.jump_precision(2) == doctest::Approx(3.0 / 0.5));
  CHECK(post.jump_precision(3) == doctest::Approx(2.0 / 0.5));
}

TEST_CASE("zero-precision posterior matches Kaplan-Meier") {
  auto rng = oracle::SplitMix64::stream(11, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto samples = oracle::random_censored_samples(rng, 40);
    const auto km = oracle::kaplan_meier(samples);
    const auto post = posterior_update(BetaStacyProcess{}, samples);
    for (std::size_t i = 0; i < km.size(); ++i) {
      CHECK(std::abs(mean(post, km.time(i)) - km.value(i)) <= 1e-12);
    }
  }
}

TEST_CASE("queries past the last observation are not estimable") {
  const std::vector<LifetimeSample> data{{1, true}, {4, false}};
  const auto post = posterior_update(BetaStacyProcess{}, data);
  CHECK(mean(post, 4.0) == doctest::Approx(0.5));
  CHECK(post.beyond_data(5.0));
  CHECK_FALSE(post.beyond_data(4.0));

  const std::vector<LifetimeSample> censored_tail{{1, true}, {2, false}};
  const auto ended = posterior_update(dp_prior({1, 2, 3}, {0.2, 0.5, 1.0}, 0.0), censored_tail);
  CHECK(ended.estimable_size() == 2);
  CHECK_FALSE(ended.is_estimable(3.0));
  CHECK_THROWS_AS(mean(ended, 3.0), NotEstimable);
  CHECK_THROWS_AS(second_moment(ended, 3.0), NotEstimable);
}

TEST_CASE("second moment closed forms") {
  const auto post = ecdf_posterior();
  CHECK(second_moment(post, 1.0) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(second_moment(post, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(second_moment(post, 3.0) == 1.0);
  CHECK(second_moment(post, 0.5) == 0.0);

  const auto flat = dp_prior({1, 2, 3}, {0.2, 0.5, 1.0}, 0.0);
  CHECK(second_moment(flat, 1.0) == doctest::Approx(0.2));
  CHECK(second_moment(flat, 2.5) == doctest::Approx(0.5));

  const auto sharp = dp_prior({1, 2, 3}, {0.2, 0.5, 1.0}, 1e9);
  CHECK(second_moment(sharp, 2.0) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("second moment agrees with the literal product formula") {
  auto rng = oracle::SplitMix64::stream(12, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto bsp = oracle::random_bsp(rng, 20);
    const auto all = second_moments(bsp);
    for (std::size_t i = 0; i < bsp.size(); ++i) {
      const double lit = literal_second_moment(bsp, i);
      CHECK(std::abs(all[i] - lit) <= 1e-12);
      CHECK(std::abs(second_moment(bsp, bsp.base().time(i)) - all[i]) <= 1e-15);
    }
  }
}

TEST_CASE("moment envelope G^2 <= E[F^2] <= G") {
  auto rng = oracle::SplitMix64::stream(13, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto bsp = oracle::random_bsp(rng, 20, rep % 2 == 0);
    const auto s = second_moments(bsp);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double g = bsp.base().value(i);
      CHECK(s[i] >= g * g - 1e-15);
      CHECK(s[i] <= g + 1e-15);
    }
  }
}

TEST_CASE("beta_match") {
  const auto s1 = beta_match(1.0 / 3, 1.0 / 6);
  CHECK(s1.a == doctest::Approx(1.0));
  CHECK(s1.b == doctest::Approx(2.0));
  const auto s2 = beta_match(0.5, 0.3);
  CHECK(s2.a == doctest::Approx(2.0));
  CHECK(s2.b == doctest::Approx(2.0));
  CHECK_THROWS_AS(beta_match(0.5, 0.25), DegenerateMoments);
  CHECK_THROWS_AS(beta_match(0.5, 0.5), DegenerateMoments);
}

TEST_CASE("credible intervals") {
  const auto post = ecdf_posterior();
  const auto band = credible_interval(post, 1.0, 0.95);
  const boost::math::beta_distribution<double> beta12(1.0, 2.0);
  CHECK(band.lower == doctest::Approx(boost::math::quantile(beta12, 0.025)).epsilon(1e-10));
  CHECK(band.upper == doctest::Approx(boost::math::quantile(beta12, 0.975)).epsilon(1e-10));
  // Beta(1,2) has CDF 1 - (1-x)^2, so the quantile is 1 - sqrt(1-p).
  CHECK(band.lower == doctest::Approx(1 - std::sqrt(0.975)).epsilon(1e-10));
  CHECK(band.upper == doctest::Approx(1 - std::sqrt(0.025)).epsilon(1e-10));

  const auto zero = credible_interval(post, 0.5, 0.95);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == 0.0);

  const auto sharp = credible_interval(dp_prior({1, 2}, {0.4, 1.0}, 1e12), 1.0, 0.95);
  CHECK(sharp.upper - sharp.lower < 1e-4);
  CHECK(sharp.lower <= 0.4);
  CHECK(sharp.upper >= 0.4);

  CHECK_THROWS_AS(credible_interval(post, 1.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(credible_interval(post, 1.0, 0.0), InvalidInput);
}
