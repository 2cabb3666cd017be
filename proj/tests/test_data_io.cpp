#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "relfuse/bsp.hpp"
#include "relfuse/data_io.hpp"
#include "relfuse/errors.hpp"

using namespace relfuse;

namespace {

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("load lifetimes") {
  std::istringstream in("node,time,event\nsys,1,1\nsys,2,1\nmotor,5.2,0\nsys,3,1\n");
  const auto ds = load_lifetimes(in);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].label == "sys");
  REQUIRE(ds[0].samples.size() == 3);
  CHECK(ds[0].samples[2].time == 3.0);
  CHECK(ds[0].samples[2].event);
  CHECK(ds[1].label == "motor");
  CHECK_FALSE(ds[1].samples[0].event);
}

TEST_CASE("lifetime errors name the line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      load_lifetimes(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("node,time,event\nmotor,1,1\nmotor,-1,1\n") == 3);
  CHECK(line_of("node,time,event\nmotor,1,2\n") == 2);
  CHECK(line_of("node,time,event\nmotor,abc,1\n") == 2);
  CHECK(line_of("node,time,event\nmotor,1\n") == 2);
  CHECK(line_of("id,t,e\n") == 1);
}

TEST_CASE("lifetimes round trip") {
  const std::vector<Dataset> ds{{"a", {{1.5, true}, {2.25, false}}}, {"b", {{0.125, true}}}};
  std::stringstream io;
  save_lifetimes(io, ds);
  const auto back = load_lifetimes(io);
  REQUIRE(back.size() == 2);
  CHECK(back[0].samples[1].time == 2.25);
  CHECK_FALSE(back[0].samples[1].event);
  CHECK(back[1].label == "b");
}

TEST_CASE("prior specs") {
  SUBCASE("dirichlet prior with fractions") {
    std::istringstream in("node,time,cdf,precision\nh,1,1/3,5\nh,2,2/3,5\nh,3,1,5\n");
    const auto priors = load_prior_spec(in);
    const auto& h = priors.at("h");
    CHECK(h.base().value(0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(*h.precision(1) == 5.0);
    CHECK_FALSE(h.precision(2).has_value());
  }
  SUBCASE("zero precision") {
    std::istringstream in("node,time,cdf,precision\nh,1,0.5,0\nh,2,1,0\n");
    const auto priors = load_prior_spec(in);
    CHECK(priors.at("h").jump_precision(0) == 0.0);
  }
  SUBCASE("varying precision") {
    std::istringstream in("node,time,cdf,precision\nh,1,0.5,2\nh,2,1,7\n");
    const auto priors = load_prior_spec(in);
    CHECK(priors.at("h").jump_precision(1) == 7.0);
  }
  SUBCASE("decreasing cdf") {
    std::istringstream in("node,time,cdf,precision\nh,1,0.6,2\nh,2,0.5,2\nh,3,1,2\n");
    CHECK_THROWS_AS(load_prior_spec(in), ParseError);
  }
}

TEST_CASE("curve export") {
  const std::vector<LifetimeSample> data{{1, true}, {2, true}, {3, true}};
  const auto post = posterior_update(BetaStacyProcess{}, data);
  const auto curve = make_export(post, 0.95);
  REQUIRE(curve.rows.size() == 3);
  CHECK(curve.rows[0].precision == doctest::Approx(3.0));
  CHECK(curve.rows[2].precision == doctest::Approx(3.0));
  CHECK(curve.rows[2].flags == "terminal");
  CHECK(curve.rows[0].flags == "ok");

  std::ostringstream csv;
  write_curve_csv(csv, curve);
  CHECK(count_lines(csv.str()) == 4);
  std::istringstream back_in(csv.str());
  const auto back = read_curve_csv(back_in);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[1].mean == doctest::Approx(2.0 / 3).epsilon(1e-11));

  std::ostringstream empty;
  write_curve_csv(empty, CurveExport{});
  CHECK(empty.str() == "t,mean,second_moment,lower,upper,precision,flags\n");
}

TEST_CASE("svg export") {
  const std::vector<LifetimeSample> data{{1, true}, {2, false}, {3, true}};
  const auto curve = make_export(posterior_update(BetaStacyProcess{}, data), 0.95);
  SvgStyle style;
  style.title = "System";
  style.truth = {{0.0, 0.0}, {2.0, 0.5}, {4.0, 1.0}};
  std::ostringstream svg;
  write_curve_svg(svg, curve, style);
  const std::string s = svg.str();
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("stroke-dasharray") != std::string::npos);
  CHECK(s.find("gray") != std::string::npos);
  CHECK(s.find("System") != std::string::npos);
}

TEST_CASE("export to an unwritable path fails") {
  const auto bad = std::filesystem::path("/nonexistent-dir-relfuse") / "x.csv";
  CHECK_THROWS(export_curves(CurveExport{}, bad, CurveFormat::csv));
}
