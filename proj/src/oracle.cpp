#include "relfuse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "relfuse/errors.hpp"

namespace relfuse::oracle {

namespace {

constexpr std::size_t kPathChunk = 8192;

enum class JumpKind { none, certain, beta };

struct Jump {
  JumpKind kind = JumpKind::none;
  std::gamma_distribution<double>::param_type shape_a{1.0, 1.0};
  std::gamma_distribution<double>::param_type shape_b{1.0, 1.0};
  double mean_fraction = 0.0;
};

struct ChunkSums {
  std::vector<double> s1, s2, s4;
};

double censor_probability_by_quadrature(const std::function<double(double)>& cdf, double rate) {
  // P(C < T) = E[1 - exp(-rate T)] = int_0^inf exp(-u) (1 - F(u / rate)) du
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(
      [&](double u) { return std::exp(-u) * (1.0 - cdf(u / rate)); }, 1e-10);
}

}  // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 master(seed);
  SplitMix64 offset(index ^ 0xd1b54a32d192ed03ULL);
  return SplitMix64(master() ^ (offset() * 0x2545f4914f6cdd1dULL));
}

PathMoments simulate_bsp_paths(const BetaStacyProcess& bsp, std::size_t n_paths,
                               std::uint64_t seed) {
  if (n_paths < 2) throw InvalidInput("simulate_bsp_paths: need at least 2 paths");
  const std::size_t n = bsp.estimable_size();
  std::vector<Jump> jumps(n);
  bool terminal_seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = bsp.base().value(i);
    const double dg = g - bsp.base().left_limit(i);
    if (terminal_seen || !(dg > 0.0)) continue;
    if (g >= 1.0) {
      jumps[i].kind = JumpKind::certain;
      terminal_seen = true;
      continue;
    }
    const double alpha = bsp.jump_precision(i);
    const double a = alpha * dg;
    const double b = alpha * (1.0 - g);
    if (!(a > 0.0) || !(b > 0.0)) {
      throw InvalidInput("simulate_bsp_paths: nonpositive beta shape at grid index " +
                         std::to_string(i));
    }
    jumps[i].kind = JumpKind::beta;
    jumps[i].shape_a = std::gamma_distribution<double>::param_type(a, 1.0);
    jumps[i].shape_b = std::gamma_distribution<double>::param_type(b, 1.0);
    jumps[i].mean_fraction = a / (a + b);
  }

  const std::size_t n_chunks = (n_paths + kPathChunk - 1) / kPathChunk;
  std::vector<ChunkSums> chunks(n_chunks);
  auto run_chunk = [&](std::size_t c) {
    ChunkSums& sums = chunks[c];
    sums.s1.assign(n, 0.0);
    sums.s2.assign(n, 0.0);
    sums.s4.assign(n, 0.0);
    std::gamma_distribution<double> gamma;
    const std::size_t end = std::min(n_paths, (c + 1) * kPathChunk);
    for (std::size_t p = c * kPathChunk; p < end; ++p) {
      SplitMix64 rng = SplitMix64::stream(seed, p);
      gamma.reset();
      double survival = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Jump& jump = jumps[i];
        if (jump.kind == JumpKind::certain) {
          survival = 0.0;
        } else if (jump.kind == JumpKind::beta) {
          const double x = gamma(rng, jump.shape_a);
          const double y = gamma(rng, jump.shape_b);
          const double w = x + y > 0.0 ? x / (x + y) : jump.mean_fraction;
          survival *= 1.0 - w;
        }
        const double f = 1.0 - survival;
        const double f2 = f * f;
        sums.s1[i] += f;
        sums.s2[i] += f2;
        sums.s4[i] += f2 * f2;
      }
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n_chunks));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n_chunks; c += workers) run_chunk(c);
      });
    }
  }

  PathMoments out;
  out.grid.assign(bsp.grid().begin(), bsp.grid().begin() + static_cast<std::ptrdiff_t>(n));
  out.mean.assign(n, 0.0);
  out.second.assign(n, 0.0);
  out.mean_se.assign(n, 0.0);
  out.second_se.assign(n, 0.0);
  std::vector<double> s4(n, 0.0);
  for (const auto& chunk : chunks) {
    for (std::size_t i = 0; i < n; ++i) {
      out.mean[i] += chunk.s1[i];
      out.second[i] += chunk.s2[i];
      s4[i] += chunk.s4[i];
    }
  }
  const double np = static_cast<double>(n_paths);
  for (std::size_t i = 0; i < n; ++i) {
    const double m1 = out.mean[i] / np;
    const double m2 = out.second[i] / np;
    const double m4 = s4[i] / np;
    out.mean[i] = m1;
    out.second[i] = m2;
    out.mean_se[i] = std::sqrt(std::max(0.0, m2 - m1 * m1) / (np - 1.0));
    out.second_se[i] = std::sqrt(std::max(0.0, m4 - m2 * m2) / (np - 1.0));
  }
  return out;
}

BetaStacyProcess random_bsp(SplitMix64& rng, std::size_t max_points, bool allow_terminal) {
  std::uniform_int_distribution<std::size_t> size_dist(2, std::max<std::size_t>(2, max_points));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size_dist(rng);
  std::vector<double> grid(n);
  std::vector<double> weights(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += 0.1 + unit(rng);
    grid[i] = t;
    weights[i] = 0.2 + unit(rng);
  }
  const bool terminal = allow_terminal && unit(rng) < 0.5;
  const double total_mass = terminal ? 1.0 : 0.3 + 0.6 * unit(rng);
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> values(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights[i];
    values[i] = std::min(1.0, total_mass * acc / weight_sum);
  }
  if (terminal) values.back() = 1.0;
  std::vector<double> alpha(n);
  for (double& a : alpha) a = 0.5 + 39.5 * unit(rng);
  return BetaStacyProcess(DiscreteCdf(std::move(grid), std::move(values)), std::move(alpha));
}

PathMoments simulate_structure_pointwise(const RbdNode& node,
                                         const std::map<std::string, std::vector<BetaShape>>& leaves,
                                         const std::vector<double>& grid, std::size_t n_draws,
                                         std::uint64_t seed) {
  if (n_draws < 2) throw InvalidInput("simulate_structure_pointwise: need at least 2 draws");
  const std::size_t n = grid.size();
  for (const auto& [label, shapes] : leaves) {
    if (shapes.size() != n) {
      throw InvalidInput("simulate_structure_pointwise: leaf '" + label + "' has wrong length");
    }
  }
  PathMoments out;
  out.grid = grid;
  out.mean.assign(n, 0.0);
  out.second.assign(n, 0.0);
  out.mean_se.assign(n, 0.0);
  out.second_se.assign(n, 0.0);
  std::gamma_distribution<double> gamma;

  // Structure function evaluated on one draw of every leaf at grid point i.
  std::function<double(const RbdNode&, std::size_t, SplitMix64&)> draw =
      [&](const RbdNode& nd, std::size_t i, SplitMix64& rng) -> double {
    if (nd.is_component()) {
      const BetaShape& s = leaves.at(nd.binding_name())[i];
      if (s.a <= 0.0) return 0.0;
      if (s.b <= 0.0) return 1.0;
      const double x = gamma(rng, std::gamma_distribution<double>::param_type(s.a, 1.0));
      const double y = gamma(rng, std::gamma_distribution<double>::param_type(s.b, 1.0));
      return x + y > 0.0 ? x / (x + y) : s.a / (s.a + s.b);
    }
    const bool is_series = nd.kind == RbdNode::Kind::series;
    double acc = 1.0;
    for (const auto& c : nd.children) {
      const double f = draw(c, i, rng);
      acc *= is_series ? 1.0 - f : f;
    }
    return is_series ? 1.0 - acc : acc;
  };

  const double nd = static_cast<double>(n_draws);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng = SplitMix64::stream(seed, i);
    gamma.reset();
    double s1 = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (std::size_t k = 0; k < n_draws; ++k) {
      const double f = draw(node, i, rng);
      s1 += f;
      s2 += f * f;
      s4 += f * f * f * f;
    }
    const double m1 = s1 / nd;
    const double m2 = s2 / nd;
    const double m4 = s4 / nd;
    out.mean[i] = m1;
    out.second[i] = m2;
    out.mean_se[i] = std::sqrt(std::max(0.0, m2 - m1 * m1) / (nd - 1.0));
    out.second_se[i] = std::sqrt(std::max(0.0, m4 - m2 * m2) / (nd - 1.0));
  }
  return out;
}

double exact_three_beta_product_pdf(double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw InvalidInput("three-beta density: y outside [0,1]");
  if (y == 0.0) return 0.0;
  const double ly = std::log(y);
  const double y2 = y * y;
  const double y3 = y2 * y;
  const double y4 = y2 * y2;
  const double y7 = y4 * y3;
  const double y8 = y4 * y4;
  const double y9 = y8 * y;
  const double y10 = y9 * y;
  return 3960.0 / 7.0 * y3 - 1980.0 * y4 + 99000.0 * y7 + (374220.0 + 356400.0 * ly) * y8 -
         (443520.0 - 237600.0 * ly) * y9 - 198000.0 / 7.0 * y10;
}

std::vector<std::pair<double, double>> exact_three_beta_product_cdf(std::size_t n) {
  if (n == 0) throw InvalidInput("exact_three_beta_product_cdf: need n >= 1");
  std::vector<std::pair<double, double>> out;
  out.reserve(n + 1);
  out.emplace_back(0.0, 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double lo = static_cast<double>(k - 1) / static_cast<double>(n);
    const double hi = static_cast<double>(k) / static_cast<double>(n);
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        exact_three_beta_product_pdf, lo, hi, 0, 1e-14);
    out.emplace_back(hi, acc);
  }
  return out;
}

std::vector<LifetimeSample> random_censored_samples(SplitMix64& rng, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> size_dist(1, std::max<std::size_t>(1, max_n));
  std::uniform_int_distribution<int> tied_time(1, 25);
  std::uniform_real_distribution<double> free_time(0.1, 25.0);
  std::bernoulli_distribution tie(0.5);
  std::bernoulli_distribution failure(0.7);
  const std::size_t n = size_dist(rng);
  std::vector<LifetimeSample> out(n);
  for (auto& s : out) {
    s.time = tie(rng) ? static_cast<double>(tied_time(rng)) : free_time(rng);
    s.event = failure(rng);
  }
  out.front().event = true;
  return out;
}

DiscreteCdf kaplan_meier(std::span<const LifetimeSample> samples) {
  std::vector<LifetimeSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LifetimeSample& a, const LifetimeSample& b) { return a.time < b.time; });
  std::vector<double> times;
  std::vector<double> values;
  double survival = 1.0;
  double at_risk = static_cast<double>(sorted.size());
  std::size_t k = 0;
  while (k < sorted.size()) {
    const double t = sorted[k].time;
    double deaths = 0.0;
    double leaving = 0.0;
    while (k < sorted.size() && sorted[k].time == t) {
      if (sorted[k].event) deaths += 1.0;
      leaving += 1.0;
      ++k;
    }
    if (deaths > 0.0) {
      survival *= 1.0 - deaths / at_risk;
      times.push_back(t);
      values.push_back(1.0 - survival);
    }
    at_risk -= leaving;
  }
  if (times.empty()) throw InvalidInput("kaplan_meier: no observed failures");
  return DiscreteCdf(std::move(times), std::move(values));
}

LifetimeModel weibull_model(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw InvalidInput("weibull: parameters must be > 0");
  LifetimeModel m;
  m.cdf = [shape, scale](double t) {
    return t <= 0.0 ? 0.0 : -std::expm1(-std::pow(t / scale, shape));
  };
  m.sample = [shape, scale](SplitMix64& rng) {
    return std::weibull_distribution<double>(shape, scale)(rng);
  };
  m.censor_probability = [cdf = m.cdf](double rate) {
    return censor_probability_by_quadrature(cdf, rate);
  };
  return m;
}

LifetimeModel discrete_model(const DiscreteCdf& cdf) {
  if (cdf.empty() || cdf.values().back() < 1.0) {
    throw InvalidInput("discrete_model: CDF must end at 1");
  }
  LifetimeModel m;
  m.cdf = [cdf](double t) { return cdf(t); };
  m.sample = [cdf](SplitMix64& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto vals = cdf.values();
    const auto k = static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), u) -
                                            vals.begin());
    return cdf.time(std::min(k, cdf.size() - 1));
  };
  m.censor_probability = [cdf](double rate) {
    double p = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      p += (cdf.value(i) - cdf.left_limit(i)) * -std::expm1(-rate * cdf.time(i));
    }
    return p;
  };
  return m;
}

LifetimeModel structure_model(const RbdNode& node,
                              const std::map<std::string, LifetimeModel>& components) {
  if (node.is_component()) {
    const auto it = components.find(node.id);
    if (it == components.end()) {
      throw InvalidInput("structure_model: no model for component '" + node.id + "'");
    }
    return it->second;
  }
  std::vector<LifetimeModel> parts;
  for (const auto& c : node.children) parts.push_back(structure_model(c, components));
  const bool is_series = node.kind == RbdNode::Kind::series;

  LifetimeModel m;
  m.cdf = [parts, is_series](double t) {
    double acc = 1.0;
    for (const auto& p : parts) acc *= is_series ? 1.0 - p.cdf(t) : p.cdf(t);
    return is_series ? 1.0 - acc : acc;
  };
  m.sample = [parts, is_series](SplitMix64& rng) {
    double out = is_series ? std::numeric_limits<double>::infinity() : 0.0;
    for (const auto& p : parts) {
      const double t = p.sample(rng);
      out = is_series ? std::min(out, t) : std::max(out, t);
    }
    return out;
  };
  m.censor_probability = [cdf = m.cdf](double rate) {
    return censor_probability_by_quadrature(cdf, rate);
  };
  return m;
}

std::map<std::string, LifetimeModel> node_models(
    const RbdNode& root, const std::map<std::string, LifetimeModel>& components) {
  std::map<std::string, LifetimeModel> out;
  std::function<void(const RbdNode&)> visit = [&](const RbdNode& n) {
    if (!n.binding_name().empty()) out.emplace(n.binding_name(), structure_model(n, components));
    for (const auto& c : n.children) visit(c);
  };
  visit(root);
  return out;
}

double calibrate_censoring_rate(const LifetimeModel& model, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidInput("censoring fraction must lie in (0,1)");
  }
  double lo = 1e-6;
  double hi = 1.0;
  while (model.censor_probability(hi) < fraction && hi < 1e12) hi *= 10.0;
  while (model.censor_probability(lo) > fraction && lo > 1e-300) lo /= 10.0;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    (model.censor_probability(mid) < fraction ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<Dataset> simulate_lifetimes(const std::map<std::string, LifetimeModel>& models,
                                        std::size_t n_per_node, double censor_fraction,
                                        std::uint64_t seed) {
  if (!(censor_fraction >= 0.0 && censor_fraction < 1.0)) {
    throw InvalidInput("censor fraction must lie in [0,1)");
  }
  std::vector<Dataset> out;
  std::uint64_t index = 0;
  for (const auto& [label, model] : models) {
    const double rate = censor_fraction > 0.0 ? calibrate_censoring_rate(model, censor_fraction)
                                              : 0.0;
    SplitMix64 rng = SplitMix64::stream(seed, index++);
    Dataset ds{label, {}};
    ds.samples.reserve(n_per_node);
    for (std::size_t i = 0; i < n_per_node; ++i) {
      const double t = model.sample(rng);
      if (rate > 0.0) {
        const double c = std::exponential_distribution<double>(rate)(rng);
        if (c < t) {
          ds.samples.push_back({c, false});
          continue;
        }
      }
      ds.samples.push_back({t, true});
    }
    out.push_back(std::move(ds));
  }
  return out;
}

namespace {

DemoSystem finish_demo(DemoSystem demo) {
  demo.root = parse_rbd(demo.rbd_source).root;
  demo.nodes = node_models(demo.root, demo.components);
  return demo;
}

}  // namespace

DemoSystem sherpa_demo() {
  DemoSystem demo;
  demo.rbd_source =
      "# Synthetic hybrid-electric propulsion system\n"
      "system@series(\n"
      "  propeller, drive_shaft, gearing,\n"
      "  propulsion@parallel(\n"
      "    electric@series(motor, batteries, motor_controller, serpentine_belt),\n"
      "    gasoline@series(engine, gas_delivery)))\n";
  // Invented Weibull (shape, scale in hours) per component.
  demo.components = {
      {"propeller", weibull_model(2.5, 900.0)},
      {"drive_shaft", weibull_model(3.0, 1200.0)},
      {"gearing", weibull_model(2.0, 1000.0)},
      {"motor", weibull_model(1.8, 600.0)},
      {"batteries", weibull_model(1.5, 400.0)},
      {"motor_controller", weibull_model(2.2, 700.0)},
      {"serpentine_belt", weibull_model(2.8, 500.0)},
      {"engine", weibull_model(2.0, 450.0)},
      {"gas_delivery", weibull_model(1.6, 550.0)},
  };
  return finish_demo(std::move(demo));
}

DemoSystem load_demo_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("demo config: ") + e.what());
  }
  DemoSystem demo;
  demo.rbd_source = j.at("rbd").get<std::string>();
  for (const auto& [id, spec] : j.at("components").items()) {
    if (!spec.contains("weibull")) {
      throw InvalidInput("demo config: component '" + id + "' needs a weibull block");
    }
    const auto& w = spec["weibull"];
    demo.components.emplace(id, weibull_model(w.at("shape").get<double>(),
                                              w.at("scale").get<double>()));
  }
  demo.n_per_node = j.value("n", demo.n_per_node);
  demo.censor_fraction = j.value("censor_fraction", demo.censor_fraction);
  return finish_demo(std::move(demo));
}

}  // namespace relfuse::oracle
