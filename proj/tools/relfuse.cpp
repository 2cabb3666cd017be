// relfuse: hierarchical beta-Stacy reliability fits from the command line.
//
//   relfuse fit --rbd system.rbd --data lifetimes.csv [--priors priors.csv]
//               [--level 0.95] [--system-only] [--out dir] [--svg]
//   relfuse simulate --config demo|path --seed N --out dir
//   relfuse validate [--seed N]
//
// Exit codes: 0 success, 1 bad input or failed validation, 2 nothing estimable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "relfuse/data_io.hpp"
#include "relfuse/errors.hpp"
#include "relfuse/oracle.hpp"
#include "relfuse/pipeline.hpp"
#include "relfuse/rbd.hpp"
#include "relfuse/validation.hpp"

namespace fs = std::filesystem;
using namespace relfuse;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitDegenerate = 2;

struct RunConfig {
  std::string rbd_path;
  std::string data_path;
  std::string priors_path;
  std::string truth_path;
  double level = 0.95;
  double precision_cap = 1e12;
  std::string out_dir = ".";
  bool system_only = false;
  bool svg = false;
  bool node_curves = false;

  std::string demo_config = "demo";
  std::uint64_t seed = 1;
  long n_per_node = -1;
  double censor_fraction = -1.0;
  bool series_typo = false;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double default_precision_cap() {
  if (const char* env = std::getenv("RELFUSE_PRECISION_CAP")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
    std::cerr << "warning: ignoring invalid RELFUSE_PRECISION_CAP='" << env << "'\n";
  }
  return 1e12;
}

int cmd_fit(const RunConfig& cfg) {
  SystemSpec spec;
  SampleMap data;
  PriorMap priors;
  try {
    spec = parse_rbd_any(read_text(cfg.rbd_path));
    for (auto& ds : load_lifetimes(fs::path(cfg.data_path))) data.emplace(ds.label, std::move(ds.samples));
    if (!cfg.priors_path.empty()) priors = load_prior_spec(fs::path(cfg.priors_path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  std::set<std::string> data_names;
  std::set<std::string> prior_names;
  for (const auto& [name, _] : data) data_names.insert(name);
  for (const auto& [name, _] : priors) prior_names.insert(name);
  bind_by_name(spec, data_names, prior_names);
  const auto diagnostics = validate_bindings(spec, data_names, prior_names);
  for (const auto& d : diagnostics) {
    std::cerr << (d.severity == Diagnostic::Severity::error ? "error: " : "info: ") << d.message
              << '\n';
  }
  if (has_errors(diagnostics)) return kExitInput;

  FitOptions options;
  options.level = cfg.level;
  options.system_only = cfg.system_only;
  options.fusion.precision_cap = cfg.precision_cap;

  FitResult result;
  try {
    result = fit_system(spec, data, priors, options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (result.system.estimable_size() == 0) {
    std::cerr << "error: the system posterior has no estimable grid points\n";
    return kExitDegenerate;
  }

  try {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    const CurveExport curve = make_export(result.system, cfg.level);
    export_curves(curve, out / "system_curve.csv", CurveFormat::csv);
    if (cfg.svg) {
      SvgStyle style;
      style.title = cfg.system_only ? "System CDF (system data only)" : "System CDF";
      if (!cfg.truth_path.empty()) style.truth = load_reference_cdf(cfg.truth_path);
      export_curves(curve, out / "system_curve.svg", CurveFormat::svg, style);
    }
    if (cfg.node_curves) {
      fs::create_directories(out / "nodes");
      for (const auto& node : result.nodes) {
        export_curves(make_export(node.posterior, cfg.level), out / "nodes" / (node.label + ".csv"),
                      CurveFormat::csv);
      }
    }
    std::cout << "fit: " << curve.rows.size() << " grid points written to "
              << (out / "system_curve.csv").string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  try {
    oracle::DemoSystem demo = cfg.demo_config == "demo"
                                  ? oracle::sherpa_demo()
                                  : oracle::load_demo_config(read_text(cfg.demo_config));
    if (cfg.n_per_node >= 0) demo.n_per_node = static_cast<std::size_t>(cfg.n_per_node);
    if (cfg.censor_fraction >= 0.0) demo.censor_fraction = cfg.censor_fraction;

    const auto datasets =
        oracle::simulate_lifetimes(demo.nodes, demo.n_per_node, demo.censor_fraction, cfg.seed);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    {
      std::ofstream f(out / "lifetimes.csv");
      if (!f) throw std::runtime_error("cannot write " + (out / "lifetimes.csv").string());
      save_lifetimes(f, datasets);
    }
    {
      std::ofstream f(out / "system.rbd");
      f << demo.rbd_source;
    }
    {
      // True root CDF on a regular grid up to its 0.999 quantile.
      const auto truth = oracle::structure_model(demo.root, demo.components);
      double t_hi = 1.0;
      while (truth.cdf(t_hi) < 0.999 && t_hi < 1e12) t_hi *= 1.5;
      std::ofstream f(out / "truth.csv");
      f << "t,cdf\n";
      f.precision(12);
      for (int k = 0; k <= 400; ++k) {
        const double t = t_hi * k / 400.0;
        f << t << ',' << truth.cdf(t) << '\n';
      }
    }
    std::size_t censored = 0;
    std::size_t total = 0;
    for (const auto& ds : datasets) {
      for (const auto& s : ds.samples) censored += s.event ? 0 : 1;
      total += ds.samples.size();
    }
    std::cout << "simulate: " << datasets.size() << " datasets, " << total << " samples, "
              << censored << " censored, written to " << out.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  ValidationOptions options;
  options.seed = cfg.seed;
  options.inject_series_typo = cfg.series_typo;
  return run_validation(std::cout, options) ? 0 : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical beta-Stacy system reliability"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.precision_cap = default_precision_cap();

  auto* fit = app.add_subcommand("fit", "Fit the system CDF from component and system data");
  fit->add_option("--rbd", cfg.rbd_path, "Block diagram (.rbd DSL or JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--data", cfg.data_path, "Lifetimes CSV (node,time,event)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--priors", cfg.priors_path, "Priors CSV (node,time,cdf,precision)")
      ->check(CLI::ExistingFile);
  fit->add_option("--level", cfg.level, "Pointwise credible level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  fit->add_option("--precision-cap", cfg.precision_cap,
                  "Largest precision produced by moment matching")
      ->check(CLI::PositiveNumber);
  fit->add_flag("--system-only", cfg.system_only, "Use only the root node's own data");
  fit->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  fit->add_flag("--svg", cfg.svg, "Also render system_curve.svg");
  fit->add_option("--truth", cfg.truth_path, "Reference CDF (t,cdf) drawn in the SVG")
      ->check(CLI::ExistingFile);
  fit->add_flag("--nodes", cfg.node_curves, "Also write one curve per labelled node");

  auto* sim = app.add_subcommand("simulate", "Simulate censored lifetimes for a demo system");
  sim->add_option("--config", cfg.demo_config, "'demo' or a JSON configuration file")
      ->capture_default_str();
  sim->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sim->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  sim->add_option("--n", cfg.n_per_node, "Observations per node")->check(CLI::PositiveNumber);
  sim->add_option("--censor-fraction", cfg.censor_fraction, "Expected censored fraction")
      ->check(CLI::Range(0.0, 0.999999));

  auto* val = app.add_subcommand("validate", "Run the built-in verification checks");
  val->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  val->add_flag("--inject-series-typo", cfg.series_typo,
                "Test hook: use a wrong series second-moment term (must fail)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInput;
  }
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    std::cerr << "error: --level must lie in (0,1)\n";
    return kExitInput;
  }

  if (*fit) return cmd_fit(cfg);
  if (*sim) return cmd_simulate(cfg);
  return cmd_validate(cfg);
}
