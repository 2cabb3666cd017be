#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relfuse/bsp.hpp"

namespace relfuse {

/// Lifetime observations attached to one node label.
struct Dataset {
  std::string label;
  std::vector<LifetimeSample> samples;
};

/// Reads `node,time,event` CSV. Datasets appear in order of first mention and
/// samples keep file order. Throws ParseError naming the 1-based line.
std::vector<Dataset> load_lifetimes(std::istream& in);
std::vector<Dataset> load_lifetimes(const std::filesystem::path& path);

void save_lifetimes(std::ostream& out, const std::vector<Dataset>& datasets);

/// Reads `node,time,cdf,precision` CSV into one prior per node. A constant
/// precision column gives a Dirichlet-process prior; a varying one a general
/// beta-Stacy prior. The cdf column accepts decimals or fractions like 1/3.
std::map<std::string, BetaStacyProcess> load_prior_spec(std::istream& in);
std::map<std::string, BetaStacyProcess> load_prior_spec(const std::filesystem::path& path);

struct CurveRow {
  double t = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double precision = 0.0;
  std::string flags;  // "ok" or "terminal"
};

struct CurveExport {
  std::vector<CurveRow> rows;
};

/// One row per estimable grid point of `bsp`, with an equal-tailed band at `level`.
CurveExport make_export(const BetaStacyProcess& bsp, double level);

enum class CurveFormat { csv, svg };

struct SvgStyle {
  std::string title;
  /// Optional reference CDF drawn in gray, as (t, F(t)) points.
  std::vector<std::pair<double, double>> truth;
};

void write_curve_csv(std::ostream& out, const CurveExport& curve);
void write_curve_svg(std::ostream& out, const CurveExport& curve, const SvgStyle& style = {});

/// Writes to `path`; throws std::runtime_error when it cannot be opened.
void export_curves(const CurveExport& curve, const std::filesystem::path& path,
                   CurveFormat format, const SvgStyle& style = {});

/// Reads the curve CSV written by write_curve_csv.
CurveExport read_curve_csv(std::istream& in);

/// Two-column `t,cdf` reference curve.
std::vector<std::pair<double, double>> load_reference_cdf(const std::filesystem::path& path);

}  // namespace relfuse
