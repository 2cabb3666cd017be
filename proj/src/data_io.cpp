#include "relfuse/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "relfuse/errors.hpp"

namespace relfuse {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_fraction(std::string_view s, double& out) {
  const std::size_t slash = s.find('/');
  if (slash == std::string_view::npos) return parse_double(s, out);
  double num = 0.0;
  double den = 0.0;
  if (!parse_double(trim(s.substr(0, slash)), num) ||
      !parse_double(trim(s.substr(slash + 1)), den) || den == 0.0) {
    return false;
  }
  out = num / den;
  return true;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

// Reads the header line, skipping blank lines; returns its 1-based line number.
std::size_t expect_header(std::istream& in, std::string_view expected, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    std::string joined;
    for (auto f : split(t)) {
      if (!joined.empty()) joined += ',';
      joined += f;
    }
    if (joined != expected) {
      throw ParseError("expected header '" + std::string(expected) + "'", line_no, 0);
    }
    return line_no;
  }
  throw ParseError("missing header '" + std::string(expected) + "'", line_no, 0);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Dataset> load_lifetimes(std::istream& in) {
  std::size_t line_no = 0;
  expect_header(in, "node,time,event", line_no);

  std::vector<Dataset> out;
  std::map<std::string, std::size_t, std::less<>> index;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split(row);
    if (fields.size() != 3 || fields[0].empty()) {
      throw ParseError("malformed row, expected node,time,event", line_no, 0);
    }
    double time = 0.0;
    if (!parse_double(fields[1], time)) throw ParseError("time is not a number", line_no, 0);
    if (time <= 0.0) throw ParseError("time must be positive", line_no, 0);
    if (fields[2] != "0" && fields[2] != "1") {
      throw ParseError("event must be 0 or 1", line_no, 0);
    }
    auto [it, inserted] = index.try_emplace(std::string(fields[0]), out.size());
    if (inserted) out.push_back(Dataset{std::string(fields[0]), {}});
    out[it->second].samples.push_back({time, fields[2] == "1"});
  }
  return out;
}

std::vector<Dataset> load_lifetimes(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_lifetimes(in);
}

void save_lifetimes(std::ostream& out, const std::vector<Dataset>& datasets) {
  out << "node,time,event\n";
  for (const auto& ds : datasets) {
    for (const auto& s : ds.samples) {
      out << ds.label << ',' << format_number(s.time) << ',' << (s.event ? 1 : 0) << '\n';
    }
  }
}

std::map<std::string, BetaStacyProcess> load_prior_spec(std::istream& in) {
  std::size_t line_no = 0;
  expect_header(in, "node,time,cdf,precision", line_no);

  struct Rows {
    std::vector<double> time, cdf, precision;
    std::size_t first_line = 0;
  };
  std::map<std::string, Rows> rows;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split(row);
    if (fields.size() != 4 || fields[0].empty()) {
      throw ParseError("malformed row, expected node,time,cdf,precision", line_no, 0);
    }
    double t = 0.0;
    double cdf = 0.0;
    double prec = 0.0;
    if (!parse_double(fields[1], t)) throw ParseError("time is not a number", line_no, 0);
    if (!parse_fraction(fields[2], cdf)) throw ParseError("cdf is not a number", line_no, 0);
    if (!parse_double(fields[3], prec)) throw ParseError("precision is not a number", line_no, 0);
    if (prec < 0.0) throw ParseError("precision must be nonnegative", line_no, 0);
    Rows& r = rows[std::string(fields[0])];
    if (r.time.empty()) r.first_line = line_no;
    r.time.push_back(t);
    r.cdf.push_back(cdf);
    r.precision.push_back(prec);
  }

  std::map<std::string, BetaStacyProcess> out;
  for (auto& [node, r] : rows) {
    try {
      const bool constant = std::all_of(r.precision.begin(), r.precision.end(),
                                        [&](double p) { return p == r.precision.front(); });
      out.emplace(node, constant ? dp_prior(r.time, r.cdf, r.precision.front())
                                 : bsp_prior(r.time, r.cdf, r.precision));
    } catch (const InvalidInput& e) {
      throw ParseError("prior for node '" + node + "': " + e.what(), r.first_line, 0);
    }
  }
  return out;
}

std::map<std::string, BetaStacyProcess> load_prior_spec(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_prior_spec(in);
}

CurveExport make_export(const BetaStacyProcess& bsp, double level) {
  CurveExport out;
  const std::vector<double> second = second_moments(bsp);
  out.rows.reserve(second.size());
  for (std::size_t i = 0; i < second.size(); ++i) {
    CurveRow row;
    row.t = bsp.base().time(i);
    row.mean = bsp.base().value(i);
    row.second_moment = second[i];
    const Interval band = moment_interval(row.mean, row.second_moment, level);
    row.lower = band.lower;
    row.upper = band.upper;
    row.precision = bsp.jump_precision(i);
    row.flags = bsp.precision(i) ? "ok" : "terminal";
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_curve_csv(std::ostream& out, const CurveExport& curve) {
  out << "t,mean,second_moment,lower,upper,precision,flags\n";
  for (const auto& r : curve.rows) {
    out << format_number(r.t) << ',' << format_number(r.mean) << ','
        << format_number(r.second_moment) << ',' << format_number(r.lower) << ','
        << format_number(r.upper) << ',' << format_number(r.precision) << ',' << r.flags << '\n';
  }
}

CurveExport read_curve_csv(std::istream& in) {
  std::size_t line_no = 0;
  expect_header(in, "t,mean,second_moment,lower,upper,precision,flags", line_no);
  CurveExport out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto f = split(row);
    if (f.size() != 7) throw ParseError("malformed curve row", line_no, 0);
    CurveRow r;
    double* cols[] = {&r.t, &r.mean, &r.second_moment, &r.lower, &r.upper, &r.precision};
    for (std::size_t k = 0; k < 6; ++k) {
      if (!parse_double(f[k], *cols[k])) throw ParseError("malformed number", line_no, 0);
    }
    r.flags = std::string(f[6]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

void write_curve_svg(std::ostream& out, const CurveExport& curve, const SvgStyle& style) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kLeft = 56.0;
  constexpr double kRight = 16.0;
  constexpr double kTop = 28.0;
  constexpr double kBottom = 40.0;

  double t_max = 0.0;
  for (const auto& r : curve.rows) t_max = std::max(t_max, r.t);
  for (const auto& [t, f] : style.truth) t_max = std::max(t_max, t);
  if (t_max <= 0.0) t_max = 1.0;
  t_max *= 1.05;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x = [&](double t) { return kLeft + plot_w * t / t_max; };
  auto y = [&](double p) { return kTop + plot_h * (1.0 - p); };

  // Right-continuous step: horizontal run to each jump, then vertical.
  auto step_path = [&](auto value_of) {
    std::ostringstream d;
    d.precision(6);
    d << std::fixed << "M" << x(0.0) << "," << y(0.0);
    for (const auto& r : curve.rows) d << " H" << x(r.t) << " V" << y(value_of(r));
    d << " H" << x(t_max);
    return d.str();
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
        << style.title << "</text>\n";
  }
  out << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << y(0) << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << y(0) << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << y(0) << "\" x2=\"" << kLeft << "\" y2=\""
      << y(1) << "\"/>\n</g>\n";
  out << "<g font-size=\"10\" text-anchor=\"end\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double p = k / 4.0;
    out << "<text x=\"" << kLeft - 4 << "\" y=\"" << y(p) + 3 << "\">" << format_number(p)
        << "</text>\n";
  }
  out << "</g>\n<g font-size=\"10\" text-anchor=\"middle\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = t_max * k / 5.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.3g", t);
    out << "<text x=\"" << x(t) << "\" y=\"" << y(0) + 14 << "\">" << label << "</text>\n";
  }
  out << "</g>\n";

  if (!style.truth.empty()) {
    out << "<polyline fill=\"none\" stroke=\"gray\" stroke-width=\"1.5\" points=\"";
    for (const auto& [t, f] : style.truth) out << x(t) << "," << y(f) << " ";
    out << "\"/>\n";
  }
  out << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"2,3\" d=\""
      << step_path([](const CurveRow& r) { return r.lower; }) << "\"/>\n";
  out << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"2,3\" d=\""
      << step_path([](const CurveRow& r) { return r.upper; }) << "\"/>\n";
  out << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1.8\" d=\""
      << step_path([](const CurveRow& r) { return r.mean; }) << "\"/>\n";
  out << "</svg>\n";
}

void export_curves(const CurveExport& curve, const std::filesystem::path& path,
                   CurveFormat format, const SvgStyle& style) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (format == CurveFormat::csv) {
    write_curve_csv(out, curve);
  } else {
    write_curve_svg(out, curve, style);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::pair<double, double>> load_reference_cdf(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::size_t line_no = 0;
  expect_header(in, "t,cdf", line_no);
  std::vector<std::pair<double, double>> out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto f = split(row);
    double t = 0.0;
    double p = 0.0;
    if (f.size() != 2 || !parse_double(f[0], t) || !parse_double(f[1], p)) {
      throw ParseError("malformed reference row", line_no, 0);
    }
    out.emplace_back(t, p);
  }
  return out;
}

}  // namespace relfuse
