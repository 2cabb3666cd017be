#include "relfuse/moment_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "relfuse/errors.hpp"

namespace relfuse {

namespace {

void require_same_grid(const MomentCurve& a, const MomentCurve& b, const char* op) {
  if (a.grid != b.grid) {
    throw InvalidInput(std::string(op) + ": curves must share a grid (align_grids first)");
  }
}

MomentCurve resample(const MomentCurve& c, const std::vector<double>& grid) {
  MomentCurve out;
  out.grid = grid;
  out.first.reserve(grid.size());
  out.second.reserve(grid.size());
  for (double t : grid) {
    const auto [m, s] = c.at(t);
    out.first.push_back(m);
    out.second.push_back(s);
  }
  return out;
}

void warn(std::vector<std::string>* warnings, const std::string& msg) {
  if (warnings != nullptr) warnings->push_back(msg);
}

std::string at_time(double t) {
  std::ostringstream os;
  os.precision(12);
  os << "t = " << t;
  return os.str();
}

}  // namespace

std::pair<double, double> MomentCurve::at(double t) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), t) -
                                          grid.begin());
  if (k == 0) return {0.0, 0.0};
  return {first[k - 1], second[k - 1]};
}

void check_curve(const MomentCurve& curve, double tol) {
  if (curve.first.size() != curve.size() || curve.second.size() != curve.size()) {
    throw InvalidInput("moment curve: grid, first and second differ in length");
  }
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double m = curve.first[i];
    const double s = curve.second[i];
    if (i > 0 && !(curve.grid[i] > curve.grid[i - 1])) {
      throw InvalidInput("moment curve: grid must be strictly increasing");
    }
    if (i > 0 && m < curve.first[i - 1] - tol) {
      throw InvalidInput("moment curve: first moment decreases at " + at_time(curve.grid[i]));
    }
    if (!(m >= -tol && m <= 1.0 + tol) || !(s >= m * m - tol && s <= m + tol)) {
      throw InvalidInput("moment curve: outside first^2 <= second <= first at " +
                         at_time(curve.grid[i]));
    }
  }
}

MomentCurve moments_of(const BetaStacyProcess& bsp) {
  MomentCurve out;
  const std::size_t n = bsp.estimable_size();
  out.grid.assign(bsp.grid().begin(), bsp.grid().begin() + static_cast<std::ptrdiff_t>(n));
  out.first.assign(bsp.base().values().begin(),
                   bsp.base().values().begin() + static_cast<std::ptrdiff_t>(n));
  out.second = second_moments(bsp);
  return out;
}

std::pair<MomentCurve, MomentCurve> align_grids(const MomentCurve& a, const MomentCurve& b) {
  if (a.grid == b.grid) return {a, b};
  const std::vector<double> grid = merge_grids(a.grid, b.grid);
  return {resample(a, grid), resample(b, grid)};
}

MomentCurve combine_parallel(const MomentCurve& a, const MomentCurve& b) {
  require_same_grid(a, b, "combine_parallel");
  MomentCurve out;
  out.grid = a.grid;
  out.first.resize(a.size());
  out.second.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.first[i] = a.first[i] * b.first[i];
    out.second[i] = a.second[i] * b.second[i];
  }
  return out;
}

MomentCurve combine_series(const MomentCurve& a, const MomentCurve& b) {
  require_same_grid(a, b, "combine_series");
  MomentCurve out;
  out.grid = a.grid;
  out.first.resize(a.size());
  out.second.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ra = 1.0 - a.first[i];
    const double rb = 1.0 - b.first[i];
    // E[R^2] = E[F^2] + 1 - 2 E[F]
    const double ra2 = a.second[i] + 1.0 - 2.0 * a.first[i];
    const double rb2 = b.second[i] + 1.0 - 2.0 * b.first[i];
    out.first[i] = 1.0 - ra * rb;
    out.second[i] = 1.0 - 2.0 * ra * rb + ra2 * rb2;
  }
  return out;
}

BetaStacyProcess recover_precision(const MomentCurve& curve, const FusionOptions& options,
                                   std::vector<std::string>* warnings) {
  if (!(options.precision_cap > 0.0)) throw InvalidInput("precision cap must be positive");
  const std::size_t n = curve.size();
  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> alpha(n, kUnset);
  std::vector<double> base(n);

  // Work with c = Var F / (1 - G)^2 = Var R / E[R]^2. Between consecutive
  // jumps (1 + c_i) / (1 + c_{i-1}) = 1 + dG / ((alpha (1 - G_{i-1}) + 1)(1 - G_i)),
  // which is the second-moment product solved for alpha.
  double prev_g = 0.0;
  double prev_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::clamp(curve.first[i], i > 0 ? base[i - 1] : 0.0, 1.0);
    base[i] = g;
    if (g >= 1.0) continue;

    const double survival = 1.0 - g;
    const double c = (curve.second[i] - g * g) / (survival * survival);
    const double jump = g - prev_g;
    if (!(jump > 0.0)) {
      if (std::abs(c - prev_c) > 1e-9 * (1.0 + c)) {
        warn(warnings, "variance changes without a jump at " + at_time(curve.grid[i]));
      }
      prev_c = c;
      continue;
    }

    const double growth = (c - prev_c) / (1.0 + prev_c);  // kappa - 1
    double a = 0.0;
    bool clamped = false;
    if (!(growth > 0.0)) {
      a = options.precision_cap;
      clamped = true;
      warn(warnings, "zero-variance increment at " + at_time(curve.grid[i]) +
                         "; precision capped");
    } else {
      a = (jump / (growth * survival) - 1.0) / (1.0 - prev_g);
      if (a < 0.0) {
        a = 0.0;
        clamped = true;
        warn(warnings, "negative precision at " + at_time(curve.grid[i]) + "; clamped to 0");
      } else if (!std::isfinite(a) || a > options.precision_cap) {
        a = options.precision_cap;
        clamped = true;
        warn(warnings, "precision above cap at " + at_time(curve.grid[i]) + "; capped");
      }
    }
    alpha[i] = a;
    prev_c = clamped ? (1.0 + prev_c) * (1.0 + jump / ((a * (1.0 - prev_g) + 1.0) * survival)) - 1.0
                     : c;
    prev_g = g;
  }

  // Points without a defined jump weight take the step-function value: carried
  // forward, and backfilled before the first jump.
  const auto first_set = std::find_if(alpha.begin(), alpha.end(),
                                      [](double v) { return !std::isnan(v); });
  double carry = first_set == alpha.end() ? 0.0 : *first_set;
  for (double& v : alpha) {
    if (std::isnan(v)) {
      v = carry;
    } else {
      carry = v;
    }
  }
  return BetaStacyProcess(DiscreteCdf(curve.grid, std::move(base)), std::move(alpha));
}

MomentCurve fold_group(RbdNode::Kind kind, const std::vector<MomentCurve>& children) {
  if (kind == RbdNode::Kind::component) throw InvalidInput("fold_group: not a group");
  if (children.empty()) throw InvalidInput("fold_group: empty group");
  MomentCurve acc = children.front();
  for (std::size_t i = 1; i < children.size(); ++i) {
    auto [lhs, rhs] = align_grids(acc, children[i]);
    acc = kind == RbdNode::Kind::series ? combine_series(lhs, rhs) : combine_parallel(lhs, rhs);
  }
  return acc;
}

MomentCurve reduce_rbd(const RbdNode& node, const std::map<std::string, MomentCurve>& leaves) {
  if (node.is_component()) {
    const auto it = leaves.find(node.binding_name());
    if (it == leaves.end()) {
      throw InvalidInput("reduce_rbd: no moment curve for component '" + node.binding_name() +
                         "'");
    }
    return it->second;
  }
  if (node.children.empty()) throw InvalidInput("reduce_rbd: empty group");
  std::vector<MomentCurve> parts;
  parts.reserve(node.children.size());
  for (const auto& child : node.children) parts.push_back(reduce_rbd(child, leaves));
  return fold_group(node.kind, parts);
}

BetaStacyProcess merge_priors(const BetaStacyProcess& fused, const BetaStacyProcess& elicited,
                              const FusionOptions& options, std::vector<std::string>* warnings) {
  auto [a, b] = align_grids(moments_of(fused), moments_of(elicited));
  MomentCurve mix;
  mix.grid = a.grid;
  mix.first.resize(a.size());
  mix.second.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.grid[i];
    double wa = fused.empty() ? 0.0 : fused.precision_at(t);
    double wb = elicited.empty() ? 0.0 : elicited.precision_at(t);
    if (!(wa + wb > 0.0)) wa = wb = 1.0;
    const double w = wa + wb;
    mix.first[i] = (wa * a.first[i] + wb * b.first[i]) / w;
    mix.second[i] = (wa * a.second[i] + wb * b.second[i]) / w;
  }
  return recover_precision(mix, options, warnings);
}

BetaStacyProcess fuse_to_prior(const RbdNode& node,
                               const std::map<std::string, MomentCurve>& leaves,
                               const std::optional<BetaStacyProcess>& extra_prior,
                               const FusionOptions& options, std::vector<std::string>* warnings) {
  BetaStacyProcess fused = recover_precision(reduce_rbd(node, leaves), options, warnings);
  if (extra_prior) return merge_priors(fused, *extra_prior, options, warnings);
  return fused;
}

}  // namespace relfuse
