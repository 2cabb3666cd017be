#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relfuse/bsp.hpp"
#include "relfuse/rbd.hpp"

namespace relfuse {

/// First and second moments of a random CDF on a shared grid:
/// first[i] = E[F(t_i)], second[i] = E[F(t_i)^2].
struct MomentCurve {
  std::vector<double> grid;
  std::vector<double> first;
  std::vector<double> second;

  std::size_t size() const noexcept { return grid.size(); }
  bool empty() const noexcept { return grid.empty(); }

  /// Degenerate point where the CDF is 1 with certainty.
  bool terminal(std::size_t i) const { return first[i] >= 1.0; }

  /// Step lookup of (first, second) at t, zeros before the grid.
  std::pair<double, double> at(double t) const;
};

/// Throws InvalidInput when a curve breaks first^2 <= second <= first (to
/// `tol`), has a decreasing first moment, or mismatched lengths.
void check_curve(const MomentCurve& curve, double tol = 1e-12);

struct FusionOptions {
  double precision_cap = 1e12;
};

MomentCurve moments_of(const BetaStacyProcess& bsp);

/// Both curves re-expressed on the union grid by right-continuous carry-forward.
std::pair<MomentCurve, MomentCurve> align_grids(const MomentCurve& a, const MomentCurve& b);

/// Both failed: F = F_a * F_b. Curves must share a grid.
MomentCurve combine_parallel(const MomentCurve& a, const MomentCurve& b);

/// Either failed: F = 1 - (1 - F_a)(1 - F_b). Curves must share a grid.
MomentCurve combine_series(const MomentCurve& a, const MomentCurve& b);

/// Fits the BSP whose moments match `curve`. The base is the first moment;
/// each jump's precision solves the second-moment recursion with
/// E[F(t_0)^2] = 0 and G(t_0) = 0. Points the recursion cannot represent are
/// clamped (0 for too much variance, the cap for too little) and reported in
/// `warnings` when given.
BetaStacyProcess recover_precision(const MomentCurve& curve, const FusionOptions& options = {},
                                   std::vector<std::string>* warnings = nullptr);

/// Pairwise post-order fold of the diagram: series groups with
/// combine_series, parallel groups with combine_parallel, left to right.
MomentCurve reduce_rbd(const RbdNode& node, const std::map<std::string, MomentCurve>& leaves);

/// Folds the children of one group (no recursion).
MomentCurve fold_group(RbdNode::Kind kind, const std::vector<MomentCurve>& children);

/// Combines a fused prior with a separately elicited one by matching the
/// moments of their precision-weighted mixture at every union grid point.
BetaStacyProcess merge_priors(const BetaStacyProcess& fused, const BetaStacyProcess& elicited,
                              const FusionOptions& options = {},
                              std::vector<std::string>* warnings = nullptr);

/// reduce_rbd followed by recover_precision, then merge_priors with
/// `extra_prior` when one is supplied.
BetaStacyProcess fuse_to_prior(const RbdNode& node,
                               const std::map<std::string, MomentCurve>& leaves,
                               const std::optional<BetaStacyProcess>& extra_prior = std::nullopt,
                               const FusionOptions& options = {},
                               std::vector<std::string>* warnings = nullptr);

}  // namespace relfuse
