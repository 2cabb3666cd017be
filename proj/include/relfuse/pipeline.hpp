#pragma once

#include <map>
#include <string>
#include <vector>

#include "relfuse/bsp.hpp"
#include "relfuse/moment_fusion.hpp"
#include "relfuse/rbd.hpp"

namespace relfuse {

struct FitOptions {
  double level = 0.95;
  FusionOptions fusion;
  /// Ignore every node except the root: zero-precision (or elicited) root
  /// prior updated with the root's own data.
  bool system_only = false;
};

struct NodeFit {
  std::string label;
  BetaStacyProcess prior;
  BetaStacyProcess posterior;
};

struct FitResult {
  BetaStacyProcess system;
  std::vector<NodeFit> nodes;  // post-order, labelled nodes only
  std::vector<std::string> warnings;
};

using SampleMap = std::map<std::string, std::vector<LifetimeSample>>;
using PriorMap = std::map<std::string, BetaStacyProcess>;

/// Hierarchical fit. Each component starts from its elicited prior (or zero
/// precision) and is updated with its data; each group fuses its children's
/// posterior moments into a prior, merges any elicited prior for its label,
/// and is updated with its own data. Sibling subtrees are fitted concurrently.
///
/// Data and priors are looked up through spec.data_bindings and
/// spec.prior_bindings; when a binding map is empty, names bind to the node
/// label of the same name.
FitResult fit_system(const SystemSpec& spec, const SampleMap& data, const PriorMap& priors,
                     const FitOptions& options = {});

}  // namespace relfuse
