#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace relfuse {

/// Reliability block diagram: a component leaf or a series/parallel group of
/// at least two children. Any node may carry a label naming the data or prior
/// bound to it; a component's binding name defaults to its id.
struct RbdNode {
  enum class Kind { component, series, parallel };

  Kind kind = Kind::component;
  std::string id;
  std::string label;
  std::vector<RbdNode> children;

  bool is_component() const noexcept { return kind == Kind::component; }
  const std::string& binding_name() const noexcept { return label.empty() ? id : label; }

  friend bool operator==(const RbdNode&, const RbdNode&) = default;
};

RbdNode component(std::string id, std::string label = {});
RbdNode series(std::vector<RbdNode> children, std::string label = {});
RbdNode parallel(std::vector<RbdNode> children, std::string label = {});

struct SystemSpec {
  RbdNode root;
  std::map<std::string, std::string> data_bindings;   // node label -> dataset name
  std::map<std::string, std::string> prior_bindings;  // node label -> prior name
};

/// Parses the block-diagram DSL:
///
///   node := [IDENT "@"] (IDENT | ("series" | "parallel") "(" node ("," node)+ ")")
///
/// `#` starts a comment running to end of line. Throws ParseError with the
/// 1-based line and column of the offending token.
SystemSpec parse_rbd(std::string_view source);

/// Same tree as JSON: {"type": "series"|"parallel"|"component", "id", "label", "children"}.
SystemSpec parse_rbd_json(std::string_view source);

/// Dispatches on content: a leading '{' selects JSON, anything else the DSL.
SystemSpec parse_rbd_any(std::string_view source);

std::string to_dsl(const RbdNode& node);
std::string to_json(const RbdNode& node);

/// Binding names in pre-order.
std::vector<std::string> node_labels(const RbdNode& root);

/// Checks structural invariants of a programmatically built tree: unique
/// binding names, groups of arity >= 2, nonempty ids. Throws InvalidInput.
void check_tree(const RbdNode& root);

/// Binds every available dataset/prior name to the node of the same label.
/// Names that match no node still get a binding so validation reports them.
void bind_by_name(SystemSpec& spec, const std::set<std::string>& datasets,
                  const std::set<std::string>& priors);

struct Diagnostic {
  enum class Severity { info, error };
  Severity severity = Severity::error;
  std::string label;
  std::string message;
};

std::vector<Diagnostic> validate_bindings(const SystemSpec& spec,
                                          const std::set<std::string>& datasets,
                                          const std::set<std::string>& priors);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace relfuse
