#include "relfuse/rbd.hpp"

#include <cctype>
#include <functional>
#include <optional>

#include <nlohmann/json.hpp>

#include "relfuse/errors.hpp"

namespace relfuse {

namespace {

struct Token {
  enum class Kind { ident, lparen, rparen, comma, at, end };
  Kind kind = Kind::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= src_.size()) return tok;
    const char c = src_[pos_];
    switch (c) {
      case '(': tok.kind = Token::Kind::lparen; break;
      case ')': tok.kind = Token::Kind::rparen; break;
      case ',': tok.kind = Token::Kind::comma; break;
      case '@': tok.kind = Token::Kind::at; break;
      default:
        if (!ident_start(c)) {
          throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
        }
        tok.kind = Token::Kind::ident;
        while (pos_ < src_.size() && ident_char(src_[pos_])) tok.text += advance();
        return tok;
    }
    tok.text = std::string(1, advance());
    return tok;
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { tok_ = lexer_.next(); }

  RbdNode parse_root() {
    RbdNode root = parse_node();
    if (tok_.kind != Token::Kind::end) fail("unexpected '" + tok_.text + "' after diagram");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.column);
  }

  void expect(Token::Kind kind, const char* what) {
    if (tok_.kind != kind) {
      fail(std::string("expected ") + what +
           (tok_.kind == Token::Kind::end ? " before end of input" : ", found '" + tok_.text + "'"));
    }
    tok_ = lexer_.next();
  }

  void claim(const std::string& name, const Token& at) {
    if (!names_.insert(name).second) {
      throw ParseError("duplicate id '" + name + "'", at.line, at.column);
    }
  }

  RbdNode parse_node() {
    if (tok_.kind != Token::Kind::ident) fail("expected a component or group");
    const Token first = tok_;
    tok_ = lexer_.next();

    std::optional<Token> label;
    Token head = first;
    if (tok_.kind == Token::Kind::at) {
      tok_ = lexer_.next();
      if (tok_.kind != Token::Kind::ident) fail("expected a node after '@'");
      label = first;
      head = tok_;
      tok_ = lexer_.next();
    }

    RbdNode node;
    if (tok_.kind == Token::Kind::lparen) {
      if (head.text == "series") {
        node.kind = RbdNode::Kind::series;
      } else if (head.text == "parallel") {
        node.kind = RbdNode::Kind::parallel;
      } else {
        throw ParseError("unknown keyword '" + head.text + "'", head.line, head.column);
      }
      tok_ = lexer_.next();
      node.children.push_back(parse_node());
      while (tok_.kind == Token::Kind::comma) {
        tok_ = lexer_.next();
        node.children.push_back(parse_node());
      }
      expect(Token::Kind::rparen, "')' or ','");
      if (node.children.size() < 2) {
        throw ParseError("group '" + head.text + "' needs at least 2 children", head.line,
                         head.column);
      }
    } else {
      if (head.text == "series" || head.text == "parallel") {
        throw ParseError("'" + head.text + "' is a keyword and needs '('", head.line,
                         head.column);
      }
      node.kind = RbdNode::Kind::component;
      node.id = head.text;
    }
    if (label) node.label = label->text;
    if (!node.binding_name().empty()) claim(node.binding_name(), label ? *label : head);
    if (label && node.is_component()) claim(node.id, head);
    return node;
  }

  Lexer lexer_;
  Token tok_;
  std::set<std::string> names_;
};

RbdNode node_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("rbd json: node must be an object");
  const std::string type = j.value("type", "");
  RbdNode node;
  node.label = j.value("label", "");
  if (type == "component") {
    node.kind = RbdNode::Kind::component;
    node.id = j.value("id", "");
    return node;
  }
  if (type == "series") {
    node.kind = RbdNode::Kind::series;
  } else if (type == "parallel") {
    node.kind = RbdNode::Kind::parallel;
  } else {
    throw InvalidInput("rbd json: unknown node type '" + type + "'");
  }
  if (!j.contains("children") || !j["children"].is_array()) {
    throw InvalidInput("rbd json: group without a children array");
  }
  for (const auto& child : j["children"]) node.children.push_back(node_from_json(child));
  return node;
}

nlohmann::json node_to_json(const RbdNode& node) {
  nlohmann::json j;
  switch (node.kind) {
    case RbdNode::Kind::component:
      j["type"] = "component";
      j["id"] = node.id;
      break;
    case RbdNode::Kind::series:
      j["type"] = "series";
      break;
    case RbdNode::Kind::parallel:
      j["type"] = "parallel";
      break;
  }
  if (!node.label.empty()) j["label"] = node.label;
  if (!node.is_component()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : node.children) j["children"].push_back(node_to_json(c));
  }
  return j;
}

void collect_labels(const RbdNode& node, std::vector<std::string>& out) {
  if (!node.binding_name().empty()) out.push_back(node.binding_name());
  for (const auto& c : node.children) collect_labels(c, out);
}

}  // namespace

RbdNode component(std::string id, std::string label) {
  RbdNode n;
  n.kind = RbdNode::Kind::component;
  n.id = std::move(id);
  n.label = std::move(label);
  return n;
}

RbdNode series(std::vector<RbdNode> children, std::string label) {
  RbdNode n;
  n.kind = RbdNode::Kind::series;
  n.children = std::move(children);
  n.label = std::move(label);
  return n;
}

RbdNode parallel(std::vector<RbdNode> children, std::string label) {
  RbdNode n;
  n.kind = RbdNode::Kind::parallel;
  n.children = std::move(children);
  n.label = std::move(label);
  return n;
}

SystemSpec parse_rbd(std::string_view source) {
  Parser parser(source);
  return SystemSpec{parser.parse_root(), {}, {}};
}

SystemSpec parse_rbd_json(std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("rbd json: ") + e.what());
  }
  SystemSpec spec{node_from_json(j), {}, {}};
  check_tree(spec.root);
  return spec;
}

SystemSpec parse_rbd_any(std::string_view source) {
  for (char c : source) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' ? parse_rbd_json(source) : parse_rbd(source);
  }
  return parse_rbd(source);
}

std::string to_dsl(const RbdNode& node) {
  std::string out;
  if (!node.label.empty()) out += node.label + "@";
  if (node.is_component()) return out + node.id;
  out += node.kind == RbdNode::Kind::series ? "series(" : "parallel(";
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_dsl(node.children[i]);
  }
  return out + ")";
}

std::string to_json(const RbdNode& node) { return node_to_json(node).dump(2); }

std::vector<std::string> node_labels(const RbdNode& root) {
  std::vector<std::string> out;
  collect_labels(root, out);
  return out;
}

void check_tree(const RbdNode& root) {
  std::set<std::string> seen;
  std::function<void(const RbdNode&)> visit = [&](const RbdNode& n) {
    if (n.is_component()) {
      if (n.id.empty()) throw InvalidInput("rbd: component without an id");
      if (!n.children.empty()) throw InvalidInput("rbd: component '" + n.id + "' has children");
      if (!n.label.empty() && !seen.insert(n.id).second) {
        throw InvalidInput("rbd: duplicate id '" + n.id + "'");
      }
    } else if (n.children.size() < 2) {
      throw InvalidInput("rbd: group needs at least 2 children");
    }
    if (!n.binding_name().empty() && !seen.insert(n.binding_name()).second) {
      throw InvalidInput("rbd: duplicate id '" + n.binding_name() + "'");
    }
    for (const auto& c : n.children) visit(c);
  };
  visit(root);
}

void bind_by_name(SystemSpec& spec, const std::set<std::string>& datasets,
                  const std::set<std::string>& priors) {
  for (const auto& name : datasets) spec.data_bindings[name] = name;
  for (const auto& name : priors) spec.prior_bindings[name] = name;
}

std::vector<Diagnostic> validate_bindings(const SystemSpec& spec,
                                          const std::set<std::string>& datasets,
                                          const std::set<std::string>& priors) {
  std::vector<Diagnostic> out;
  const std::vector<std::string> labels = node_labels(spec.root);
  const std::set<std::string> label_set(labels.begin(), labels.end());

  auto check = [&](const std::map<std::string, std::string>& bindings,
                   const std::set<std::string>& available, const char* kind) {
    for (const auto& [label, ref] : bindings) {
      if (!label_set.contains(label)) {
        out.push_back({Diagnostic::Severity::error, label,
                       std::string(kind) + " bound to unknown node label '" + label + "'"});
      } else if (!available.contains(ref)) {
        out.push_back({Diagnostic::Severity::error, label,
                       std::string(kind) + " '" + ref + "' for node '" + label +
                           "' is not available"});
      }
    }
  };
  check(spec.data_bindings, datasets, "dataset");
  check(spec.prior_bindings, priors, "prior");

  // Leaves without any information enter the fusion with zero precision.
  std::function<void(const RbdNode&)> visit = [&](const RbdNode& n) {
    const std::string& name = n.binding_name();
    if (n.is_component() && !spec.data_bindings.contains(name) &&
        !spec.prior_bindings.contains(name)) {
      out.push_back({Diagnostic::Severity::info, name,
                     "no data or prior for component '" + name +
                         "'; using a zero-precision prior"});
    }
    for (const auto& c : n.children) visit(c);
  };
  visit(spec.root);
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.severity == Diagnostic::Severity::error) return true;
  }
  return false;
}

}  // namespace relfuse
