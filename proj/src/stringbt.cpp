#include "ktbt/stringbt.hpp"

#include <charconv>
#include <limits>
#include <vector>

namespace ktbt {

ParseError::ParseError(std::size_t offset, const std::string& what)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + what), offset_(offset), detail_(what) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  std::size_t pos() const { return pos_; }

  // Reads "<name>" and returns name.
  std::string_view tag() {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || text_[pos_] != '<') throw ParseError(start, "expected a tag");
    std::size_t end = pos_ + 1;
    while (end < text_.size() && end - start <= 8 && text_[end] != '>') ++end;
    if (end >= text_.size() || text_[end] != '>') throw ParseError(start, "unterminated or unknown tag");
    pos_ = end + 1;
    return text_.substr(start + 1, end - start - 1);
  }

  void expect(char c, const char* what) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) throw ParseError(pos_, std::string("expected ") + what);
    ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) throw ParseError(start, "malformed identifier");
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Tick number() {
    skip_space();
    const std::size_t start = pos_;
    Tick value = 0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) throw ParseError(start, "integer out of range");
    if (ec != std::errc{} || ptr == first || *first == '-' || *first == '+') {
      throw ParseError(start, "expected a nonnegative integer");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  Tick paren_number() {
    expect('(', "'('");
    const Tick n = number();
    expect(')', "')'");
    return n;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

struct Frame {
  Node node;
  std::size_t offset;
};

Node parse_condition_leaf(Lexer& lx) {
  lx.expect('(', "'('");
  const bool negated = lx.accept('!');
  std::string id = lx.identifier();
  lx.expect(')', "')'");
  return Node::condition(std::move(id), negated);
}

}  // namespace

Node parse(std::string_view document) {
  Lexer lx(document);
  if (lx.at_end()) throw ParseError(0, "empty document");
  {
    const std::size_t at = lx.pos();
    if (lx.tag() != "Root") throw ParseError(at, "document must start with <Root>");
  }

  std::vector<Frame> stack;
  std::optional<Node> root;

  auto attach = [&](Node n, std::size_t at) {
    if (stack.empty()) {
      root = std::move(n);
      return;
    }
    Frame& parent = stack.back();
    if (parent.node.is_decorator() && !parent.node.children.empty()) {
      throw ParseError(at, std::string(to_string(parent.node.kind)) + " takes exactly one child");
    }
    parent.node.children.push_back(std::move(n));
  };

  while (!root) {
    if (lx.at_end()) {
      if (stack.empty()) throw ParseError(lx.pos(), "<Root> has no child");
      throw ParseError(lx.pos(), "unclosed composite at end of input");
    }
    const std::size_t at = lx.pos();
    const std::string_view name = lx.tag();

    auto open = [&](Node n) {
      if (stack.size() >= kMaxParseDepth) throw ParseError(at, "nesting too deep");
      stack.push_back(Frame{std::move(n), at});
    };

    if (name == "sq") {
      open(Node{.kind = NodeKind::Sequence});
    } else if (name == "sl") {
      open(Node{.kind = NodeKind::Selector});
    } else if (name == "pl") {
      open(Node{.kind = NodeKind::Parallel});
    } else if (name == "inv") {
      open(Node{.kind = NodeKind::Inverter});
    } else if (name == "tt1") {
      open(Node{.kind = NodeKind::TT1, .ticks = lx.paren_number()});
    } else if (name == "tt2") {
      open(Node{.kind = NodeKind::TT2, .ticks = lx.paren_number()});
    } else if (name == "e") {
      if (stack.empty()) throw ParseError(at, "unbalanced <e>");
      Frame top = std::move(stack.back());
      stack.pop_back();
      if (top.node.children.empty()) {
        throw ParseError(at, top.node.is_decorator() ? "decorator without child" : "empty composite");
      }
      attach(std::move(top.node), at);
    } else if (name == "c") {
      attach(parse_condition_leaf(lx), at);
    } else if (name == "a") {
      lx.expect('(', "'('");
      std::string id = lx.identifier();
      lx.expect(')', "')'");
      attach(Node::action(std::move(id)), at);
    } else if (name == "w") {
      attach(Node::wait(lx.paren_number()), at);
    } else if (name == "Root") {
      throw ParseError(at, "nested <Root>");
    } else {
      throw ParseError(at, "unknown tag <" + std::string(name) + ">");
    }
  }

  if (!lx.at_end()) throw ParseError(lx.pos(), "trailing tokens after root closes");
  return std::move(*root);
}

namespace {

void serialize_into(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Sequence: out += "<sq>"; break;
    case NodeKind::Selector: out += "<sl>"; break;
    case NodeKind::Parallel: out += "<pl>"; break;
    case NodeKind::Inverter: out += "<inv>"; break;
    case NodeKind::TT1: out += "<tt1>(" + std::to_string(n.ticks) + ")"; break;
    case NodeKind::TT2: out += "<tt2>(" + std::to_string(n.ticks) + ")"; break;
    case NodeKind::Condition:
      out += n.negated ? "<c>(!" : "<c>(";
      out += n.tag;
      out += ')';
      return;
    case NodeKind::Action:
      out += "<a>(";
      out += n.tag;
      out += ')';
      return;
    case NodeKind::Wait:
      out += "<w>(" + std::to_string(n.ticks) + ")";
      return;
  }
  for (const auto& c : n.children) serialize_into(c, out);
  out += "<e>";
}

void outline_into(const Node& n, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += to_string(n.kind);
  switch (n.kind) {
    case NodeKind::Condition:
      out += n.negated ? " !" : " ";
      out += n.tag;
      break;
    case NodeKind::Action:
      out += ' ';
      out += n.tag;
      break;
    case NodeKind::Wait:
    case NodeKind::TT1:
    case NodeKind::TT2:
      out += ' ';
      out += std::to_string(n.ticks);
      break;
    default:
      break;
  }
  out += '\n';
  for (const auto& c : n.children) outline_into(c, depth + 1, out);
}

// Condition prefix of a knowledge-shaped child, or nullopt.
std::optional<ConditionSequence> knowledge_key(const Node& child) {
  if (child.kind != NodeKind::Sequence || child.children.size() < 2) return std::nullopt;
  std::vector<ConditionLiteral> lits;
  for (std::size_t i = 0; i + 1 < child.children.size(); ++i) {
    const Node& c = child.children[i];
    if (c.kind != NodeKind::Condition) return std::nullopt;
    lits.push_back({c.tag, c.negated});
  }
  try {
    return ConditionSequence(std::move(lits));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

std::string serialize(const Node& tree) {
  std::string out = "<Root>";
  serialize_into(tree, out);
  return out;
}

std::string serialize_conditions(const ConditionSequence& seq) {
  std::string out;
  for (const auto& lit : seq.literals()) {
    out += lit.negated ? "<c>(!" : "<c>(";
    out += lit.tag;
    out += ')';
  }
  return out;
}

ConditionSequence parse_conditions(std::string_view text) {
  Lexer lx(text);
  std::vector<ConditionLiteral> lits;
  while (!lx.at_end()) {
    const std::size_t at = lx.pos();
    if (lx.tag() != "c") throw ParseError(at, "condition sequence may only contain <c> tokens");
    Node c = parse_condition_leaf(lx);
    lits.push_back({std::move(c.tag), c.negated});
  }
  if (lits.empty()) throw ParseError(0, "empty condition sequence");
  try {
    return ConditionSequence(std::move(lits));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

std::string outline(const Node& tree) {
  std::string out;
  outline_into(tree, 0, out);
  return out;
}

std::optional<Node> find_knowledge(const Node& control, const ConditionSequence& query) {
  if (control.kind != NodeKind::Selector) return std::nullopt;
  for (const auto& child : control.children) {
    auto key = knowledge_key(child);
    if (key && *key == query) return reset(child.children.back());
  }
  return std::nullopt;
}

Node knowledge_subtree(const ConditionSequence& seq, const Node& action) {
  std::vector<Node> children;
  children.reserve(seq.size() + 1);
  for (const auto& lit : seq.literals()) children.push_back(Node::condition(lit.tag, lit.negated));
  children.push_back(reset(action));
  return Node::sequence(std::move(children));
}

Node merge_knowledge(const Node& control, const ConditionSequence& seq, const Node& action) {
  if (control.kind != NodeKind::Selector || control.children.empty()) {
    throw StructuralError("control tree must be a selector ending in a fallback child");
  }
  if (find_knowledge(control, seq)) return control;
  Node merged = control;
  merged.children.insert(merged.children.end() - 1, knowledge_subtree(seq, action));
  return merged;
}

}  // namespace ktbt
