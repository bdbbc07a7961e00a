#pragma once

// stringBT: the tagged-string wire format for behavior trees.
//
//   document  := "<Root>" node
//   node      := composite | decorator | leaf
//   composite := ("<sq>" | "<sl>" | "<pl>") node+ "<e>"
//   decorator := ("<inv>" | "<tt1>(" N ")" | "<tt2>(" N ")") node "<e>"
//   leaf      := "<c>(" ["!"] IDENT ")" | "<a>(" IDENT ")" | "<w>(" N ")"
//
// Whitespace between tokens is ignored. serialize() emits the canonical form,
// which has no whitespace at all, so canonical documents compare byte-for-byte.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ktbt/bt.hpp"
#include "ktbt/condition_sequence.hpp"

namespace ktbt {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what);
  /// Byte offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }
  /// Message without the offset prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t offset_;
  std::string detail_;
};

/// Deepest nesting the parser accepts; deeper input is rejected, not recursed.
inline constexpr std::size_t kMaxParseDepth = 512;

Node parse(std::string_view document);
std::string serialize(const Node& tree);

/// Canonical query payload: the literals as concatenated `<c>(...)` tokens.
std::string serialize_conditions(const ConditionSequence& seq);
ConditionSequence parse_conditions(std::string_view text);

/// Indented one-node-per-line rendering, for humans.
std::string outline(const Node& tree);

/// Looks for a direct child of the control selector shaped
/// Sequence[Condition..., action] whose condition list equals `query` exactly
/// and returns a copy of its action sub-tree.
std::optional<Node> find_knowledge(const Node& control, const ConditionSequence& query);

/// The knowledge sub-tree Sequence[conditions..., action].
Node knowledge_subtree(const ConditionSequence& seq, const Node& action);

/// Inserts Sequence[conditions..., action] immediately before the fallback
/// (last) child of the control selector. No-op when `seq` is already known.
/// Throws StructuralError if `control` is not a selector with a fallback child.
Node merge_knowledge(const Node& control, const ConditionSequence& seq, const Node& action);

}  // namespace ktbt
