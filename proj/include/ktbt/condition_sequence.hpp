#pragma once

#include <compare>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ktbt {

/// One condition of a knowledge key: a blackboard flag name, optionally negated.
struct ConditionLiteral {
  std::string tag;
  bool negated = false;

  friend auto operator<=>(const ConditionLiteral&, const ConditionLiteral&) = default;
};

/// Ordered, nonempty list of distinct condition literals. This is the key under
/// which knowledge is stored, queried and taught. Order is significant:
/// [a, b] and [b, a] are different keys.
class ConditionSequence {
 public:
  ConditionSequence() = default;
  /// Throws std::invalid_argument when empty, when a tag is not an identifier,
  /// or when a literal repeats.
  explicit ConditionSequence(std::vector<ConditionLiteral> literals);
  ConditionSequence(std::initializer_list<ConditionLiteral> literals)
      : ConditionSequence(std::vector<ConditionLiteral>(literals)) {}

  /// Shorthand for a single non-negated flag.
  static ConditionSequence of(std::string_view tag);

  std::span<const ConditionLiteral> literals() const { return literals_; }
  std::size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }

  friend auto operator<=>(const ConditionSequence&, const ConditionSequence&) = default;

 private:
  std::vector<ConditionLiteral> literals_;
};

/// True iff `s` matches [A-Za-z_][A-Za-z0-9_]*.
bool is_identifier(std::string_view s);

}  // namespace ktbt
