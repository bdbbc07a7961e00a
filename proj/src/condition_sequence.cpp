#include "ktbt/condition_sequence.hpp"

#include <algorithm>
#include <stdexcept>

namespace ktbt {

namespace {

bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace

bool is_identifier(std::string_view s) {
  return !s.empty() && is_ident_start(s.front()) && std::all_of(s.begin() + 1, s.end(), is_ident_char);
}

ConditionSequence::ConditionSequence(std::vector<ConditionLiteral> literals) : literals_(std::move(literals)) {
  if (literals_.empty()) throw std::invalid_argument("condition sequence must be nonempty");
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    if (!is_identifier(literals_[i].tag)) {
      throw std::invalid_argument("invalid condition tag '" + literals_[i].tag + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (literals_[j] == literals_[i]) {
        throw std::invalid_argument("duplicate condition '" + literals_[i].tag + "' in sequence");
      }
    }
  }
}

ConditionSequence ConditionSequence::of(std::string_view tag) {
  return ConditionSequence({ConditionLiteral{std::string(tag), false}});
}

}  // namespace ktbt
