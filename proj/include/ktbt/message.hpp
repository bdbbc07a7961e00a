#pragma once

#include <cstdint>
#include <string>

namespace ktbt {

using AgentId = std::uint32_t;
using Tick = std::uint64_t;

enum class MessageKind { Query, Response };

/// A broadcast on the shared medium.
///
/// Query: `payload` is the queried condition sequence rendered as canonical
/// `<c>(tag)` tokens. Response: `payload` is the canonical stringBT document of
/// the taught action sub-tree and `in_reply_to` repeats the query payload it
/// answers, so overhearing agents can tell which knowledge it carries.
struct Message {
  MessageKind kind = MessageKind::Query;
  AgentId sender = 0;
  Tick sent_tick = 0;
  std::string payload;
  std::string in_reply_to;

  friend bool operator==(const Message&, const Message&) = default;
};

}  // namespace ktbt
