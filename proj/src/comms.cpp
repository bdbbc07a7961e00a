#include "ktbt/comms.hpp"

#include <optional>
#include <stdexcept>

#include "ktbt/stringbt.hpp"

namespace ktbt {

void Medium::broadcast(AgentId sender, Vec2 sender_pos, Message msg) {
  msg.sender = sender;
  if (msg.kind == MessageKind::Response) {
    try {
      (void)parse(msg.payload);
    } catch (const ParseError& e) {
      throw std::invalid_argument(std::string("response payload is not stringBT: ") + e.what());
    }
    ++stats_.responses_sent;
  } else {
    ++stats_.queries_sent;
  }
  pending_.push_back(Pending{std::move(msg), sender_pos});
}

DeliveryReport Medium::deliver(const std::vector<Endpoint>& endpoints) {
  DeliveryReport report;
  report.recipients.reserve(pending_.size());
  for (auto& p : pending_) {
    const bool is_query = p.msg.kind == MessageKind::Query;
    std::optional<ConditionSequence> asked;
    if (is_query) {
      try {
        asked = parse_conditions(p.msg.payload);
      } catch (const ParseError&) {
      }
    }

    std::size_t count = 0;
    bool capable_reached = false;
    for (const auto& ep : endpoints) {
      if (ep.id == p.msg.sender || ep.sm == nullptr) continue;
      if (distance(ep.position, p.origin) > d_coms_) continue;
      ++count;
      if (is_query) {
        ep.sm->query_inbox.push_back(p.msg);
        if (asked && ep.kb != nullptr && ep.kb->knows(*asked)) capable_reached = true;
      } else {
        ep.sm->response_inbox.push_back(p.msg);
      }
    }
    if (is_query) {
      if (count == 0) ++stats_.queries_unheard;
      if (!capable_reached) ++stats_.queries_lost;
    }
    report.recipients.push_back(count);
  }
  pending_.clear();
  return report;
}

}  // namespace ktbt
