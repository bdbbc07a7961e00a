#pragma once

// Range-limited broadcast medium. Messages sent during tick t are delivered
// when deliver() runs at the end of tick t and are readable from tick t+1.

#include <cstddef>
#include <vector>

#include "ktbt/bt.hpp"
#include "ktbt/knowledge.hpp"
#include "ktbt/message.hpp"
#include "ktbt/vec2.hpp"

namespace ktbt {

struct CommStats {
  std::size_t queries_sent = 0;
  std::size_t responses_sent = 0;
  /// Queries that reached no agent holding the queried knowledge.
  std::size_t queries_lost = 0;
  /// Queries that reached no agent at all.
  std::size_t queries_unheard = 0;

  friend bool operator==(const CommStats&, const CommStats&) = default;
};

/// A receiver as seen by the medium at delivery time.
struct Endpoint {
  AgentId id = 0;
  Vec2 position;
  StateManager* sm = nullptr;
  const KnowledgeBase* kb = nullptr;  // may be null: knows nothing
};

struct DeliveryReport {
  /// Recipient count for each delivered message, in send order.
  std::vector<std::size_t> recipients;
};

class Medium {
 public:
  explicit Medium(double d_coms) : d_coms_(d_coms) {}

  /// Queues `msg` with a snapshot of the sender's position. Throws
  /// std::invalid_argument for a Response whose payload is not valid stringBT.
  void broadcast(AgentId sender, Vec2 sender_pos, Message msg);

  /// Appends each pending message to Q_m (queries) or Q_r (responses) of every
  /// endpoint within d_coms of the sender's snapshot position, except the
  /// sender, then clears the pending list.
  DeliveryReport deliver(const std::vector<Endpoint>& endpoints);

  double d_coms() const { return d_coms_; }
  const CommStats& stats() const { return stats_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  struct Pending {
    Message msg;
    Vec2 origin;
  };

  double d_coms_;
  std::vector<Pending> pending_;
  CommStats stats_;
};

}  // namespace ktbt
