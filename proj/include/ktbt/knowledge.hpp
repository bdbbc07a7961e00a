#pragma once

// Knowledge-transfer agents: control-tree construction, the teach responder,
// and the learn querier/merger.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "ktbt/bt.hpp"
#include "ktbt/condition_sequence.hpp"
#include "ktbt/message.hpp"

namespace ktbt {

struct KnowledgeEntry {
  ConditionSequence seq;
  Node action;
};

/// Ordered (known-states, known-actions) pairs. Entries are only ever appended,
/// so an index stays valid for the lifetime of the base.
class KnowledgeBase {
 public:
  /// Index of the entry keyed by `seq`.
  std::optional<std::size_t> index_of(const ConditionSequence& seq) const;
  bool knows(const ConditionSequence& seq) const { return index_of(seq).has_value(); }
  /// Appends; returns false (and changes nothing) if `seq` is already known.
  bool add(ConditionSequence seq, Node action);

  const std::vector<KnowledgeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<KnowledgeEntry> entries_;
};

inline constexpr Tick kDefaultT1Limit = 50;
inline constexpr Tick kDefaultT2Limit = 100;

struct PendingQuery {
  ConditionSequence seq;
  Tick issued_tick = 0;
};

/// The full per-agent tree Parallel(control, teach, learn) plus the state the
/// protocol needs. `tree.children[0]` is the live control tree and is replaced
/// wholesale when knowledge is merged.
struct KtAgent {
  AgentId id = 0;
  Node tree;
  KnowledgeBase kb;
  StateManager sm;
  Tick t1_limit = kDefaultT1Limit;
  Tick t2_limit = kDefaultT2Limit;
  std::optional<PendingQuery> pending_query;
  std::size_t protocol_errors = 0;

  Node& control() { return tree.children.at(0); }
  const Node& control() const { return tree.children.at(0); }
};

/// Selector[critical..., common..., prior..., fallback]. New knowledge is
/// inserted right before the fallback.
Node build_control(std::vector<Node> critical, std::vector<Node> common, std::vector<Node> prior, Node fallback);

/// Action tags used by the teach/learn trees.
inline constexpr const char* kTeachAction = "TeachResponder";
inline constexpr const char* kClearCooldownAction = "ClearCooldown";
inline constexpr const char* kAwaitResponseAction = "AwaitResponse";
inline constexpr const char* kQueryUnknownAction = "QueryUnknown";

/// Selector[Sequence[_cooldownF, TT1(t1, ClearCooldown)], TeachResponder]
Node build_teach_tree(Tick t1_limit);
/// Selector[Sequence[_waitF, AwaitResponse], Sequence[!_cooldownF, QueryUnknown]]
Node build_learn_tree();

/// Builds an agent. `prior` entries are both recorded in the knowledge base
/// and merged into the control tree. With `transfer` false the agent's tree
/// is Parallel(control) only, i.e. it never teaches nor learns.
KtAgent make_agent(AgentId id, Node control, std::vector<KnowledgeEntry> prior, bool transfer,
                   Tick t1_limit = kDefaultT1Limit, Tick t2_limit = kDefaultT2Limit);

/// Answers the oldest fresh query in Q_m if it is known. Returns nothing while
/// the cooldown flag is set (queries stay queued), when Q_m is empty, or when
/// the query is unknown (it is dropped). Queries older than t2_limit are
/// dropped unanswered since their sender has stopped waiting. Answering sets
/// the cooldown flag.
std::optional<Message> teach(KtAgent& agent);

/// Starts a query for `seq` unless it is known, a query is already pending,
/// or the cooldown flag is set.
std::optional<Message> learn_begin(KtAgent& agent, const ConditionSequence& seq);

enum class LearnOutcome { Learned, TimedOut, StillWaiting, Idle };
const char* to_string(LearnOutcome o);

/// Consumes Q_r. With a query pending, the first response that answers it and
/// parses is merged into the knowledge base and control tree. Otherwise the
/// query times out once more than t2_limit ticks have passed, which also sets
/// the cooldown flag.
LearnOutcome learn_complete(KtAgent& agent);

/// Decides, at tick time, which unknown condition sequence (if any) the agent
/// is facing.
using EncounterFn = std::function<std::optional<ConditionSequence>(const KtAgent&)>;
using AgentLookup = std::function<KtAgent&(AgentId)>;

/// Registers TeachResponder, ClearCooldown, AwaitResponse and QueryUnknown.
/// Outgoing messages are appended to the agent's `sm.outbox`.
void register_protocol_actions(ActionRegistry& registry, AgentLookup lookup, EncounterFn encounter);

/// Ticks the agent's full tree at time `now`.
NodeStatus tick_agent(KtAgent& agent, const ActionRegistry& registry, Tick now);

}  // namespace ktbt
