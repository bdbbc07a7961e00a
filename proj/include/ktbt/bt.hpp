#pragma once

// Behavior-tree AST and tick interpreter.
//
// Trees are plain values: a Node owns its children, copies are deep, and the
// only mutable runtime state is the TimerState carried by Wait/TT1/TT2 nodes.
// Composites are memoryless: each tick restarts from the leftmost child.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ktbt/message.hpp"
#include "ktbt/vec2.hpp"

namespace ktbt {

enum class NodeStatus { Success, Failure, Running };

const char* to_string(NodeStatus s);

enum class NodeKind { Sequence, Selector, Parallel, Inverter, TT1, TT2, Condition, Action, Wait };

const char* to_string(NodeKind k);

struct TimerState {
  bool started = false;
  Tick start_tick = 0;  // meaningful only when started
};

struct Node {
  NodeKind kind = NodeKind::Action;
  std::vector<Node> children;
  std::string tag;     // Condition, Action
  bool negated = false;  // Condition
  Tick ticks = 0;        // TT1/TT2 limit, Wait duration
  TimerState timer;      // TT1, TT2, Wait

  static Node sequence(std::vector<Node> children);
  static Node selector(std::vector<Node> children);
  static Node parallel(std::vector<Node> children);
  static Node inverter(Node child);
  static Node tt1(Tick limit_ticks, Node child);
  static Node tt2(Tick limit_ticks, Node child);
  static Node condition(std::string tag, bool negated = false);
  static Node action(std::string tag);
  static Node wait(Tick duration_ticks);

  bool is_composite() const;
  bool is_decorator() const;
  bool is_leaf() const;

  /// Structural equality: kind, tags, negation, tick parameters and children.
  /// Timer state is runtime data and is ignored.
  friend bool operator==(const Node& a, const Node& b);
};

/// Raised for trees that violate the Node invariants or lack a shape an
/// operation requires.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an Action is ticked but its tag has no handler.
class UnregisteredAction : public std::runtime_error {
 public:
  explicit UnregisteredAction(std::string tag);
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

/// Throws StructuralError unless every node has the arity its kind requires
/// and every tag is an identifier.
void validate(const Node& tree);

/// Per-agent blackboard. Absent flags read as false.
class StateManager {
 public:
  bool flag(std::string_view name) const;
  void set_flag(std::string_view name, bool value);

  Vec2 vector(std::string_view name) const;
  void set_vector(std::string_view name, Vec2 value);

  bool cooldown_active() const { return flag(kCooldownFlag); }
  void set_cooldown(Tick now);
  void clear_cooldown();

  static constexpr std::string_view kCooldownFlag = "_cooldownF";
  static constexpr std::string_view kWaitFlag = "_waitF";

  std::map<std::string, bool, std::less<>> flags;
  std::map<std::string, Vec2, std::less<>> vectors;
  std::deque<Message> query_inbox;     // Q_m
  std::deque<Message> response_inbox;  // Q_r
  std::vector<Message> outbox;
  Tick tick_now = 0;
  Tick cooldown_set_tick = 0;
};

using ActionHandler = std::function<NodeStatus(StateManager&, AgentId)>;

class ActionRegistry {
 public:
  void add(std::string tag, ActionHandler handler);
  bool contains(std::string_view tag) const;
  /// nullptr when absent.
  const ActionHandler* find(std::string_view tag) const;

 private:
  std::map<std::string, ActionHandler, std::less<>> handlers_;
};

/// Ticks `node` once at time `sm.tick_now`. Timer decorators and Wait keep
/// their state inside the node, so the same tree must be ticked across time.
NodeStatus tick(Node& node, StateManager& sm, const ActionRegistry& registry, AgentId agent = 0);

/// Copy of `tree` with every TimerState cleared.
Node reset(const Node& tree);
void reset_in_place(Node& tree);

}  // namespace ktbt
