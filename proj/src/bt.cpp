#include "ktbt/bt.hpp"

#include "ktbt/condition_sequence.hpp"

namespace ktbt {

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Success: return "Success";
    case NodeStatus::Failure: return "Failure";
    case NodeStatus::Running: return "Running";
  }
  return "?";
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Sequence: return "Sequence";
    case NodeKind::Selector: return "Selector";
    case NodeKind::Parallel: return "Parallel";
    case NodeKind::Inverter: return "Inverter";
    case NodeKind::TT1: return "TT1";
    case NodeKind::TT2: return "TT2";
    case NodeKind::Condition: return "Condition";
    case NodeKind::Action: return "Action";
    case NodeKind::Wait: return "Wait";
  }
  return "?";
}

Node Node::sequence(std::vector<Node> children) {
  return Node{.kind = NodeKind::Sequence, .children = std::move(children)};
}
Node Node::selector(std::vector<Node> children) {
  return Node{.kind = NodeKind::Selector, .children = std::move(children)};
}
Node Node::parallel(std::vector<Node> children) {
  return Node{.kind = NodeKind::Parallel, .children = std::move(children)};
}
Node Node::inverter(Node child) {
  Node n{.kind = NodeKind::Inverter};
  n.children.push_back(std::move(child));
  return n;
}
Node Node::tt1(Tick limit_ticks, Node child) {
  Node n{.kind = NodeKind::TT1, .ticks = limit_ticks};
  n.children.push_back(std::move(child));
  return n;
}
Node Node::tt2(Tick limit_ticks, Node child) {
  Node n{.kind = NodeKind::TT2, .ticks = limit_ticks};
  n.children.push_back(std::move(child));
  return n;
}
Node Node::condition(std::string tag, bool negated) {
  return Node{.kind = NodeKind::Condition, .tag = std::move(tag), .negated = negated};
}
Node Node::action(std::string tag) { return Node{.kind = NodeKind::Action, .tag = std::move(tag)}; }
Node Node::wait(Tick duration_ticks) { return Node{.kind = NodeKind::Wait, .ticks = duration_ticks}; }

bool Node::is_composite() const {
  return kind == NodeKind::Sequence || kind == NodeKind::Selector || kind == NodeKind::Parallel;
}
bool Node::is_decorator() const {
  return kind == NodeKind::Inverter || kind == NodeKind::TT1 || kind == NodeKind::TT2;
}
bool Node::is_leaf() const { return !is_composite() && !is_decorator(); }

bool operator==(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Condition:
      return a.tag == b.tag && a.negated == b.negated;
    case NodeKind::Action:
      return a.tag == b.tag;
    case NodeKind::Wait:
      return a.ticks == b.ticks;
    case NodeKind::TT1:
    case NodeKind::TT2:
      if (a.ticks != b.ticks) return false;
      break;
    default:
      break;
  }
  return a.children == b.children;
}

UnregisteredAction::UnregisteredAction(std::string tag)
    : std::runtime_error("no handler registered for action '" + tag + "'"), tag_(std::move(tag)) {}

void validate(const Node& tree) {
  if (tree.is_composite() && tree.children.empty()) {
    throw StructuralError(std::string(to_string(tree.kind)) + " has no children");
  }
  if (tree.is_decorator() && tree.children.size() != 1) {
    throw StructuralError(std::string(to_string(tree.kind)) + " must have exactly one child");
  }
  if (tree.is_leaf()) {
    if (!tree.children.empty()) {
      throw StructuralError(std::string(to_string(tree.kind)) + " leaf has children");
    }
    if ((tree.kind == NodeKind::Condition || tree.kind == NodeKind::Action) && !is_identifier(tree.tag)) {
      throw StructuralError("invalid tag '" + tree.tag + "'");
    }
  }
  for (const auto& c : tree.children) validate(c);
}

bool StateManager::flag(std::string_view name) const {
  auto it = flags.find(name);
  return it != flags.end() && it->second;
}

void StateManager::set_flag(std::string_view name, bool value) {
  auto it = flags.find(name);
  if (it != flags.end()) {
    it->second = value;
  } else {
    flags.emplace(std::string(name), value);
  }
}

Vec2 StateManager::vector(std::string_view name) const {
  auto it = vectors.find(name);
  return it != vectors.end() ? it->second : Vec2{};
}

void StateManager::set_vector(std::string_view name, Vec2 value) {
  auto it = vectors.find(name);
  if (it != vectors.end()) {
    it->second = value;
  } else {
    vectors.emplace(std::string(name), value);
  }
}

void StateManager::set_cooldown(Tick now) {
  set_flag(kCooldownFlag, true);
  cooldown_set_tick = now;
}

void StateManager::clear_cooldown() { set_flag(kCooldownFlag, false); }

void ActionRegistry::add(std::string tag, ActionHandler handler) {
  handlers_.insert_or_assign(std::move(tag), std::move(handler));
}

bool ActionRegistry::contains(std::string_view tag) const { return handlers_.find(tag) != handlers_.end(); }

const ActionHandler* ActionRegistry::find(std::string_view tag) const {
  auto it = handlers_.find(tag);
  return it == handlers_.end() ? nullptr : &it->second;
}

namespace {

// Pulse timer: waits `ticks` from its first tick, then runs the child once and
// reports Success regardless of the child's outcome. Failure while waiting.
NodeStatus tick_tt1(Node& node, StateManager& sm, const ActionRegistry& reg, AgentId agent) {
  if (!node.timer.started) {
    node.timer.started = true;
    node.timer.start_tick = sm.tick_now;
  }
  if (sm.tick_now - node.timer.start_tick >= node.ticks) {
    tick(node.children.front(), sm, reg, agent);
    node.timer.started = false;
    return NodeStatus::Success;
  }
  return NodeStatus::Failure;
}

// Run timer: runs the child on every tick with elapsed <= limit and reports
// Success; the first tick past the limit reports Failure and re-arms.
NodeStatus tick_tt2(Node& node, StateManager& sm, const ActionRegistry& reg, AgentId agent) {
  if (!node.timer.started) {
    node.timer.started = true;
    node.timer.start_tick = sm.tick_now;
  }
  if (sm.tick_now - node.timer.start_tick <= node.ticks) {
    tick(node.children.front(), sm, reg, agent);
    return NodeStatus::Success;
  }
  node.timer.started = false;
  return NodeStatus::Failure;
}

NodeStatus tick_wait(Node& node, const StateManager& sm) {
  if (!node.timer.started) {
    node.timer.started = true;
    node.timer.start_tick = sm.tick_now;
  }
  if (sm.tick_now - node.timer.start_tick >= node.ticks) {
    node.timer.started = false;
    return NodeStatus::Success;
  }
  return NodeStatus::Running;
}

}  // namespace

NodeStatus tick(Node& node, StateManager& sm, const ActionRegistry& registry, AgentId agent) {
  switch (node.kind) {
    case NodeKind::Sequence:
      for (auto& child : node.children) {
        const NodeStatus s = tick(child, sm, registry, agent);
        if (s != NodeStatus::Success) return s;
      }
      return NodeStatus::Success;

    case NodeKind::Selector:
      for (auto& child : node.children) {
        const NodeStatus s = tick(child, sm, registry, agent);
        if (s != NodeStatus::Failure) return s;
      }
      return NodeStatus::Failure;

    case NodeKind::Parallel: {
      bool any_running = false;
      bool all_success = true;
      // Index loop: handlers may replace sibling sub-trees (knowledge merge).
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        const NodeStatus s = tick(node.children[i], sm, registry, agent);
        any_running = any_running || s == NodeStatus::Running;
        all_success = all_success && s == NodeStatus::Success;
      }
      if (any_running) return NodeStatus::Running;
      return all_success ? NodeStatus::Success : NodeStatus::Failure;
    }

    case NodeKind::Inverter:
      switch (tick(node.children.front(), sm, registry, agent)) {
        case NodeStatus::Success: return NodeStatus::Failure;
        case NodeStatus::Failure: return NodeStatus::Success;
        case NodeStatus::Running: return NodeStatus::Running;
      }
      return NodeStatus::Failure;

    case NodeKind::TT1:
      return tick_tt1(node, sm, registry, agent);

    case NodeKind::TT2:
      return tick_tt2(node, sm, registry, agent);

    case NodeKind::Condition:
      return sm.flag(node.tag) != node.negated ? NodeStatus::Success : NodeStatus::Failure;

    case NodeKind::Action: {
      const ActionHandler* handler = registry.find(node.tag);
      if (handler == nullptr) throw UnregisteredAction(node.tag);
      return (*handler)(sm, agent);
    }

    case NodeKind::Wait:
      return tick_wait(node, sm);
  }
  return NodeStatus::Failure;
}

void reset_in_place(Node& tree) {
  tree.timer = TimerState{};
  for (auto& c : tree.children) reset_in_place(c);
}

Node reset(const Node& tree) {
  Node copy = tree;
  reset_in_place(copy);
  return copy;
}

}  // namespace ktbt
