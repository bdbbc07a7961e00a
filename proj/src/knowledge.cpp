#include "ktbt/knowledge.hpp"

#include <stdexcept>

#include "ktbt/stringbt.hpp"

namespace ktbt {

std::optional<std::size_t> KnowledgeBase::index_of(const ConditionSequence& seq) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].seq == seq) return i;
  }
  return std::nullopt;
}

bool KnowledgeBase::add(ConditionSequence seq, Node action) {
  if (knows(seq)) return false;
  entries_.push_back(KnowledgeEntry{std::move(seq), reset(action)});
  return true;
}

Node build_control(std::vector<Node> critical, std::vector<Node> common, std::vector<Node> prior, Node fallback) {
  std::vector<Node> children;
  children.reserve(critical.size() + common.size() + prior.size() + 1);
  for (auto* group : {&critical, &common, &prior}) {
    for (auto& n : *group) children.push_back(std::move(n));
  }
  children.push_back(std::move(fallback));
  return Node::selector(std::move(children));
}

Node build_teach_tree(Tick t1_limit) {
  return Node::selector({
      Node::sequence({Node::condition(std::string(StateManager::kCooldownFlag)),
                      Node::tt1(t1_limit, Node::action(kClearCooldownAction))}),
      Node::action(kTeachAction),
  });
}

Node build_learn_tree() {
  return Node::selector({
      Node::sequence({Node::condition(std::string(StateManager::kWaitFlag)), Node::action(kAwaitResponseAction)}),
      Node::sequence(
          {Node::condition(std::string(StateManager::kCooldownFlag), true), Node::action(kQueryUnknownAction)}),
  });
}

KtAgent make_agent(AgentId id, Node control, std::vector<KnowledgeEntry> prior, bool transfer, Tick t1_limit,
                   Tick t2_limit) {
  KtAgent agent;
  agent.id = id;
  agent.t1_limit = t1_limit;
  agent.t2_limit = t2_limit;
  for (auto& entry : prior) {
    control = merge_knowledge(control, entry.seq, entry.action);
    agent.kb.add(std::move(entry.seq), std::move(entry.action));
  }
  std::vector<Node> parts;
  parts.push_back(std::move(control));
  if (transfer) {
    parts.push_back(build_teach_tree(t1_limit));
    parts.push_back(build_learn_tree());
  }
  agent.tree = Node::parallel(std::move(parts));
  return agent;
}

std::optional<Message> teach(KtAgent& agent) {
  StateManager& sm = agent.sm;
  if (sm.cooldown_active()) return std::nullopt;
  while (!sm.query_inbox.empty()) {
    Message query = std::move(sm.query_inbox.front());
    sm.query_inbox.pop_front();
    if (query.kind != MessageKind::Query) {
      ++agent.protocol_errors;
      continue;
    }
    if (query.sent_tick + agent.t2_limit < sm.tick_now) continue;  // stale: asker gave up

    ConditionSequence seq;
    try {
      seq = parse_conditions(query.payload);
    } catch (const ParseError&) {
      ++agent.protocol_errors;
      return std::nullopt;
    }
    const auto index = agent.kb.index_of(seq);
    if (!index) return std::nullopt;

    Message response{.kind = MessageKind::Response,
                     .sender = agent.id,
                     .sent_tick = sm.tick_now,
                     .payload = serialize(agent.kb.entries()[*index].action),
                     .in_reply_to = serialize_conditions(seq)};
    sm.set_cooldown(sm.tick_now);
    return response;
  }
  return std::nullopt;
}

std::optional<Message> learn_begin(KtAgent& agent, const ConditionSequence& seq) {
  if (agent.pending_query || agent.sm.cooldown_active() || agent.kb.knows(seq)) return std::nullopt;
  agent.pending_query = PendingQuery{seq, agent.sm.tick_now};
  agent.sm.set_flag(StateManager::kWaitFlag, true);
  return Message{.kind = MessageKind::Query,
                 .sender = agent.id,
                 .sent_tick = agent.sm.tick_now,
                 .payload = serialize_conditions(seq),
                 .in_reply_to = {}};
}

const char* to_string(LearnOutcome o) {
  switch (o) {
    case LearnOutcome::Learned: return "Learned";
    case LearnOutcome::TimedOut: return "TimedOut";
    case LearnOutcome::StillWaiting: return "StillWaiting";
    case LearnOutcome::Idle: return "Idle";
  }
  return "?";
}

namespace {

void check_knowledge_reachable(const KtAgent& agent) {
  for (const auto& entry : agent.kb.entries()) {
    auto found = find_knowledge(agent.control(), entry.seq);
    if (!found || !(*found == entry.action)) {
      throw std::logic_error("knowledge base entry not reachable in control tree");
    }
  }
}

}  // namespace

LearnOutcome learn_complete(KtAgent& agent) {
  StateManager& sm = agent.sm;
  if (!agent.pending_query) {
    sm.response_inbox.clear();
    return LearnOutcome::Idle;
  }
  const ConditionSequence& seq = agent.pending_query->seq;
  const std::string wanted = serialize_conditions(seq);

  while (!sm.response_inbox.empty()) {
    Message response = std::move(sm.response_inbox.front());
    sm.response_inbox.pop_front();
    if (response.kind != MessageKind::Response || response.in_reply_to != wanted) continue;
    Node subtree;
    try {
      subtree = parse(response.payload);
    } catch (const ParseError&) {
      ++agent.protocol_errors;
      continue;
    }
    agent.kb.add(seq, subtree);
    agent.control() = merge_knowledge(agent.control(), seq, subtree);
    agent.pending_query.reset();
    sm.set_flag(StateManager::kWaitFlag, false);
    sm.response_inbox.clear();  // later answers to the same query are redundant
    check_knowledge_reachable(agent);
    return LearnOutcome::Learned;
  }

  if (sm.tick_now - agent.pending_query->issued_tick > agent.t2_limit) {
    agent.pending_query.reset();
    sm.set_flag(StateManager::kWaitFlag, false);
    sm.set_cooldown(sm.tick_now);
    return LearnOutcome::TimedOut;
  }
  return LearnOutcome::StillWaiting;
}

void register_protocol_actions(ActionRegistry& registry, AgentLookup lookup, EncounterFn encounter) {
  registry.add(kTeachAction, [lookup](StateManager&, AgentId id) {
    KtAgent& agent = lookup(id);
    auto response = teach(agent);
    if (!response) return NodeStatus::Failure;
    agent.sm.outbox.push_back(std::move(*response));
    return NodeStatus::Success;
  });
  registry.add(kClearCooldownAction, [](StateManager& sm, AgentId) {
    sm.clear_cooldown();
    return NodeStatus::Success;
  });
  registry.add(kAwaitResponseAction, [lookup](StateManager&, AgentId id) {
    switch (learn_complete(lookup(id))) {
      case LearnOutcome::Learned: return NodeStatus::Success;
      case LearnOutcome::StillWaiting: return NodeStatus::Running;
      case LearnOutcome::TimedOut:
      case LearnOutcome::Idle: return NodeStatus::Failure;
    }
    return NodeStatus::Failure;
  });
  registry.add(kQueryUnknownAction, [lookup, encounter](StateManager&, AgentId id) {
    KtAgent& agent = lookup(id);
    auto seq = encounter(agent);
    if (!seq) return NodeStatus::Failure;
    auto query = learn_begin(agent, *seq);
    if (!query) return NodeStatus::Failure;
    agent.sm.outbox.push_back(std::move(*query));
    return NodeStatus::Success;
  });
}

NodeStatus tick_agent(KtAgent& agent, const ActionRegistry& registry, Tick now) {
  agent.sm.tick_now = now;
  return tick(agent.tree, agent.sm, registry, agent.id);
}

}  // namespace ktbt
