#pragma once

// Shared test fixtures: an independent reference evaluator, random tree
// generators and the SAR control listing.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ktbt/bt.hpp"

namespace ktbt::testing {

inline const std::string kControlListing = R"(<Root>
<sl>
 <sq><c>(_collisionDetectedF)
      <a>(CollisionAvoidance)<e>
 <sq><c>(_waitF)
      <a>(StopWalk)<e>
 <sq><c>(_treasureOnBoardF)
      <sl><sq><c>(_inZoneF)
               <a>(PlaceTreasure)<e>
          <sq><c>(!_inZoneF)
               <a>(WalkToCollection)<e><e><e>
 <a>(RandomWalk)<e>
)";

inline const std::string kControlCanonical =
    "<Root><sl><sq><c>(_collisionDetectedF)<a>(CollisionAvoidance)<e><sq><c>(_waitF)<a>(StopWalk)<e>"
    "<sq><c>(_treasureOnBoardF)<sl><sq><c>(_inZoneF)<a>(PlaceTreasure)<e><sq><c>(!_inZoneF)"
    "<a>(WalkToCollection)<e><e><e><a>(RandomWalk)<e>";

inline const std::array<std::string, 5> kOracleFlags = {"f0", "f1", "f2", "f3", "f4"};

// Leaves "S", "F", "R" are actions with a fixed result.
enum class Res { S, F, R };

// Reference semantics for timer-free trees, written straight from the node
// definitions without sharing code with the engine.
inline Res reference_eval(const Node& n, const std::map<std::string, bool>& flags) {
  switch (n.kind) {
    case NodeKind::Condition: {
      auto it = flags.find(n.tag);
      const bool value = it != flags.end() && it->second;
      return (n.negated ? !value : value) ? Res::S : Res::F;
    }
    case NodeKind::Action:
      if (n.tag == "S") return Res::S;
      if (n.tag == "F") return Res::F;
      return Res::R;
    case NodeKind::Inverter: {
      const Res r = reference_eval(n.children[0], flags);
      return r == Res::S ? Res::F : r == Res::F ? Res::S : Res::R;
    }
    case NodeKind::Sequence:
      for (const Node& c : n.children) {
        const Res r = reference_eval(c, flags);
        if (r != Res::S) return r;
      }
      return Res::S;
    case NodeKind::Selector:
      for (const Node& c : n.children) {
        const Res r = reference_eval(c, flags);
        if (r != Res::F) return r;
      }
      return Res::F;
    case NodeKind::Parallel: {
      bool running = false, all_success = true;
      for (const Node& c : n.children) {
        const Res r = reference_eval(c, flags);
        running = running || r == Res::R;
        all_success = all_success && r == Res::S;
      }
      return running ? Res::R : all_success ? Res::S : Res::F;
    }
    default:
      throw std::logic_error("reference_eval: timer nodes are out of scope");
  }
}

inline NodeStatus to_status(Res r) {
  return r == Res::S ? NodeStatus::Success : r == Res::F ? NodeStatus::Failure : NodeStatus::Running;
}

struct TreeGen {
  std::mt19937_64 rng;
  bool with_timers = true;
  bool with_parallel = true;
  bool with_fixed_actions = false;  // oracle leaves S/F/R

  explicit TreeGen(std::uint64_t seed) : rng(seed) {}

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

  std::string ident() {
    static const std::string first = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    static const std::string rest = first + "0123456789";
    std::string s(1, first[pick(first.size())]);
    const std::size_t len = pick(8);
    for (std::size_t i = 0; i < len; ++i) s += rest[pick(rest.size())];
    return s;
  }

  Node leaf() {
    if (with_fixed_actions) {
      switch (pick(3)) {
        case 0: return Node::condition(kOracleFlags[pick(5)], pick(2) == 1);
        case 1: return Node::condition(kOracleFlags[pick(5)], pick(2) == 1);
        default: return Node::action(std::array<const char*, 3>{"S", "F", "R"}[pick(3)]);
      }
    }
    switch (pick(3)) {
      case 0: return Node::condition(ident(), pick(2) == 1);
      case 1: return Node::action(ident());
      default: return Node::wait(pick(1000));
    }
  }

  // Depth counts nodes on the longest root-to-leaf path.
  Node tree(int depth) {
    if (depth <= 1 || pick(4) == 0) return leaf();
    std::vector<NodeKind> kinds = {NodeKind::Sequence, NodeKind::Selector, NodeKind::Inverter};
    if (with_parallel) kinds.push_back(NodeKind::Parallel);
    if (with_timers) {
      kinds.push_back(NodeKind::TT1);
      kinds.push_back(NodeKind::TT2);
    }
    switch (const NodeKind k = kinds[pick(kinds.size())]) {
      case NodeKind::Inverter: return Node::inverter(tree(depth - 1));
      case NodeKind::TT1: return Node::tt1(pick(100), tree(depth - 1));
      case NodeKind::TT2: return Node::tt2(pick(100), tree(depth - 1));
      default: {
        std::vector<Node> children;
        const std::size_t n = 1 + pick(4);
        for (std::size_t i = 0; i < n; ++i) children.push_back(tree(depth - 1));
        if (k == NodeKind::Sequence) return Node::sequence(std::move(children));
        if (k == NodeKind::Selector) return Node::selector(std::move(children));
        return Node::parallel(std::move(children));
      }
    }
  }
};

inline int depth_of(const Node& n) {
  int d = 0;
  for (const Node& c : n.children) d = std::max(d, depth_of(c));
  return d + 1;
}

inline bool uses_kind(const Node& n, NodeKind k) {
  if (n.kind == k) return true;
  for (const Node& c : n.children) {
    if (uses_kind(c, k)) return true;
  }
  return false;
}

}  // namespace ktbt::testing
