#pragma once

// Deterministic 2D multi-robot search-and-rescue world.
//
// Robots are omnidirectional points moving at constant speed. Each carries a
// KtAgent whose control tree drives the action handlers registered here.
// A tick runs in fixed phases: sense all robots, tick all agent trees,
// broadcast outboxes, deliver, advance the clock. Robots are visited in id
// order within each phase.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ktbt/bt.hpp"
#include "ktbt/comms.hpp"
#include "ktbt/knowledge.hpp"
#include "ktbt/vec2.hpp"

namespace ktbt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Color : std::uint8_t { Red, Green, Yellow, Blue };
inline constexpr std::array<Color, 4> kColors = {Color::Red, Color::Green, Color::Yellow, Color::Blue};

char color_letter(Color c);
/// "_targetRDetectedF" etc.
std::string detected_flag(Color c);
/// "RetrieveRed" etc.
std::string retrieve_action(Color c);
/// The knowledge key for handling targets of color `c`.
ConditionSequence color_key(Color c);
/// Inverse of color_key.
std::optional<Color> color_of_key(const ConditionSequence& seq);
/// Sequence[Condition(detected), Action(Retrieve<c>)] split as a knowledge entry.
KnowledgeEntry color_knowledge(Color c);

enum class RobotType : std::uint8_t { Ignorant, Multi, Red, Green, Yellow, Blue };
inline constexpr std::array<RobotType, 6> kRobotTypes = {RobotType::Ignorant, RobotType::Multi, RobotType::Red,
                                                        RobotType::Green,    RobotType::Yellow, RobotType::Blue};
char type_letter(RobotType t);
std::vector<Color> prior_colors(RobotType t);

struct Rect {
  Vec2 lo;
  Vec2 hi;

  bool contains(Vec2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  Vec2 center() const { return (lo + hi) * 0.5; }
  Vec2 nearest_point(Vec2 p) const;
  double distance_to(Vec2 p) const { return distance(nearest_point(p), p); }
  bool overlaps(const Rect& o) const;
};

/// [0,width] x [0,height] with a square collection zone in each corner:
/// red (0,0), green (width,0), yellow (0,height), blue (width,height).
struct Arena {
  double width = 1000.0;
  double height = 1000.0;
  std::array<Rect, 4> zones{};
  std::vector<Rect> obstacles;

  static Arena make(double width, double height, double zone_side, bool with_obstacles);
  const Rect& zone(Color c) const { return zones[static_cast<std::size_t>(c)]; }
  bool in_bounds(Vec2 p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }
  bool in_obstacle(Vec2 p) const;
  bool in_any_zone(Vec2 p) const;
};

enum class TargetState : std::uint8_t { OnGround, Carried, Collected };

struct Target {
  Color color = Color::Red;
  Vec2 position;
  TargetState state = TargetState::OnGround;
  std::optional<AgentId> carrier;
};

/// Reproducible stream built on mt19937_64 with a standardized seeding path
/// and our own bit-to-double conversion, so values do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::initializer_list<std::uint64_t> key);
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Vec2 unit_vector();

 private:
  std::mt19937_64 engine_;
};

struct Robot {
  KtAgent agent;
  RobotType type = RobotType::Ignorant;
  Vec2 position;
  std::optional<std::size_t> carried;
  Vec2 walk_heading;
  Tick walk_remaining = 0;
  Rng rng;
  // Latest sensing results.
  std::optional<std::size_t> sensed_target;
  std::vector<Vec2> contacts;
};

enum class TransferMode : std::uint8_t { NoTransfer, KtBt };

struct SimConfig {
  TransferMode mode = TransferMode::KtBt;
  /// Robot counts in the order (I, M, R, G, Y, B).
  std::array<int, 6> composition{};
  /// Target counts in the order (R, G, Y, B).
  std::array<int, 4> targets{};
  double d_coms = 200.0;
  bool obstacles = false;
  Tick iterations = 50000;
  int trials = 20;
  std::uint64_t seed = 1;
  double arena_width = 1000.0;
  double arena_height = 1000.0;
  double speed = 1.0;
  double d_t = 30.0;
  double d_c = 10.0;
  Tick t1_limit = kDefaultT1Limit;
  Tick t2_limit = kDefaultT2Limit;

  double pickup_radius = 2.0;
  Tick walk_duration = 60;
  /// Zone side as a fraction of the shorter arena dimension.
  double zone_fraction = 0.1;
  Tick sample_interval = 100;
  /// Robots per unit area; 40 robots in a 1000 x 1000 arena.
  double max_density = 40.0 / 1.0e6;

  int robot_count() const;
  int target_count() const;
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// The collision vector: sum over contact points of (contact - position).
Vec2 collision_resultant(Vec2 position, const std::vector<Vec2>& contacts);

class World {
 public:
  /// Randomly populated world for trial `trial_index`.
  World(const SimConfig& config, std::size_t trial_index);
  /// Empty world over `arena`, for hand-built scenarios.
  World(const SimConfig& config, Arena arena, std::size_t trial_index = 0);

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  AgentId add_robot(RobotType type, Vec2 position);
  std::size_t add_target(Color color, Vec2 position);

  void step();

  /// Updates the robot's blackboard from the world: collision contacts and
  /// V_c, nearest on-ground target in range, carried/zone status.
  void sense(Robot& robot);

  Tick now() const { return tick_; }
  const SimConfig& config() const { return config_; }
  const Arena& arena() const { return arena_; }
  const std::vector<Robot>& robots() const { return robots_; }
  Robot& robot(AgentId id) { return robots_.at(id); }
  const std::vector<Target>& targets() const { return targets_; }
  Target& target(std::size_t i) { return targets_.at(i); }
  const Medium& medium() const { return medium_; }
  Medium& medium() { return medium_; }
  const ActionRegistry& registry() const { return registry_; }

  std::size_t collected() const;
  double collected_pct() const;
  bool all_collected() const;

  /// Colors robot `id` can handle, from its knowledge base.
  int colors_known(AgentId id) const;
  std::vector<int> knowledge_levels() const;

  /// Throws std::logic_error when conservation, containment or carrier
  /// consistency is broken.
  void check_invariants() const;

  /// Invoked with (robot, action tag) whenever an action handler runs.
  std::function<void(AgentId, std::string_view)> on_action;

 private:
  void register_handlers();
  KtAgent make_robot_agent(AgentId id, RobotType type) const;

  NodeStatus random_walk(Robot& r);
  NodeStatus collision_avoidance(Robot& r);
  NodeStatus stop_walk(Robot& r);
  NodeStatus walk_to_collection(Robot& r);
  NodeStatus place_treasure(Robot& r);
  NodeStatus retrieve_target(Robot& r, Color color);

  /// Straight move clipped to the arena; returns which axes hit a wall.
  std::pair<bool, bool> move_free(Robot& r, Vec2 delta);
  /// Goal-directed step that slides along contacts instead of entering them.
  void move_toward(Robot& r, Vec2 goal);
  std::optional<Color> unknown_encounter(const KtAgent& agent) const;

  SimConfig config_;
  Arena arena_;
  std::size_t trial_index_;
  std::vector<Robot> robots_;
  std::vector<Target> targets_;
  Medium medium_;
  ActionRegistry registry_;
  Tick tick_ = 0;
};

struct SampleRow {
  Tick tick = 0;
  double collected_pct = 0.0;
  std::array<int, 5> knows{};
  double complexity = 0.0;
  double disparity = 0.0;
  double heterogeneity = 0.0;
  double knowledge_score = 0.0;
  std::size_t queries_sent = 0;
  std::size_t queries_lost = 0;
  std::size_t responses_sent = 0;
  /// Colors known by each robot, in id order.
  std::vector<int> robot_levels;
};

struct TrialResult {
  std::vector<SampleRow> series;
  /// Ticks until at least 99% of targets were collected, if ever.
  std::optional<Tick> ticks_to_99;
  Tick ticks_run = 0;
  CommStats comms;
  /// Canonical serialization of every robot's knowledge base.
  std::vector<std::vector<std::string>> final_kb;
};

SampleRow sample(const World& world);
TrialResult run_trial(const SimConfig& config, std::size_t trial_index);

}  // namespace ktbt
