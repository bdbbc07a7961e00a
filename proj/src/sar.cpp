#include "ktbt/sar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ktbt/metrics.hpp"
#include "ktbt/stringbt.hpp"

namespace ktbt {

namespace {

constexpr const char* kCollisionFlag = "_collisionDetectedF";
constexpr const char* kOnBoardFlag = "_treasureOnBoardF";
constexpr const char* kInZoneFlag = "_inZoneF";
constexpr const char* kCollisionVector = "V_c";
constexpr const char* kTargetVector = "target";

constexpr int kPlacementAttempts = 10000;

const char* color_name(Color c) {
  switch (c) {
    case Color::Red: return "Red";
    case Color::Green: return "Green";
    case Color::Yellow: return "Yellow";
    case Color::Blue: return "Blue";
  }
  return "?";
}

}  // namespace

char color_letter(Color c) {
  switch (c) {
    case Color::Red: return 'R';
    case Color::Green: return 'G';
    case Color::Yellow: return 'Y';
    case Color::Blue: return 'B';
  }
  return '?';
}

std::string detected_flag(Color c) { return std::string("_target") + color_letter(c) + "DetectedF"; }
std::string retrieve_action(Color c) { return std::string("Retrieve") + color_name(c); }
ConditionSequence color_key(Color c) { return ConditionSequence::of(detected_flag(c)); }

std::optional<Color> color_of_key(const ConditionSequence& seq) {
  for (Color c : kColors) {
    if (seq == color_key(c)) return c;
  }
  return std::nullopt;
}

KnowledgeEntry color_knowledge(Color c) { return KnowledgeEntry{color_key(c), Node::action(retrieve_action(c))}; }

char type_letter(RobotType t) {
  switch (t) {
    case RobotType::Ignorant: return 'I';
    case RobotType::Multi: return 'M';
    case RobotType::Red: return 'R';
    case RobotType::Green: return 'G';
    case RobotType::Yellow: return 'Y';
    case RobotType::Blue: return 'B';
  }
  return '?';
}

std::vector<Color> prior_colors(RobotType t) {
  switch (t) {
    case RobotType::Ignorant: return {};
    case RobotType::Multi: return {kColors.begin(), kColors.end()};
    case RobotType::Red: return {Color::Red};
    case RobotType::Green: return {Color::Green};
    case RobotType::Yellow: return {Color::Yellow};
    case RobotType::Blue: return {Color::Blue};
  }
  return {};
}

Vec2 Rect::nearest_point(Vec2 p) const { return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y)}; }

bool Rect::overlaps(const Rect& o) const {
  return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
}

Arena Arena::make(double width, double height, double zone_side, bool with_obstacles) {
  Arena a;
  a.width = width;
  a.height = height;
  const double s = zone_side;
  a.zones[static_cast<std::size_t>(Color::Red)] = Rect{{0.0, 0.0}, {s, s}};
  a.zones[static_cast<std::size_t>(Color::Green)] = Rect{{width - s, 0.0}, {width, s}};
  a.zones[static_cast<std::size_t>(Color::Yellow)] = Rect{{0.0, height - s}, {s, height}};
  a.zones[static_cast<std::size_t>(Color::Blue)] = Rect{{width - s, height - s}, {width, height}};
  if (with_obstacles) {
    auto bar = [&](double x0, double y0, double x1, double y1) {
      a.obstacles.push_back(Rect{{x0 * width, y0 * height}, {x1 * width, y1 * height}});
    };
    bar(0.25, 0.30, 0.45, 0.34);
    bar(0.55, 0.66, 0.75, 0.70);
    bar(0.30, 0.55, 0.34, 0.75);
    bar(0.66, 0.25, 0.70, 0.45);
  }
  return a;
}

bool Arena::in_obstacle(Vec2 p) const {
  return std::any_of(obstacles.begin(), obstacles.end(), [p](const Rect& r) { return r.contains(p); });
}

bool Arena::in_any_zone(Vec2 p) const {
  return std::any_of(zones.begin(), zones.end(), [p](const Rect& r) { return r.contains(p); });
}

Rng::Rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Vec2 Rng::unit_vector() {
  const double angle = 2.0 * std::numbers::pi * uniform();
  return {std::cos(angle), std::sin(angle)};
}

int SimConfig::robot_count() const {
  int n = 0;
  for (int c : composition) n += c;
  return n;
}

int SimConfig::target_count() const {
  int n = 0;
  for (int c : targets) n += c;
  return n;
}

void SimConfig::validate() const {
  for (int c : composition) {
    if (c < 0) throw ConfigError("composition counts must be nonnegative");
  }
  for (int c : targets) {
    if (c < 0) throw ConfigError("target counts must be nonnegative");
  }
  if (!(arena_width > 0.0) || !(arena_height > 0.0)) throw ConfigError("arena dimensions must be positive");
  if (!(speed > 0.0)) throw ConfigError("speed must be positive");
  if (!(d_t > 0.0)) throw ConfigError("d_t must be positive");
  if (!(d_c >= 0.0)) throw ConfigError("d_c must be nonnegative");
  if (!(d_coms >= 0.0)) throw ConfigError("d_coms must be nonnegative");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (sample_interval == 0) throw ConfigError("sample interval must be positive");
  if (!(zone_fraction > 0.0 && zone_fraction < 0.5)) throw ConfigError("zone fraction must be in (0, 0.5)");
  const double cap = max_density * arena_width * arena_height;
  if (robot_count() > cap + 1e-9) {
    throw ConfigError("too many robots for the arena: " + std::to_string(robot_count()) + " exceeds density cap " +
                      std::to_string(cap));
  }
}

Vec2 collision_resultant(Vec2 position, const std::vector<Vec2>& contacts) {
  Vec2 v;
  for (Vec2 c : contacts) v += c - position;
  return v;
}

World::World(const SimConfig& config, Arena arena, std::size_t trial_index)
    : config_(config), arena_(std::move(arena)), trial_index_(trial_index), medium_(config.d_coms) {
  register_handlers();
}

World::World(const SimConfig& config, std::size_t trial_index)
    : World(config,
            Arena::make(config.arena_width, config.arena_height,
                        config.zone_fraction * std::min(config.arena_width, config.arena_height), config.obstacles),
            trial_index) {
  config_.validate();
  Rng placement({config.seed, trial_index, 0x706c616365ull});

  // Targets keep clear of obstacles by more than d_t + d_c so that a robot
  // that detects one never needs to pass an obstacle to reach it.
  const double target_clearance = config.d_t + config.d_c + 1.0;
  const double robot_clearance = config.d_c + 1.0;
  auto place = [&](double clearance, const char* what) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const Vec2 p{placement.uniform(0.0, arena_.width), placement.uniform(0.0, arena_.height)};
      if (arena_.in_any_zone(p)) continue;
      const bool clear = std::all_of(arena_.obstacles.begin(), arena_.obstacles.end(),
                                     [&](const Rect& r) { return r.distance_to(p) > clearance; });
      if (clear) return p;
    }
    throw ConfigError(std::string("could not place ") + what + " after bounded retries");
  };

  for (std::size_t c = 0; c < kColors.size(); ++c) {
    for (int i = 0; i < config.targets[c]; ++i) add_target(kColors[c], place(target_clearance, "target"));
  }
  for (std::size_t t = 0; t < kRobotTypes.size(); ++t) {
    for (int i = 0; i < config.composition[t]; ++i) add_robot(kRobotTypes[t], place(robot_clearance, "robot"));
  }
}

KtAgent World::make_robot_agent(AgentId id, RobotType type) const {
  Node control = build_control(
      {
          Node::sequence({Node::condition(kCollisionFlag), Node::action("CollisionAvoidance")}),
          Node::sequence({Node::condition(std::string(StateManager::kWaitFlag)), Node::action("StopWalk")}),
      },
      {
          Node::sequence({Node::condition(kOnBoardFlag),
                          Node::selector({
                              Node::sequence({Node::condition(kInZoneFlag), Node::action("PlaceTreasure")}),
                              Node::sequence({Node::condition(kInZoneFlag, true), Node::action("WalkToCollection")}),
                          })}),
      },
      {}, Node::action("RandomWalk"));
  std::vector<KnowledgeEntry> prior;
  for (Color c : prior_colors(type)) prior.push_back(color_knowledge(c));
  return make_agent(id, std::move(control), std::move(prior), config_.mode == TransferMode::KtBt, config_.t1_limit,
                    config_.t2_limit);
}

AgentId World::add_robot(RobotType type, Vec2 position) {
  const auto id = static_cast<AgentId>(robots_.size());
  Robot r;
  r.agent = make_robot_agent(id, type);
  r.type = type;
  r.position = position;
  r.rng = Rng({config_.seed, trial_index_, 0x726f626f74ull, id});
  robots_.push_back(std::move(r));
  return id;
}

std::size_t World::add_target(Color color, Vec2 position) {
  targets_.push_back(Target{color, position, TargetState::OnGround, std::nullopt});
  return targets_.size() - 1;
}

void World::register_handlers() {
  auto bind = [this](std::string tag, NodeStatus (World::*fn)(Robot&)) {
    registry_.add(tag, [this, tag, fn](StateManager&, AgentId id) {
      if (on_action) on_action(id, tag);
      return (this->*fn)(robots_[id]);
    });
  };
  bind("RandomWalk", &World::random_walk);
  bind("CollisionAvoidance", &World::collision_avoidance);
  bind("StopWalk", &World::stop_walk);
  bind("WalkToCollection", &World::walk_to_collection);
  bind("PlaceTreasure", &World::place_treasure);
  for (Color c : kColors) {
    const std::string tag = retrieve_action(c);
    registry_.add(tag, [this, tag, c](StateManager&, AgentId id) {
      if (on_action) on_action(id, tag);
      return retrieve_target(robots_[id], c);
    });
  }
  register_protocol_actions(
      registry_, [this](AgentId id) -> KtAgent& { return robots_[id].agent; },
      [this](const KtAgent& agent) -> std::optional<ConditionSequence> {
        auto color = unknown_encounter(agent);
        if (!color) return std::nullopt;
        return color_key(*color);
      });
}

std::optional<Color> World::unknown_encounter(const KtAgent& agent) const {
  const Robot& r = robots_[agent.id];
  if (!r.sensed_target) return std::nullopt;
  const Color c = targets_[*r.sensed_target].color;
  if (agent.kb.knows(color_key(c))) return std::nullopt;
  return c;
}

void World::sense(Robot& r) {
  StateManager& sm = r.agent.sm;
  const double d_c = config_.d_c;

  // Obstacles contribute their nearest boundary point, other robots their
  // position.
  r.contacts.clear();
  for (const Rect& o : arena_.obstacles) {
    const Vec2 q = o.nearest_point(r.position);
    if (distance(q, r.position) <= d_c) r.contacts.push_back(q);
  }
  for (const Robot& other : robots_) {
    if (other.agent.id == r.agent.id) continue;
    if (distance(other.position, r.position) <= d_c) r.contacts.push_back(other.position);
  }
  sm.set_flag(kCollisionFlag, !r.contacts.empty());
  sm.set_vector(kCollisionVector, collision_resultant(r.position, r.contacts));

  r.sensed_target.reset();
  double best = config_.d_t;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const Target& t = targets_[i];
    if (t.state != TargetState::OnGround) continue;
    const double d = distance(t.position, r.position);
    if (d <= best && (!r.sensed_target || d < best)) {
      best = d;
      r.sensed_target = i;
    }
  }
  for (Color c : kColors) {
    sm.set_flag(detected_flag(c), r.sensed_target && targets_[*r.sensed_target].color == c);
  }
  if (r.sensed_target) sm.set_vector(kTargetVector, targets_[*r.sensed_target].position);

  sm.set_flag(kOnBoardFlag, r.carried.has_value());
  sm.set_flag(kInZoneFlag, r.carried && arena_.zone(targets_[*r.carried].color).contains(r.position));
}

std::pair<bool, bool> World::move_free(Robot& r, Vec2 delta) {
  Vec2 next = r.position + delta;
  const bool hit_x = next.x < 0.0 || next.x > arena_.width;
  const bool hit_y = next.y < 0.0 || next.y > arena_.height;
  next = {std::clamp(next.x, 0.0, arena_.width), std::clamp(next.y, 0.0, arena_.height)};
  if (arena_.in_obstacle(next)) {
    const Vec2 x_only{next.x, r.position.y};
    const Vec2 y_only{r.position.x, next.y};
    if (!arena_.in_obstacle(x_only)) {
      next = x_only;
    } else if (!arena_.in_obstacle(y_only)) {
      next = y_only;
    } else {
      next = r.position;
    }
    r.position = next;
    return {true, true};
  }
  r.position = next;
  return {hit_x, hit_y};
}

void World::move_toward(Robot& r, Vec2 goal) {
  const Vec2 to_goal = goal - r.position;
  const double dist = to_goal.length();
  if (dist == 0.0) return;
  Vec2 step = to_goal * (std::min(config_.speed, dist) / dist);

  // Remove the component of the step that would carry the robot into the
  // contact range of an obstacle or another robot.
  std::optional<Vec2> last_normal;
  auto slide = [&](Vec2 nearest) {
    const Vec2 next = r.position + step;
    if (distance(next, nearest) > config_.d_c) return;
    const Vec2 n = (r.position - nearest).normalized();
    if (n == Vec2{}) return;
    const double into = step.dot(n);
    if (into < 0.0) {
      step -= n * into;
      last_normal = n;
    }
  };
  for (const Rect& o : arena_.obstacles) slide(o.nearest_point(r.position));
  for (const Robot& other : robots_) {
    if (other.agent.id != r.agent.id) slide(other.position);
  }
  if (last_normal && step.length() < 1e-9) {
    // Head-on: go round counter-clockwise.
    step = last_normal->perp() * config_.speed;
  }
  move_free(r, step);
}

NodeStatus World::random_walk(Robot& r) {
  if (r.walk_remaining == 0) {
    r.walk_heading = r.rng.unit_vector();
    r.walk_remaining = config_.walk_duration;
  }
  auto [hit_x, hit_y] = move_free(r, r.walk_heading * config_.speed);
  if (hit_x) r.walk_heading.x = -r.walk_heading.x;
  if (hit_y) r.walk_heading.y = -r.walk_heading.y;
  if (r.walk_remaining > 0) --r.walk_remaining;
  return r.walk_remaining == 0 ? NodeStatus::Success : NodeStatus::Running;
}

NodeStatus World::collision_avoidance(Robot& r) {
  const Vec2 v_c = r.agent.sm.vector(kCollisionVector);
  Vec2 dir = (-v_c).normalized();
  if (v_c.length() < 1e-12 && !r.contacts.empty()) {
    // Balanced contacts: turn a quarter from the first contact direction.
    dir = (r.contacts.front() - r.position).perp().normalized();
    if (dir == Vec2{}) dir = {1.0, 0.0};
  }
  move_free(r, dir * config_.speed);
  r.walk_remaining = 0;  // abandon the current random-walk leg
  return NodeStatus::Success;
}

NodeStatus World::stop_walk(Robot&) { return NodeStatus::Success; }

NodeStatus World::walk_to_collection(Robot& r) {
  if (!r.carried) return NodeStatus::Failure;
  const Rect& zone = arena_.zone(targets_[*r.carried].color);
  move_toward(r, zone.center());
  const bool inside = zone.contains(r.position);
  r.agent.sm.set_flag(kInZoneFlag, inside);
  return inside ? NodeStatus::Success : NodeStatus::Running;
}

NodeStatus World::place_treasure(Robot& r) {
  if (!r.carried) return NodeStatus::Failure;
  Target& t = targets_[*r.carried];
  if (!arena_.zone(t.color).contains(r.position)) return NodeStatus::Failure;
  t.state = TargetState::Collected;
  t.carrier.reset();
  r.carried.reset();
  r.agent.sm.set_flag(kOnBoardFlag, false);
  r.agent.sm.set_flag(kInZoneFlag, false);
  return NodeStatus::Success;
}

NodeStatus World::retrieve_target(Robot& r, Color color) {
  if (r.carried || !r.sensed_target) return NodeStatus::Failure;
  Target& t = targets_[*r.sensed_target];
  if (t.state != TargetState::OnGround || t.color != color) return NodeStatus::Failure;
  move_toward(r, t.position);
  if (distance(r.position, t.position) < config_.pickup_radius) {
    t.state = TargetState::Carried;
    t.carrier = r.agent.id;
    r.carried = *r.sensed_target;
    r.agent.sm.set_flag(kOnBoardFlag, true);
    return NodeStatus::Success;
  }
  return NodeStatus::Running;
}

void World::step() {
  for (Robot& r : robots_) sense(r);
  for (Robot& r : robots_) tick_agent(r.agent, registry_, tick_);
  for (Robot& r : robots_) {
    for (Message& m : r.agent.sm.outbox) medium_.broadcast(r.agent.id, r.position, std::move(m));
    r.agent.sm.outbox.clear();
  }
  std::vector<Endpoint> endpoints;
  endpoints.reserve(robots_.size());
  for (Robot& r : robots_) endpoints.push_back(Endpoint{r.agent.id, r.position, &r.agent.sm, &r.agent.kb});
  medium_.deliver(endpoints);
  ++tick_;
}

std::size_t World::collected() const {
  return static_cast<std::size_t>(std::count_if(targets_.begin(), targets_.end(), [](const Target& t) {
    return t.state == TargetState::Collected;
  }));
}

double World::collected_pct() const {
  if (targets_.empty()) return 100.0;
  return 100.0 * static_cast<double>(collected()) / static_cast<double>(targets_.size());
}

bool World::all_collected() const { return collected() == targets_.size(); }

int World::colors_known(AgentId id) const {
  const KnowledgeBase& kb = robots_.at(id).agent.kb;
  return static_cast<int>(std::count_if(kColors.begin(), kColors.end(), [&](Color c) { return kb.knows(color_key(c)); }));
}

std::vector<int> World::knowledge_levels() const {
  std::vector<int> levels;
  levels.reserve(robots_.size());
  for (const Robot& r : robots_) levels.push_back(colors_known(r.agent.id));
  return levels;
}

void World::check_invariants() const {
  std::size_t on_ground = 0, carried = 0, collected_n = 0;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const Target& t = targets_[i];
    switch (t.state) {
      case TargetState::OnGround: ++on_ground; break;
      case TargetState::Collected: ++collected_n; break;
      case TargetState::Carried: {
        ++carried;
        if (!t.carrier || *t.carrier >= robots_.size() || robots_[*t.carrier].carried != i) {
          throw std::logic_error("carried target without a consistent carrier");
        }
        break;
      }
    }
  }
  if (on_ground + carried + collected_n != targets_.size()) throw std::logic_error("target conservation violated");
  for (const Robot& r : robots_) {
    if (!arena_.in_bounds(r.position)) throw std::logic_error("robot left the arena");
    if (arena_.in_obstacle(r.position)) throw std::logic_error("robot inside an obstacle");
    if (r.carried && targets_[*r.carried].state != TargetState::Carried) {
      throw std::logic_error("robot carries a target that is not marked carried");
    }
  }
}

SampleRow sample(const World& world) {
  SampleRow row;
  row.tick = world.now();
  row.collected_pct = world.collected_pct();
  row.robot_levels = world.knowledge_levels();
  for (int level : row.robot_levels) ++row.knows[static_cast<std::size_t>(level)];
  if (!row.robot_levels.empty()) {
    const SpeciesCensus census = SpeciesCensus::from_levels(row.robot_levels);
    const DistanceMatrix dm = DistanceMatrix::knowledge_distance();
    row.complexity = complexity(census);
    row.disparity = disparity(census, dm);
    row.heterogeneity = row.complexity * row.disparity;
    row.knowledge_score = mean_knowledge_score(row.robot_levels);
  }
  const CommStats& s = world.medium().stats();
  row.queries_sent = s.queries_sent;
  row.queries_lost = s.queries_lost;
  row.responses_sent = s.responses_sent;
  return row;
}

TrialResult run_trial(const SimConfig& config, std::size_t trial_index) {
  World world(config, trial_index);
  TrialResult result;
  const std::size_t n_t = world.targets().size();
  const auto reached_99 = [&] { return static_cast<double>(world.collected()) >= 0.99 * static_cast<double>(n_t); };

  result.series.push_back(sample(world));
  if (reached_99()) result.ticks_to_99 = 0;
  while (world.now() < config.iterations && !world.all_collected()) {
    world.step();
    if (!result.ticks_to_99 && reached_99()) result.ticks_to_99 = world.now();
    if (world.now() % config.sample_interval == 0) result.series.push_back(sample(world));
  }
  if (result.series.back().tick != world.now()) result.series.push_back(sample(world));

  result.ticks_run = world.now();
  result.comms = world.medium().stats();
  for (const Robot& r : world.robots()) {
    std::vector<std::string> kb;
    for (const auto& e : r.agent.kb.entries()) kb.push_back(serialize_conditions(e.seq) + " => " + serialize(e.action));
    result.final_kb.push_back(std::move(kb));
  }
  return result;
}

}  // namespace ktbt
